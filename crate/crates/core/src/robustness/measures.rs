use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bases::{expand, gellmann_basis};
use crate::conic::{solve, BlockMap, Cone, ConicProgram, ConicSolution, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::qmat::{eig_hermitian, ComplexMatrix, Subsystem};
use crate::sot::StateOverTime;

use super::models::{Assemblage, Behavior, DeterministicStrategySet, STRATEGY_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "TER")]
    Ter,
    #[serde(rename = "ER")]
    Er,
    #[serde(rename = "TSR")]
    Tsr,
    #[serde(rename = "TNR")]
    Tnr,
    #[serde(rename = "LHV-TNR")]
    LhvTnr,
    #[serde(rename = "g")]
    G,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::F,
        Measure::Ter,
        Measure::Er,
        Measure::Tsr,
        Measure::Tnr,
        Measure::LhvTnr,
        Measure::G,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Measure::F => "f",
            Measure::Ter => "TER",
            Measure::Er => "ER",
            Measure::Tsr => "TSR",
            Measure::Tnr => "TNR",
            Measure::LhvTnr => "LHV-TNR",
            Measure::G => "g",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    /// PPT relaxation of separability; a lower bound beyond `2 ⊗ 3`.
    PptLowerBound,
}

/// A robustness value with solver metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessResult {
    pub measure: Measure,
    pub value: f64,
    /// Relative primal-dual gap of the underlying program, zero for closed forms.
    pub solver_gap: f64,
    pub exactness: Exactness,
    /// Number of deterministic strategies (or strategy pairs) enumerated.
    pub strategy_count: usize,
    pub note: Option<String>,
}

impl RobustnessResult {
    fn from_solution(measure: Measure, sol: &ConicSolution, offset: f64, strategies: usize) -> Result<Self> {
        sol.require_optimal()?;
        Ok(RobustnessResult {
            measure,
            value: (sol.primal_objective - offset).max(0.0),
            solver_gap: sol.gap,
            exactness: Exactness::Exact,
            strategy_count: strategies,
            note: sol.note.clone(),
        })
    }
}

/// `Σ |μᵢ|` over the negative eigenvalues of `R`.
pub fn ter_closed_form(r: &StateOverTime) -> Result<f64> {
    let spec = eig_hermitian(r.operator())?;
    Ok(spec.eigenvalues.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// `min tr 𝕽̃` subject to `𝕽̃ ⪰ 0`, `R + 𝕽̃ ⪰ 0`.
pub fn ter_sdp(r: &StateOverTime) -> Result<RobustnessResult> {
    let n = r.operator().dim();
    let mut p = ConicProgram::new();
    let total = p.add_block(Cone::Psd(n));
    let noise = p.add_block(Cone::Psd(n));
    p.add_objective_trace(noise, 1.0)?;
    p.add_matrix_equality(
        &[(total, 1.0, BlockMap::Identity), (noise, -1.0, BlockMap::Identity)],
        r.operator().matrix(),
    )?;
    let sol = solve(&p, &SolverOptions::default())?;
    RobustnessResult::from_solution(Measure::Ter, &sol, 0.0, 0)
}

/// Entanglement robustness under the PPT relaxation of separability.
///
/// `min tr 𝕽̃` subject to `𝕽̃ ⪰ 0`, `𝕽̃^Γ ⪰ 0`, `R + 𝕽̃ ⪰ 0`, `(R + 𝕽̃)^Γ ⪰ 0`,
/// with `Γ` the partial transpose on the later factor.
pub fn er_ppt(r: &StateOverTime) -> Result<RobustnessResult> {
    let dims = r.dims();
    let n = dims.0 * dims.1;
    let pt = BlockMap::PartialTranspose {
        dims,
        side: Subsystem::B,
    };
    let mut p = ConicProgram::new();
    let total = p.add_block(Cone::Psd(n));
    let noise = p.add_block(Cone::Psd(n));
    let total_pt = p.add_block(Cone::Psd(n));
    let noise_pt = p.add_block(Cone::Psd(n));
    p.add_objective_trace(noise, 1.0)?;
    p.add_matrix_equality(
        &[(total, 1.0, BlockMap::Identity), (noise, -1.0, BlockMap::Identity)],
        r.operator().matrix(),
    )?;
    let zero = ComplexMatrix::zeros(n, n);
    p.add_matrix_equality(&[(total_pt, 1.0, BlockMap::Identity), (total, -1.0, pt)], &zero)?;
    p.add_matrix_equality(&[(noise_pt, 1.0, BlockMap::Identity), (noise, -1.0, pt)], &zero)?;
    let sol = solve(&p, &SolverOptions::default())?;
    let mut res = RobustnessResult::from_solution(Measure::Er, &sol, 0.0, 0)?;
    if dims.0 * dims.1 > 6 {
        res.exactness = Exactness::PptLowerBound;
    }
    Ok(res)
}

/// Temporal steering robustness of a subnormalized assemblage.
///
/// `min Σ_λ tr σ_λ − 1` subject to `Σ_λ D(a|x,λ) σ_λ ⪰ ρ̃_{a|x}` and `σ_λ ⪰ 0`.
pub fn tsr(asm: &Assemblage) -> Result<RobustnessResult> {
    let (s, o, d) = (asm.settings(), asm.outcomes(), asm.dim());
    let strategies = DeterministicStrategySet::new(s, o)?;
    let mut p = ConicProgram::new();
    let hidden: Vec<usize> = (0..strategies.len()).map(|_| p.add_block(Cone::Psd(d))).collect();
    for &blk in &hidden {
        p.add_objective_trace(blk, 1.0)?;
    }
    for x in 0..s {
        for a in 0..o {
            let slack = p.add_block(Cone::Psd(d));
            let mut terms: Vec<(usize, f64, BlockMap)> = hidden
                .iter()
                .enumerate()
                .filter(|&(lambda, _)| strategies.outcome(lambda, x) == a)
                .map(|(_, &blk)| (blk, 1.0, BlockMap::Identity))
                .collect();
            terms.push((slack, -1.0, BlockMap::Identity));
            p.add_matrix_equality(&terms, asm.element(a, x).matrix())?;
        }
    }
    let sol = solve(&p, &SolverOptions::default())?;
    RobustnessResult::from_solution(Measure::Tsr, &sol, 1.0, strategies.len())
}

struct StrategyPairs {
    alice: DeterministicStrategySet,
    bob: DeterministicStrategySet,
}

impl StrategyPairs {
    fn new(b: &Behavior) -> Result<Self> {
        let alice = DeterministicStrategySet::new(b.settings().0, b.outcomes().0)?;
        let bob = DeterministicStrategySet::new(b.settings().1, b.outcomes().1)?;
        let pairs = alice.len() * bob.len();
        if pairs > STRATEGY_CAP {
            return Err(Error::Capacity {
                what: "deterministic strategy pairs",
                requested: pairs,
                limit: STRATEGY_CAP,
            });
        }
        Ok(StrategyPairs { alice, bob })
    }

    fn len(&self) -> usize {
        self.alice.len() * self.bob.len()
    }

    /// Pair indices `μ·|B| + ν` with `μ(x) = a` and `ν(y) = b`.
    fn consistent(&self, a: usize, b: usize, x: usize, y: usize) -> impl Iterator<Item = usize> + '_ {
        let nb = self.bob.len();
        (0..self.alice.len())
            .filter(move |&mu| self.alice.outcome(mu, x) == a)
            .flat_map(move |mu| {
                (0..nb)
                    .filter(move |&nu| self.bob.outcome(nu, y) == b)
                    .map(move |nu| mu * nb + nu)
            })
    }
}

fn for_each_event(b: &Behavior, mut f: impl FnMut(usize, usize, usize, usize) -> Result<()>) -> Result<()> {
    let ((sa, sb), (oa, ob)) = (b.settings(), b.outcomes());
    for x in 0..sa {
        for y in 0..sb {
            for a in 0..oa {
                for bb in 0..ob {
                    f(a, bb, x, y)?;
                }
            }
        }
    }
    Ok(())
}

/// Temporal nonlocality robustness.
///
/// `min Σ r̃ − 1` subject to `Σ_{μν} r̃_{μν} D(a|x,μ) D(b|y,ν) ≥ P(a,b|x,y)` and `r̃ ≥ 0`.
pub fn tnr(b: &Behavior) -> Result<RobustnessResult> {
    let pairs = StrategyPairs::new(b)?;
    let events = b.table().len();
    let mut p = ConicProgram::new();
    let weights = p.add_block(Cone::Nonneg(pairs.len()));
    let slack = p.add_block(Cone::Nonneg(events));
    for k in 0..pairs.len() {
        p.add_objective(weights, k, 1.0)?;
    }
    let mut row = 0;
    for_each_event(b, |a, bb, x, y| {
        let mut terms: Vec<(usize, usize, f64)> = pairs.consistent(a, bb, x, y).map(|k| (weights, k, 1.0)).collect();
        terms.push((slack, row, -1.0));
        row += 1;
        p.add_constraint(&terms, b.get(a, bb, x, y))
    })?;
    let sol = solve(&p, &lp_options())?;
    RobustnessResult::from_solution(Measure::Tnr, &sol, 1.0, pairs.len())
}

fn lp_options() -> SolverOptions {
    SolverOptions {
        feas_tol: 1e-10,
        gap_tol: 1e-10,
        ..SolverOptions::default()
    }
}

/// Temporal nonlocality robustness with local-hidden-variable noise.
///
/// `min Σ r̃ − 1` subject to `Σ r̃ DD − Σ q̃ DD = P` with `r̃, q̃ ≥ 0`. A
/// behavior outside the affine hull of local behaviors, such as a signaling
/// one, admits no decomposition and gets `+∞`.
pub fn tnr_lhv(b: &Behavior) -> Result<RobustnessResult> {
    let pairs = StrategyPairs::new(b)?;
    let mut p = ConicProgram::new();
    let weights = p.add_block(Cone::Nonneg(pairs.len()));
    let noise = p.add_block(Cone::Nonneg(pairs.len()));
    for k in 0..pairs.len() {
        p.add_objective(weights, k, 1.0)?;
    }
    for_each_event(b, |a, bb, x, y| {
        let terms: Vec<(usize, usize, f64)> = pairs
            .consistent(a, bb, x, y)
            .flat_map(|k| [(weights, k, 1.0), (noise, k, -1.0)])
            .collect();
        p.add_constraint(&terms, b.get(a, bb, x, y))
    })?;
    let sol = solve(&p, &SolverOptions::default())?;
    if sol.status == SolveStatus::Infeasible {
        return Ok(RobustnessResult {
            measure: Measure::LhvTnr,
            value: f64::INFINITY,
            solver_gap: f64::NAN,
            exactness: Exactness::Exact,
            strategy_count: pairs.len(),
            note: Some(format!(
                "no local decomposition of the noise exists (signaling {:.3e})",
                b.signaling()
            )),
        });
    }
    RobustnessResult::from_solution(Measure::LhvTnr, &sol, 1.0, pairs.len())
}

/// Correlation-tensor separability test for `3 ⊗ 3` operators.
///
/// With `C_ij = tr[R (λᵢ⊗λⱼ)]` in the normalized Gell-Mann basis and
/// `D₀ = diag(0, 1, …, 1)`, returns `max(0, ‖D₀ C D₀‖_tr − 2/3)`.
pub fn separability_g(r: &StateOverTime) -> Result<f64> {
    if r.dims() != (3, 3) {
        return Err(Error::Dimension {
            expected: 9,
            found: r.dims().0 * r.dims().1,
        });
    }
    let basis = gellmann_basis(3)?;
    let mut c: DMatrix<f64> = expand(r.operator(), &basis, &basis)?.coefficients;
    c.row_mut(0).fill(0.0);
    c.column_mut(0).fill(0.0);
    let norm: f64 = c.singular_values().iter().sum();
    Ok((norm - 2.0 / 3.0).max(0.0))
}
