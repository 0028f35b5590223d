//! Search over projective measurements for the largest steering or
//! nonlocality robustness at a fixed initial state and channel.
//!
//! Each setting's basis is the product of complex Givens rotations over the
//! index pairs `(0,1), (0,2), …, (1,2), …` in lexicographic order, two
//! parameters `(θ, φ)` per pair. The search runs Nelder–Mead from the
//! mutually unbiased bases and from seeded random starts; reported values
//! are the best found, not certified optima.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_state, Channel};
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, HermitianOperator};
use crate::robustness::{make_assemblage, make_behavior, mub_pvms, tnr, tsr, Measure, Pvm};

/// Parameter vector for `settings` bases of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvmParameterization {
    pub dim: usize,
    pub settings: usize,
    pub params: Vec<f64>,
}

impl PvmParameterization {
    pub fn new(dim: usize, settings: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::len_for(dim, settings);
        if params.len() != expected {
            return Err(Error::Dimension {
                expected,
                found: params.len(),
            });
        }
        Ok(PvmParameterization { dim, settings, params })
    }

    pub fn zeros(dim: usize, settings: usize) -> Self {
        PvmParameterization {
            dim,
            settings,
            params: vec![0.0; Self::len_for(dim, settings)],
        }
    }

    /// `s · d(d−1)`.
    pub fn len_for(dim: usize, settings: usize) -> usize {
        settings * dim * dim.saturating_sub(1)
    }

    /// Parameters reproducing the given bases up to column phases.
    pub fn from_unitaries(unitaries: &[ComplexMatrix]) -> Result<Self> {
        let dim = unitaries
            .first()
            .map(|u| u.nrows())
            .ok_or_else(|| Error::Argument("at least one basis is required".into()))?;
        let mut params = Vec::with_capacity(Self::len_for(dim, unitaries.len()));
        for u in unitaries {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: u.nrows(),
                });
            }
            params.extend(givens_angles(u));
        }
        Ok(PvmParameterization {
            dim,
            settings: unitaries.len(),
            params,
        })
    }

    /// The unitary of each setting.
    pub fn unitaries(&self) -> Vec<ComplexMatrix> {
        let per = self.dim * (self.dim - 1);
        self.params
            .chunks(per.max(1))
            .take(self.settings)
            .map(|chunk| givens_product(self.dim, chunk))
            .collect()
    }
}

fn pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |p| (p + 1..d).map(move |q| (p, q)))
}

/// `G_pq(θ, φ)` acting on rows `p, q`: `[[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]`.
fn givens(d: usize, p: usize, q: usize, theta: f64, phi: f64) -> ComplexMatrix {
    let mut g = ComplexMatrix::identity(d, d);
    let (s, c) = theta.sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    g[(p, p)] = Complex64::new(c, 0.0);
    g[(q, q)] = Complex64::new(c, 0.0);
    g[(p, q)] = -e.conj() * s;
    g[(q, p)] = e * s;
    g
}

fn givens_product(d: usize, params: &[f64]) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(d, d);
    for (k, (p, q)) in pairs(d).enumerate() {
        u *= givens(d, p, q, params[2 * k], params[2 * k + 1]);
    }
    u
}

/// Inverse of [`givens_product`] modulo a diagonal phase on the right.
fn givens_angles(u: &ComplexMatrix) -> Vec<f64> {
    let d = u.nrows();
    let mut m = u.clone();
    let mut out = Vec::with_capacity(d * (d - 1));
    for (p, q) in pairs(d) {
        let (top, bottom) = (m[(p, p)], m[(q, p)]);
        let (theta, phi) = if top.norm() < 1e-300 {
            (std::f64::consts::FRAC_PI_2, bottom.arg())
        } else {
            ((bottom.norm() / top.norm()).atan(), bottom.arg() - top.arg())
        };
        m = givens(d, p, q, theta, phi).adjoint() * m;
        out.push(theta);
        out.push(phi);
    }
    out
}

/// Rank-one PVMs onto the columns of each decoded unitary.
pub fn decode(params: &PvmParameterization) -> Result<Vec<Pvm>> {
    if params.params.len() != PvmParameterization::len_for(params.dim, params.settings) {
        return Err(Error::Dimension {
            expected: PvmParameterization::len_for(params.dim, params.settings),
            found: params.params.len(),
        });
    }
    params.unitaries().iter().map(Pvm::from_unitary).collect()
}

/// Unit vector spanning a rank-one projector.
fn spanning_vector(p: &HermitianOperator) -> Vec<Complex64> {
    let m = p.matrix();
    let k = (0..m.ncols())
        .max_by(|&a, &b| m.column(a).norm().total_cmp(&m.column(b).norm()))
        .unwrap_or(0);
    let col = m.column(k);
    let n = col.norm();
    col.iter().map(|z| z / n).collect()
}

fn unitary_of(pvm: &Pvm) -> Result<ComplexMatrix> {
    let d = pvm.dim();
    if pvm.outcomes() != d {
        return Err(Error::InvalidMeasurement(
            "only rank-one PVMs can be parameterized".into(),
        ));
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (k, p) in pvm.projectors().iter().enumerate() {
        for (i, z) in spanning_vector(p).into_iter().enumerate() {
            u[(i, k)] = z;
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Random starts in addition to the mutually unbiased start.
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per start.
    pub max_evaluations: usize,
    /// Inner solver failures tolerated per start before the search aborts.
    pub failure_budget: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Standard deviation of simplex values at which a start has converged.
    pub tolerance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 16,
            seed: 0,
            max_evaluations: 400,
            failure_budget: 8,
            initial_step: 0.4,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Mub,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartTrace {
    pub index: usize,
    pub start: StartKind,
    pub initial_value: f64,
    pub best_value: f64,
    pub evaluations: usize,
    pub failures: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub measure: Measure,
    pub best_value: f64,
    pub best_params: PvmParameterization,
    #[serde(skip)]
    pub best_pvms: Vec<Pvm>,
    /// Value at the mutually unbiased start.
    pub mub_value: f64,
    pub restarts_used: usize,
    pub evaluations: usize,
    /// Every start stopped on the simplex tolerance rather than the budget.
    pub converged: bool,
    pub trace: Vec<RestartTrace>,
}

/// Robustness of the given measurement settings, shared by both times for TNR.
pub fn evaluate(measure: Measure, rho_a: &HermitianOperator, ch: &Channel, pvms: &[Pvm]) -> Result<f64> {
    match measure {
        Measure::Tsr => Ok(tsr(&make_assemblage(rho_a, ch, pvms)?)?.value),
        Measure::Tnr => Ok(tnr(&make_behavior(rho_a, ch, pvms, pvms)?)?.value),
        other => Err(Error::Argument(format!(
            "measurement search supports TSR and TNR, not {other}"
        ))),
    }
}

/// Penalty returned to the simplex when the inner program fails.
const FAILURE_COST: f64 = 1e3;
const BUDGET_EXHAUSTED: &str = "evaluation budget exhausted";

struct Objective<'a> {
    measure: Measure,
    rho_a: &'a HermitianOperator,
    ch: &'a Channel,
    dim: usize,
    settings: usize,
    opts: &'a SearchOptions,
    evaluations: AtomicUsize,
    failures: AtomicUsize,
    best: Mutex<(f64, Vec<f64>)>,
}

impl Objective<'_> {
    fn value(&self, params: &[f64]) -> Result<f64> {
        let p = PvmParameterization::new(self.dim, self.settings, params.to_vec())?;
        evaluate(self.measure, self.rho_a, self.ch, &decode(&p)?)
    }
}

impl CostFunction for &Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, params: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        if self.evaluations.fetch_add(1, Ordering::Relaxed) >= self.opts.max_evaluations {
            return Err(argmin::core::Error::msg(BUDGET_EXHAUSTED));
        }
        match self.value(params) {
            Ok(v) => {
                let mut best = self.best.lock().expect("objective lock poisoned");
                if v > best.0 {
                    *best = (v, params.clone());
                }
                Ok(-v)
            }
            Err(e) => {
                let n = self.failures.fetch_add(1, Ordering::Relaxed) + 1;
                if n > self.opts.failure_budget {
                    Err(argmin::core::Error::msg(format!(
                        "{n} inner solver failures, last: {e}"
                    )))
                } else {
                    Ok(FAILURE_COST)
                }
            }
        }
    }
}

fn run_start(
    measure: Measure,
    rho_a: &HermitianOperator,
    ch: &Channel,
    settings: usize,
    opts: &SearchOptions,
    index: usize,
    start: Vec<f64>,
) -> Result<(RestartTrace, Vec<f64>)> {
    let objective = Objective {
        measure,
        rho_a,
        ch,
        dim: ch.dim(),
        settings,
        opts,
        evaluations: AtomicUsize::new(0),
        failures: AtomicUsize::new(0),
        best: Mutex::new((f64::NEG_INFINITY, start.clone())),
    };
    let initial_value = objective.value(&start)?;
    let mut simplex = vec![start.clone()];
    for k in 0..start.len() {
        let mut v = start.clone();
        v[k] += opts.initial_step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tolerance)
        .map_err(|e| Error::Argument(e.to_string()))?;
    let outcome = Executor::new(&objective, solver)
        .configure(|s| s.max_iters(opts.max_evaluations as u64))
        .run();
    let converged = match outcome {
        Ok(res) => matches!(
            res.state().get_termination_reason(),
            Some(TerminationReason::SolverConverged)
        ),
        Err(e) if e.to_string() == BUDGET_EXHAUSTED => false,
        Err(e) => {
            return Err(Error::Numerical {
                detail: format!("measurement search aborted: {e}"),
                condition: f64::NAN,
            })
        }
    };
    let (best_value, best_params) = objective.best.into_inner().expect("objective lock poisoned");
    let (best_value, best_params) = if best_value >= initial_value {
        (best_value, best_params)
    } else {
        (initial_value, start)
    };
    let trace = RestartTrace {
        index,
        start: if index == 0 { StartKind::Mub } else { StartKind::Random },
        initial_value,
        best_value,
        evaluations: objective.evaluations.load(Ordering::Relaxed).min(opts.max_evaluations) + 1,
        failures: objective.failures.load(Ordering::Relaxed),
        converged,
    };
    Ok((trace, best_params))
}

/// Maximize TSR or TNR over rank-one PVMs with `settings_count` settings.
pub fn maximize(
    measure: Measure,
    rho_a: &HermitianOperator,
    ch: &Channel,
    settings_count: usize,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    if !matches!(measure, Measure::Tsr | Measure::Tnr) {
        return Err(Error::Argument(format!(
            "measurement search supports TSR and TNR, not {measure}"
        )));
    }
    let d = ch.dim();
    check_state(rho_a, d)?;
    if settings_count == 0 || settings_count > d + 1 {
        return Err(Error::Argument(format!(
            "settings count must be between 1 and {} for d = {d}",
            d + 1
        )));
    }
    let mub_unitaries = mub_pvms(d, settings_count)?
        .iter()
        .map(unitary_of)
        .collect::<Result<Vec<_>>>()?;
    let mub_start = PvmParameterization::from_unitaries(&mub_unitaries)?.params;
    let len = mub_start.len();
    let mut starts = vec![mub_start];
    for k in 1..=opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
        starts.push((0..len).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect());
    }
    let traces: Vec<(RestartTrace, Vec<f64>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(index, start)| run_start(measure, rho_a, ch, settings_count, opts, index, start))
        .collect::<Result<Vec<_>>>()?;
    let mut best_index = 0;
    for (i, (t, _)) in traces.iter().enumerate() {
        if t.best_value > traces[best_index].0.best_value {
            best_index = i;
        }
    }
    let best_value = traces[best_index].0.best_value;
    let best_params = PvmParameterization::new(d, settings_count, traces[best_index].1.clone())?;
    let best_pvms = decode(&best_params)?;
    Ok(SearchResult {
        measure,
        best_value,
        best_params,
        best_pvms,
        mub_value: traces[0].0.initial_value,
        restarts_used: traces.len(),
        evaluations: traces.iter().map(|(t, _)| t.evaluations).sum(),
        converged: traces.iter().all(|(t, _)| t.converged),
        trace: traces.into_iter().map(|(t, _)| t).collect(),
    })
}
