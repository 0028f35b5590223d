use crate::dynamics::{check_state, Channel};
use crate::error::{Error, Result};
use crate::qmat::HermitianOperator;

use super::pvm::{Povm, Pvm};

/// Largest deterministic strategy set that will be enumerated.
pub const STRATEGY_CAP: usize = 10_000;

const ASSEMBLAGE_PSD_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-9;
const NEGATIVE_PROBABILITY_TOL: f64 = 1e-10;

/// All deterministic maps from `s` settings to `o` outcomes.
///
/// Strategies are ordered lexicographically in `(λ(x₀), λ(x₁), …)`, so the
/// first setting is the most significant digit.
#[derive(Debug, Clone)]
pub struct DeterministicStrategySet {
    settings: usize,
    outcomes: usize,
    table: Vec<usize>,
}

impl DeterministicStrategySet {
    pub fn new(settings: usize, outcomes: usize) -> Result<Self> {
        if settings == 0 || outcomes == 0 {
            return Err(Error::Argument(
                "strategy sets need at least one setting and one outcome".into(),
            ));
        }
        let count = u32::try_from(settings)
            .ok()
            .and_then(|s| outcomes.checked_pow(s))
            .filter(|&n| n <= STRATEGY_CAP)
            .ok_or(Error::Capacity {
                what: "deterministic strategy set",
                requested: outcomes.saturating_pow(settings.min(64) as u32),
                limit: STRATEGY_CAP,
            })?;
        let mut table = Vec::with_capacity(count * settings);
        for n in 0..count {
            let mut digits = vec![0; settings];
            let mut rest = n;
            for x in (0..settings).rev() {
                digits[x] = rest % outcomes;
                rest /= outcomes;
            }
            table.extend(digits);
        }
        Ok(DeterministicStrategySet {
            settings,
            outcomes,
            table,
        })
    }

    pub fn settings(&self) -> usize {
        self.settings
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn len(&self) -> usize {
        self.table.len() / self.settings
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `λ(x)`.
    pub fn outcome(&self, strategy: usize, setting: usize) -> usize {
        self.table[strategy * self.settings + setting]
    }

    /// `D(a|x,λ) = δ_{a,λ(x)}`.
    pub fn response(&self, outcome: usize, setting: usize, strategy: usize) -> f64 {
        if self.outcome(strategy, setting) == outcome {
            1.0
        } else {
            0.0
        }
    }
}

/// Subnormalized conditional states `ρ̃_{a|x}` of the later system.
#[derive(Debug, Clone)]
pub struct Assemblage {
    dim: usize,
    outcomes: usize,
    elements: Vec<Vec<HermitianOperator>>,
}

impl Assemblage {
    /// Build from `elements[x][a]`.
    pub fn new(elements: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let first = elements
            .first()
            .and_then(|row| row.first())
            .ok_or_else(|| Error::Argument("assemblage needs at least one setting and outcome".into()))?;
        let dim = first.dim();
        let outcomes = elements[0].len();
        for (x, row) in elements.iter().enumerate() {
            if row.len() != outcomes {
                return Err(Error::Argument(format!(
                    "setting {x} has {} outcomes, expected {outcomes}",
                    row.len()
                )));
            }
            let mut total = 0.0;
            for (a, rho) in row.iter().enumerate() {
                if rho.dim() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        found: rho.dim(),
                    });
                }
                let min = rho.min_eigenvalue()?;
                if min < -ASSEMBLAGE_PSD_TOL {
                    return Err(Error::Argument(format!("element ({a}|{x}) has eigenvalue {min:.3e}")));
                }
                total += rho.trace();
            }
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Argument(format!(
                    "setting {x} has total trace {total}, expected 1"
                )));
            }
        }
        Ok(Assemblage {
            dim,
            outcomes,
            elements,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings(&self) -> usize {
        self.elements.len()
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    /// `ρ̃_{a|x}`.
    pub fn element(&self, outcome: usize, setting: usize) -> &HermitianOperator {
        &self.elements[setting][outcome]
    }

    /// `Σₐ ρ̃_{a|x}`.
    pub fn marginal(&self, setting: usize) -> HermitianOperator {
        let mut m = HermitianOperator::zeros(self.dim);
        for rho in &self.elements[setting] {
            m = &m + rho;
        }
        m
    }
}

/// Joint outcome table `P(a,b|x,y)` of an earlier and a later measurement.
#[derive(Debug, Clone)]
pub struct Behavior {
    settings: (usize, usize),
    outcomes: (usize, usize),
    table: Vec<f64>,
}

impl Behavior {
    /// `table` is indexed as `[x][y][a][b]` in row-major order.
    pub fn new(settings: (usize, usize), outcomes: (usize, usize), table: Vec<f64>) -> Result<Self> {
        let (sa, sb) = settings;
        let (oa, ob) = outcomes;
        if sa * sb * oa * ob == 0 {
            return Err(Error::Argument(
                "behavior needs at least one setting and outcome per party".into(),
            ));
        }
        let expected = sa * sb * oa * ob;
        if table.len() != expected {
            return Err(Error::Dimension {
                expected,
                found: table.len(),
            });
        }
        if table.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(p) = table.iter().find(|&&p| p < -NEGATIVE_PROBABILITY_TOL) {
            return Err(Error::Argument(format!("negative probability {p}")));
        }
        let table: Vec<f64> = table.into_iter().map(|p| p.max(0.0)).collect();
        let b = Behavior {
            settings,
            outcomes,
            table,
        };
        for x in 0..sa {
            for y in 0..sb {
                let total: f64 = (0..oa)
                    .flat_map(|a| (0..ob).map(move |bb| (a, bb)))
                    .map(|(a, bb)| b.get(a, bb, x, y))
                    .sum();
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::Argument(format!(
                        "settings ({x},{y}) sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(b)
    }

    pub fn settings(&self) -> (usize, usize) {
        self.settings
    }

    pub fn outcomes(&self) -> (usize, usize) {
        self.outcomes
    }

    fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((x * self.settings.1 + y) * self.outcomes.0 + a) * self.outcomes.1 + b
    }

    /// `P(a,b|x,y)`.
    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[self.index(a, b, x, y)]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Largest change of Bob's marginal `P(b|x,y)` across Alice's settings.
    pub fn signaling(&self) -> f64 {
        let (sa, sb) = self.settings;
        let (oa, ob) = self.outcomes;
        let marginal = |x: usize, y: usize, b: usize| (0..oa).map(|a| self.get(a, b, x, y)).sum::<f64>();
        let mut worst: f64 = 0.0;
        for y in 0..sb {
            for b in 0..ob {
                let base = marginal(0, y, b);
                for x in 1..sa {
                    worst = worst.max((marginal(x, y, b) - base).abs());
                }
            }
        }
        worst
    }
}

fn check_pvms(pvms: &[Pvm], dim: usize) -> Result<usize> {
    let first = pvms
        .first()
        .ok_or_else(|| Error::Argument("at least one measurement setting is required".into()))?;
    for p in pvms {
        if p.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: p.dim(),
            });
        }
        if p.outcomes() != first.outcomes() {
            return Err(Error::InvalidMeasurement(
                "all settings must have the same number of outcomes".into(),
            ));
        }
    }
    Ok(first.outcomes())
}

/// Post-measurement states delivered through the channel for each setting,
/// `ρ̃_{a|x} = E(Π_{a|x} ρ Π_{a|x})`.
fn conditional_states(rho_a: &HermitianOperator, ch: &Channel, pvm: &Pvm) -> Result<Vec<HermitianOperator>> {
    pvm.projectors()
        .iter()
        .map(|p| Ok(HermitianOperator::hermitian_part(&ch.map(p.sandwich(rho_a).matrix())?)))
        .collect()
}

pub fn make_assemblage(rho_a: &HermitianOperator, ch: &Channel, pvms: &[Pvm]) -> Result<Assemblage> {
    check_state(rho_a, ch.dim())?;
    check_pvms(pvms, ch.dim())?;
    let elements = pvms
        .iter()
        .map(|pvm| conditional_states(rho_a, ch, pvm))
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(elements)
}

/// Assemblage from general measurements, `ρ̃_{a|x} = E(√M_{a|x} ρ √M_{a|x})`.
pub fn make_assemblage_povm(rho_a: &HermitianOperator, ch: &Channel, povms: &[Povm]) -> Result<Assemblage> {
    check_state(rho_a, ch.dim())?;
    let first = povms
        .first()
        .ok_or_else(|| Error::Argument("at least one measurement setting is required".into()))?;
    for p in povms {
        if p.dim() != ch.dim() {
            return Err(Error::Dimension {
                expected: ch.dim(),
                found: p.dim(),
            });
        }
        if p.outcomes() != first.outcomes() {
            return Err(Error::InvalidMeasurement(
                "all settings must have the same number of outcomes".into(),
            ));
        }
    }
    let elements = povms
        .iter()
        .map(|povm| {
            povm.roots()
                .iter()
                .map(|r| Ok(HermitianOperator::hermitian_part(&ch.map(r.sandwich(rho_a).matrix())?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(elements)
}

/// Born-rule table `P(a,b|x,y) = tr[M_{b|y} E(Π_{a|x} ρ Π_{a|x})]`.
pub fn make_behavior(rho_a: &HermitianOperator, ch: &Channel, pvms_a: &[Pvm], pvms_b: &[Pvm]) -> Result<Behavior> {
    check_state(rho_a, ch.dim())?;
    let oa = check_pvms(pvms_a, ch.dim())?;
    let ob = check_pvms(pvms_b, ch.dim())?;
    let mut table = Vec::with_capacity(pvms_a.len() * pvms_b.len() * oa * ob);
    let conditionals = pvms_a
        .iter()
        .map(|pvm| conditional_states(rho_a, ch, pvm))
        .collect::<Result<Vec<_>>>()?;
    for cond in &conditionals {
        for pvm_b in pvms_b {
            for rho in cond {
                for m in pvm_b.projectors() {
                    table.push(rho.hs_inner(m));
                }
            }
        }
    }
    Behavior::new((pvms_a.len(), pvms_b.len()), (oa, ob), table)
}
