use rayon::prelude::*;

use chronocorr::bases::{pauli_basis, wigner_qutrit_basis};
use chronocorr::dynamics::Channel;
use chronocorr::optmeas::{evaluate, maximize};
use chronocorr::robustness::{
    er_ppt, make_behavior, mub_pvms, separability_g, ter_closed_form, tnr_lhv, Exactness, Measure, Pvm,
};
use chronocorr::sot::{build_pdo, build_wigner, causality_f, nsit_check, Construction, StateOverTime};
use chronocorr::HermitianOperator;

use crate::config::{Column, ExperimentConfig};

/// One grid point: a value per requested column, plus notes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma_t: f64,
    pub values: Vec<f64>,
    pub flags: Vec<String>,
}

/// All rows for one initial state.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub state: String,
    pub columns: Vec<Column>,
    pub rows: Vec<SweepRow>,
}

pub fn state_over_time(
    rho: &HermitianOperator,
    ch: &Channel,
    construction: Construction,
) -> chronocorr::Result<StateOverTime> {
    match construction {
        Construction::Wigner => build_wigner(rho, ch),
        _ => {
            let basis = if ch.dim() == 2 {
                pauli_basis()
            } else {
                wigner_qutrit_basis()
            };
            build_pdo(rho, ch, &basis)
        }
    }
}

struct Point<'a> {
    cfg: &'a ExperimentConfig,
    rho: &'a HermitianOperator,
    pvms: &'a [Pvm],
    ch: Channel,
    flags: Vec<String>,
    max_gap: f64,
}

impl Point<'_> {
    fn column(&mut self, col: Column, r: &StateOverTime) -> chronocorr::Result<f64> {
        let label = col.label();
        match col {
            Column::Nsit => Ok(nsit_check(self.rho, &self.ch, self.pvms)?.max_violation),
            Column::Measure(Measure::F) => causality_f(r),
            Column::Measure(Measure::Ter) => ter_closed_form(r),
            Column::Measure(Measure::G) => separability_g(r),
            Column::Measure(Measure::Er) => {
                let res = er_ppt(r)?;
                self.max_gap = self.max_gap.max(res.solver_gap);
                if res.exactness == Exactness::PptLowerBound {
                    self.flags.push(format!("{label}:ppt-lower-bound"));
                }
                Ok(res.value)
            }
            Column::Measure(m @ (Measure::Tsr | Measure::Tnr)) => {
                if self.cfg.optimize {
                    let res = maximize(m, self.rho, &self.ch, self.cfg.settings_count, &self.cfg.search)?;
                    if !res.converged {
                        self.flags.push(format!("{label}:search-budget"));
                    }
                    Ok(res.best_value)
                } else {
                    evaluate(m, self.rho, &self.ch, self.pvms)
                }
            }
            Column::Measure(Measure::LhvTnr) => {
                let res = tnr_lhv(&make_behavior(self.rho, &self.ch, self.pvms, self.pvms)?)?;
                if res.value.is_infinite() {
                    self.flags.push(format!("{label}:signaling"));
                } else {
                    self.max_gap = self.max_gap.max(res.solver_gap);
                }
                Ok(res.value)
            }
        }
    }
}

/// One column at one point, with any flags it raises. Errors propagate.
pub fn evaluate_column(
    cfg: &ExperimentConfig,
    rho: &HermitianOperator,
    col: Column,
    gamma_t: f64,
) -> chronocorr::Result<(f64, Vec<String>)> {
    let pvms = mub_pvms(cfg.dim, cfg.settings_count)?;
    let mut point = Point {
        cfg,
        rho,
        pvms: &pvms,
        ch: Channel::new(cfg.dim, cfg.channel, gamma_t)?,
        flags: Vec::new(),
        max_gap: 0.0,
    };
    let r = state_over_time(rho, &point.ch, cfg.construction)?;
    let v = point.column(col, &r)?;
    if point.max_gap > 0.0 {
        point.flags.push(format!("max_gap={:.1e}", point.max_gap));
    }
    Ok((v, point.flags))
}

fn evaluate_point(cfg: &ExperimentConfig, rho: &HermitianOperator, pvms: &[Pvm], gamma_t: f64) -> SweepRow {
    let mut values = vec![f64::NAN; cfg.columns.len()];
    let mut point = Point {
        cfg,
        rho,
        pvms,
        ch: Channel::new(cfg.dim, cfg.channel, gamma_t).expect("grid points are validated"),
        flags: Vec::new(),
        max_gap: 0.0,
    };
    match state_over_time(rho, &point.ch, cfg.construction) {
        Ok(r) => {
            for (slot, &col) in values.iter_mut().zip(&cfg.columns) {
                match point.column(col, &r) {
                    Ok(v) => *slot = v,
                    Err(e) => point
                        .flags
                        .push(format!("{}:failed({})", col.label(), sanitize(&e.to_string()))),
                }
            }
        }
        Err(e) => point.flags.push(format!("state:failed({})", sanitize(&e.to_string()))),
    }
    if point.max_gap > 0.0 {
        point.flags.push(format!("max_gap={:.1e}", point.max_gap));
    }
    SweepRow {
        gamma_t,
        values,
        flags: point.flags,
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if matches!(c, ',' | ';' | '\n' | '"') { ' ' } else { c })
        .collect()
}

/// Evaluate every requested column at every grid point for each initial state.
/// Per-point failures become NaN with a flag; invalid inputs abort up front.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepTable>, crate::CliError> {
    let states = cfg
        .states
        .iter()
        .map(|s| Ok((s.name(), s.resolve(cfg.dim)?)))
        .collect::<Result<Vec<_>, crate::config::ConfigError>>()?;
    let pvms = mub_pvms(cfg.dim, cfg.settings_count).map_err(crate::CliError::from)?;
    let grid = cfg.grid.values();
    Ok(states
        .iter()
        .map(|(name, rho)| SweepTable {
            state: name.clone(),
            columns: cfg.columns.clone(),
            rows: grid.par_iter().map(|&gt| evaluate_point(cfg, rho, &pvms, gt)).collect(),
        })
        .collect())
}
