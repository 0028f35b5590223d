//! Robustness measures of temporal correlations and the objects they act on.
//!
//! Temporal entanglement robustness ([`ter_closed_form`], [`ter_sdp`]),
//! PPT entanglement robustness ([`er_ppt`]), temporal steering robustness
//! ([`tsr`]), temporal nonlocality robustness ([`tnr`], [`tnr_lhv`]) and the
//! correlation-tensor separability test ([`separability_g`]).

mod measures;
mod models;
mod pvm;

pub use measures::{
    er_ppt, separability_g, ter_closed_form, ter_sdp, tnr, tnr_lhv, tsr, Exactness, Measure, RobustnessResult,
};
pub use models::{
    make_assemblage, make_assemblage_povm, make_behavior, Assemblage, Behavior, DeterministicStrategySet, STRATEGY_CAP,
};
pub use pvm::{mub_pvms, Povm, Pvm, PVM_TOL};
