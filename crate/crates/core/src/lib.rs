//! Two-time quantum states over time and robustness measures of temporal
//! correlations for qubits and qutrits.

#![allow(clippy::needless_range_loop)]

pub mod bases;
pub mod conic;
pub mod dynamics;
pub mod error;
pub mod optmeas;
pub mod qmat;
pub mod robustness;
pub mod sample;
pub mod sot;

pub use bases::{BasisLabel, CorrelationTensor, OperatorBasis};
pub use conic::{ConicProgram, ConicSolution, SolveStatus, SolverOptions};
pub use dynamics::{Channel, ChannelKind, ChannelSpec, ChoiOperator};
pub use error::{Error, Result};
pub use optmeas::{PvmParameterization, SearchOptions, SearchResult};
pub use qmat::{ComplexMatrix, HermitianOperator, Spectrum, Subsystem};
pub use robustness::{Assemblage, Behavior, DeterministicStrategySet, Exactness, Measure, Povm, Pvm, RobustnessResult};
pub use sot::{Construction, NsitReport, StateOverTime};
