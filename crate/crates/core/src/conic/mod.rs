//! Dense primal-dual interior-point solver for small block-structured
//! semidefinite and linear programs.
//!
//! Primal: minimize `⟨C, X⟩` subject to `⟨Aᵢ, X⟩ = bᵢ` and `X ⪰ 0` blockwise.
//! Dual: maximize `bᵀy` subject to `C − Σ yᵢAᵢ = S ⪰ 0`.
//! Each block is a complex Hermitian PSD cone or a nonnegative orthant.

mod dump;
mod program;
mod solver;

pub use dump::{from_dump, to_dump};
pub use program::{smat, svec, BlockMap, BlockValue, Cone, ConicProgram};
pub use solver::{dual_certificate, solve, ConicSolution, SolveStatus, SolverOptions};
