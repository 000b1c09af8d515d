//! Dense primal-dual interior-point solver for small block-diagonal SDPs.

pub mod problem;
pub mod solver;

pub use problem::{BlockEntry, Constraint, ProblemError, SdpProblem};
pub use solver::{solve, SdpSettings, SdpSolution, SdpStatus};
