//! Dense semidefinite programming over real symmetric matrices.
//!
//! Complex Hermitian programs are handled by callers through the realification
//! helpers in [`realify`].

mod problem;
pub mod realify;
mod solver;

pub use problem::{Constraint, SdpProblem, SymMatrix};
pub use solver::{solve, SdpOptions, SdpSolution, SdpStatus};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
