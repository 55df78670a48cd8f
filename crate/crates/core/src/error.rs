use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("parameter out of supported range: {0}")]
    OutOfRange(String),
    #[error("malformed group description: {0}")]
    Malformed(String),
    #[error("table does not define a group: {0}")]
    NotAGroup(String),
    #[error("group {0} is not abelian")]
    NonAbelian(String),
    #[error("function has {got} values, group has order {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("functions live on different groups")]
    GroupMismatch,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("not a fundamental domain: {0}")]
    NotFundamentalDomain(String),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("invalid character pairing: {0}")]
    InvalidPairing(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiplierError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("SDP solve did not certify: {0}")]
    Solver(String),
    #[error(transparent)]
    Sdp(#[from] vne_sdp::SdpError),
    #[error("function is not positive definite (min Gram eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("invalid witness pair: {0}")]
    InvalidWitness(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InductionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
}
