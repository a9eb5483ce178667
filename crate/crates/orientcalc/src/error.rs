use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable `{0}` is not declared in the ring")]
    UndeclaredVariable(String),

    #[error("no substitution given for variable `{0}`")]
    MissingSubstitution(String),

    #[error("operands belong to different rings")]
    RingMismatch,

    #[error("element is not weight-homogeneous: weights {0:?} occur")]
    NotHomogeneous(Vec<i64>),

    #[error("element is not a unit: augmentation is zero")]
    NotAUnit,

    #[error("cannot bound the order of the nilpotent part (no nilpotency and no truncation)")]
    NonTerminating,

    #[error("truncation too small: computation needs window {needed}, ring provides {have}")]
    TruncationTooSmall { needed: i64, have: i64 },

    #[error("polynomial is not symmetric in the designated root variables")]
    NotSymmetric,

    #[error("matrix is not invertible over the coefficient ring")]
    NotInvertible,

    #[error("linear system is inconsistent: no solution")]
    NoSolution,

    #[error("linear system is underdetermined: solution not unique")]
    AmbiguousSolution,

    #[error("determinant layout does not reproduce the recurrence values")]
    LayoutInconsistent,

    #[error("need {needed} logarithm coefficients, got {got}")]
    InsufficientLogCoefficients { needed: usize, got: usize },

    #[error("bundle must be given by Chern roots for this operation")]
    RootsRequired,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable tag of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UndeclaredVariable(_) => "undeclared-variable",
            Error::MissingSubstitution(_) => "missing-substitution",
            Error::RingMismatch => "ring-mismatch",
            Error::NotHomogeneous(_) => "not-homogeneous",
            Error::NotAUnit => "not-a-unit",
            Error::NonTerminating => "non-terminating",
            Error::TruncationTooSmall { .. } => "truncation-too-small",
            Error::NotSymmetric => "not-symmetric",
            Error::NotInvertible => "not-invertible",
            Error::NoSolution => "no-solution",
            Error::AmbiguousSolution => "ambiguous-solution",
            Error::LayoutInconsistent => "layout-inconsistent",
            Error::InsufficientLogCoefficients { .. } => "insufficient-log-coefficients",
            Error::RootsRequired => "roots-required",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
