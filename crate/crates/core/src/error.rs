use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("pairing matrix is singular; couple is not cosymplectic")]
    NotCosymplectic,
    #[error("no Reeb vector: residual {residual:.3e} exceeds tolerance")]
    NoReebVector { residual: f64 },
    #[error("change of basis is singular (|det| = {det:.3e})")]
    SingularChangeOfBasis { det: f64 },
    #[error("integral over an unbounded z-line is undefined")]
    UnboundedDomain,
    #[error("one-form is not closed (max cross-derivative mismatch {mismatch:.3e})")]
    NotClosed { mismatch: f64 },
    #[error("form has non-constant components")]
    NonConstantForm,
    #[error("isotopy kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("isotopies live on different models")]
    ModelMismatch,
    #[error("generator is time-dependent; an autonomous generator is required")]
    NonAutonomous,
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("point is not a fixed point of the time-1 map (displacement {displacement:.3e})")]
    NotAFixedPoint { displacement: f64 },
    #[error("reparameterization leaves [0,1]: {0}")]
    RangeViolation(String),
    #[error("epsilon must lie in (0,1), got {0}")]
    InvalidEpsilon(f64),
    #[error("generator is not normalized (max |mean| = {0:.3e})")]
    NotNormalized(f64),
    #[error("boundary flattening failed after {rounds} shrink rounds")]
    ConstructionFailed { rounds: usize },
    #[error("no candidate isotopy reaches the target time-1 map")]
    NoValidCandidate,
    #[error("sequence is not Cauchy below {threshold:.3e} (best tail margin {margin:.3e})")]
    NotCauchy { threshold: f64, margin: f64 },
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
