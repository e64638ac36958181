use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{what} exceeds cap {limit} (got {got})")]
    CapExceeded { what: String, limit: u64, got: u64 },
    #[error("invalid entry: {0}")]
    InvalidEntry(String),
    #[error("partitions or functions live on different spaces")]
    SpaceMismatch,
    #[error("map is not injective: {0}")]
    NotInjective(String),
    #[error("not a probability measure: {0}")]
    NotProbability(String),
    #[error("marginal at label {label} differs from the base measure")]
    MarginalMismatch { label: String },
    #[error("function system misaligned: {0}")]
    Misaligned(String),
    #[error("overlap subcouplings differ at cylinder {witness}")]
    OverlapMismatch { witness: String },
    #[error("coupling is not idempotent")]
    NotIdempotent,
    #[error("requested level {requested} beyond horizon {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },
    #[error("powered seminorm is not a nonnegative real: {0}")]
    NegativeSeminorm(String),
    #[error("generator {0} does not preserve weights")]
    WeightDistorting(String),
    #[error("generator moves support tuple {0} off the support")]
    OffSupport(String),
    #[error("partition is not invariant: {0}")]
    NotInvariant(String),
    #[error("filtration law fails: {0}")]
    FiltrationViolation(String),
    #[error("batch of {got} samples is below the minimum {need}")]
    UndersizedBatch { got: usize, need: usize },
    #[error("label {0} not in index set")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn cap(what: &str, limit: u64, got: u64) -> Result<()> {
    if got > limit {
        Err(Error::CapExceeded { what: what.to_string(), limit, got })
    } else {
        Ok(())
    }
}
