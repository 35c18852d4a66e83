use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("index {k} is outside [0, {n}]")]
    IndexOutOfRange { k: u64, n: u64 },

    #[error("polarization {0} is outside [0, 1]")]
    InvalidPolarization(f64),

    #[error("resolution {0} must be a finite real >= 2")]
    InvalidResolution(f64),

    #[error("resolution too coarse: ceil(R/2) = {half} exceeds M = {limit}")]
    ResolutionTooCoarse { half: u64, limit: u64 },

    #[error("m_min = {m_min} is not admissible for M = {m} (need M/2 < m_min <= M + 1)")]
    InvalidThreshold { m: u64, m_min: u64 },

    #[error("ensemble size must be positive")]
    EmptyEnsemble,

    #[error("base c = {0} must exceed 1")]
    InvalidBase(f64),

    #[error("{0}: denominator vanishes")]
    ZeroDenominator(&'static str),

    #[error("{what}: no real solution ({detail})")]
    NoRealSolution { what: &'static str, detail: String },

    #[error("register of {n} argument qubits exceeds the supported maximum of {max}")]
    StateTooLarge { n: u32, max: u32 },

    #[error("invalid oracle: {0}")]
    InvalidOracle(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
