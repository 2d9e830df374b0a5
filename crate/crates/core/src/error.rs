use thiserror::Error;

/// Errors raised by state construction, protocol execution and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("width {requested} exceeds the {cap}-qubit cap")]
    WidthCap { requested: usize, cap: usize },

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),

    #[error("register `{0}` has invalid width")]
    InvalidWidth(String),

    #[error("register sets overlap on `{0}`")]
    OverlappingRegisters(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("duplicate classical label {0:?}")]
    DuplicateLabel(Vec<String>),

    #[error("gate `{gate}` is not unitary (deviation {deviation:e})")]
    NotUnitary { gate: String, deviation: f64 },

    #[error("preparation on registers that are not in |0>: {0}")]
    NotFresh(String),

    #[error("register ownership violation: {0}")]
    Ownership(String),

    #[error("input out of range: {0}")]
    InputOutOfRange(String),

    #[error("analysis mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("incompatible protocols: {0}")]
    Incompatible(String),

    #[error("exhaustion budget exceeded: {0}")]
    Budget(String),

    #[error("length mismatch: {0}")]
    Length(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
