use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every boundary segment is excluded from padding")]
    AllSegmentsExcluded,

    #[error("degenerate cell {cell} (area {area:e})")]
    DegenerateCell { cell: usize, area: f64 },

    #[error("mesh is already extended")]
    AlreadyExtended,

    #[error("filter mode {0} is incompatible with this mesh")]
    IncompatibleMode(&'static str),

    #[error("non-positive filter denominator {value:e} in row {row}")]
    NonPositiveDenominator { row: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("stiffness matrix is singular or not positive definite ({0})")]
    SingularSystem(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("optimality-criteria bisection failed: {0}")]
    Bisection(String),

    #[error("inconsistent configuration: {0}")]
    Config(String),

    #[error("unknown problem preset `{0}`")]
    UnknownPreset(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
