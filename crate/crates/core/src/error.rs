use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("too few points: need at least {needed}, got {actual}")]
    TooFewPoints { needed: usize, actual: usize },
    #[error("field is in {actual} space, expected {expected} space")]
    WrongSpace {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("level {level} outside the supported range {min}..={max}")]
    LevelOutOfRange { level: usize, min: usize, max: usize },
    #[error("argument outside the domain: {0}")]
    OutsideDomain(String),
    #[error("packet too wide for the analytic expansion: {0}")]
    PacketTooWide(String),
    #[error("grid too narrow: captured norm {captured:.3e} below 1 - {tolerance:.1e}")]
    GridTooNarrow { captured: f64, tolerance: f64 },
    #[error("insufficient basis: captured norm {captured:.3e} below 1 - {tolerance:.1e}")]
    InsufficientCapture { captured: f64, tolerance: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("density not normalized: integral {0:.6e}")]
    Unnormalized(f64),
    #[error("negative input: {0}")]
    Negative(String),
    #[error("n_bar = {n_bar} must lie in 2..={max} for central differences")]
    SpectrumEdge { n_bar: usize, max: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

/// Failure class of a scenario run; the discriminant is the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config = 2,
    Numeric = 3,
    Io = 4,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Io(_) => ErrorCategory::Io,
            _ => ErrorCategory::Numeric,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category() as i32
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
