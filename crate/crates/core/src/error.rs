use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("fractional order alpha = {0} is outside (0, 2)")]
    InvalidAlpha(f64),

    #[error("grid size {0} must be a power of two and at least 16")]
    InvalidGridSize(usize),

    #[error("fields live on different grids ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },

    #[error("sample count {got} does not match grid size {expected}")]
    SampleCount { expected: usize, got: usize },

    #[error("argument {name} = {value} is out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("vacuum reached at t = {t}: min rho = {rho_min:e}")]
    Vacuum { t: f64, rho_min: f64 },

    #[error("non-finite value in {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("low-pass density rho_<=Q touches zero for Q = {q} (min {min:e})")]
    LowPassVacuum { q: i32, min: f64 },

    #[error("density floor violated: min rho0 = {min} < floor {floor}")]
    FloorViolation { min: f64, floor: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("{what} requires at least {min} entries, got {got}")]
    TooShort {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
