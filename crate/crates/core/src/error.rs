use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout parse error at line {line}: {msg}")]
    LayoutParse { line: usize, msg: String },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid placement: {0}")]
    InvalidPlacement(String),

    #[error("layout generation failed: {0}")]
    Generation(String),

    #[error("linear program is {0}")]
    Lp(LpStatus),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid spot ({row}, {col}): {msg}")]
    InvalidSpot { row: usize, col: usize, msg: String },

    #[error("training error: {0}")]
    Training(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config file: {0}")]
    Toml(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Infeasible,
    Unbounded,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpStatus::Infeasible => f.write_str("infeasible"),
            LpStatus::Unbounded => f.write_str("unbounded"),
        }
    }
}
