use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite training loss at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    #[error(
        "Fourier index set too large: {truncation}^{dimension} = {required} multi-indices exceeds the budget of {budget}"
    )]
    Capacity {
        dimension: usize,
        truncation: usize,
        required: f64,
        budget: usize,
    },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("duplicate column `{0}` in header")]
    DuplicateColumn(String),

    #[error("non-numeric cell at row {row}, column `{column}`: {value:?}")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, mapped onto process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Numeric => "numeric",
        }
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) | Error::Capacity { .. } => ErrorKind::Config,
            Error::DimensionMismatch { .. }
            | Error::Empty(_)
            | Error::NonFinite(_)
            | Error::MissingColumn(_)
            | Error::DuplicateColumn(_)
            | Error::ParseCell { .. }
            | Error::Csv(_)
            | Error::Io { .. }
            | Error::Json(_) => ErrorKind::Data,
            Error::Diverged { .. }
            | Error::NotPositiveDefinite
            | Error::RankDeficient
            | Error::Degenerate(_) => ErrorKind::Numeric,
        }
    }
}
