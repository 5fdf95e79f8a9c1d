use thiserror::Error;

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Inconsistent or out-of-range configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A user contributed to more partitions than allowed in strict mode.
    #[error("contribution violation: user {user:?} appears in more than {limit} partition(s) (line {line})")]
    StrictViolation {
        user: String,
        limit: usize,
        line: u64,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Core(#[from] partsel_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Core(_) => 2,
            PipelineError::StrictViolation { .. } => 3,
            PipelineError::Parse { .. } | PipelineError::Csv(_) | PipelineError::Io(_) => 1,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        PipelineError::Config(msg.into())
    }
}
