use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed record in a line-oriented input file.
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("duplicate id {id} on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("missing embedding for id={0}")]
    MissingEmbedding(String),

    #[error("duplicate embedding for id={0}")]
    DuplicateEmbedding(String),

    #[error("ragged dimensions: id={id} has dim {found}, expected {expected}")]
    RaggedDimensions {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate input: empty or zero feature vector")]
    Degenerate,

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("embedder fingerprint mismatch: model has {expected}, input has {found}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no positive labels")]
    NoPositives,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
