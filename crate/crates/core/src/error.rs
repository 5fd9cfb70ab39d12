use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: field `{field}`: {reason}")]
    MalformedLine {
        line: usize,
        field: String,
        reason: String,
    },

    #[error("duplicate review id `{id}` (line {line})")]
    DuplicateId { id: String, line: usize },

    #[error("unknown series `{0}`")]
    UnknownSeries(String),

    #[error("series `{0}` appears in both train and test sets")]
    OverlappingSplit(String),

    #[error("invalid knowledge base: {0}")]
    InvalidKnowledgeBase(String),

    #[error("surface string `{surface}` maps to both {first} and {second}")]
    AmbiguousSurface {
        surface: String,
        first: String,
        second: String,
    },

    #[error("term `{0}` not in vocabulary")]
    UnknownTerm(String),

    #[error("dimension mismatch: expected at most {expected} features, got index {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no knowledge base for series `{0}`")]
    MissingKnowledgeBase(String),

    #[error("JSON error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Whether the error stems from bad input or usage rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Diverged(_))
    }
}
