use std::path::PathBuf;

/// Reason code attached to degenerate-input failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerateCode {
    /// The analysed channel has no measurable variance.
    NoTexture,
    /// Every feature component was pruned as having zero variance.
    AllComponentsDegenerate,
}

impl std::fmt::Display for DegenerateCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DegenerateCode::NoTexture => f.write_str("no texture"),
            DegenerateCode::AllComponentsDegenerate => f.write_str("all components degenerate"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("degenerate input ({code}){context}")]
    Degenerate {
        code: DegenerateCode,
        /// Human-readable provenance, e.g. " at scale 1, channel 0".
        context: String,
    },

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt input {}: {reason}", path.display())]
    Corrupt { path: PathBuf, reason: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("dataset layout error: {}", offenders.join(", "))]
    Layout { offenders: Vec<String> },

    #[error("empty dataset at {}", .0.display())]
    EmptyDataset(PathBuf),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn no_texture() -> Self {
        Error::Degenerate {
            code: DegenerateCode::NoTexture,
            context: String::new(),
        }
    }

    /// Appends provenance to a degenerate-input error; other kinds pass through.
    pub fn with_provenance(self, scale: usize, channel: usize) -> Self {
        match self {
            Error::Degenerate { code, context } => Error::Degenerate {
                code,
                context: format!("{context} at scale {scale}, channel {channel}"),
            },
            other => other,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate { .. })
    }
}
