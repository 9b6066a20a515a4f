use std::io;
use std::path::PathBuf;

/// Failure classes of the command-line tool, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("unknown config key(s): {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("malformed header in {context}: {reason}")]
    MalformedHeader { context: String, reason: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: ngrc_core::Error,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ngrc_core::Error> for Error {
    fn from(source: ngrc_core::Error) -> Self {
        Error::Core {
            context: "error".into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Exit code: configuration problems.
pub const EXIT_CONFIG: u8 = 2;
/// Exit code: unreadable or inconsistent data.
pub const EXIT_DATA: u8 = 3;
/// Exit code: a numerical failure such as a singular system.
pub const EXIT_NUMERICAL: u8 = 4;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable code naming the failure kind.
    pub fn code(&self) -> &'static str {
        use ngrc_core::Error as C;
        match self {
            Error::Config(_) | Error::UnknownKeys(_) => "config",
            Error::MalformedHeader { .. } => "malformed-header",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Core { source, .. } => match source {
                C::LengthMismatch { .. } => "length-mismatch",
                C::LabelOutOfRange { .. } => "label-out-of-range",
                C::NonFinite { .. } => "non-finite",
                C::Inhomogeneous(_) => "inhomogeneous",
                C::InvalidParameter { .. } => "invalid-parameter",
                C::ShapeMismatch(_) | C::LayoutMismatch(_) => "shape",
                C::EmptyInput | C::MissingConditioningClass { .. } => "missing-data",
                C::Singular { .. } | C::AllSingular => "singular",
                C::ZeroVariance { .. } | C::DegenerateMeans | C::UndefinedReduction => "degenerate",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.code() {
            "config" | "invalid-parameter" => EXIT_CONFIG,
            "singular" | "degenerate" => EXIT_NUMERICAL,
            _ => EXIT_DATA,
        }
    }
}

/// Attaches context to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, ngrc_core::Error> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| Error::Core { context: what(), source })
    }
}
