use std::path::PathBuf;

use wpmec_core::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },

    #[error("`{0}` and `{1}` both given")]
    Conflict(String, String),

    #[error("invalid config: {}", list(.0))]
    Invalid(Vec<Violation>),

    #[error("unknown preset `{given}` (valid: {valid})")]
    UnknownPreset { given: String, valid: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(wpmec_core::Error),

    #[error("{0}")]
    Usage(String),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl From<wpmec_core::Error> for Error {
    fn from(e: wpmec_core::Error) -> Self {
        match e {
            wpmec_core::Error::Invalid(v) => Error::Invalid(v),
            e => Error::Core(e),
        }
    }
}

impl Error {
    /// True for problems with the input rather than with a solve.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::UnknownKey(_)
                | Error::BadValue { .. }
                | Error::Conflict(..)
                | Error::Invalid(_)
                | Error::UnknownPreset { .. }
                | Error::Toml { .. }
                | Error::Usage(_)
        )
    }
}
