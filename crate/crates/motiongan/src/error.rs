use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] motiongan_core::Error),
    #[error("torch: {0}")]
    Torch(#[from] tch::TchError),
    #[error("config: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("score outside (0, 1): {0}")]
    Domain(String),
    #[error("loss {loss} is not finite at step {step}")]
    NonFinite { loss: &'static str, step: u64 },
    #[error("checkpoint {}: {message}", path.display())]
    Checkpoint { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn checkpoint(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Checkpoint {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Whether the failure traces back to the caller's input rather than to
    /// the program itself.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Torch(_) | Error::NonFinite { .. } | Error::Shape(_))
    }
}
