use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the three failure classes the CLI distinguishes:
/// bad input (including violated preconditions and schema problems),
/// capability limits (enumeration caps), and everything else.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capability limit: {0}")]
    Capability(String),

    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("iteration cap exceeded: {0}")]
    IterationCap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by a limit of the library.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Precondition(_) | Error::Schema { .. } | Error::Generation(_)
        )
    }

    pub fn is_capability_error(&self) -> bool {
        matches!(self, Error::Capability(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
