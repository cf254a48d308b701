//! Error type shared by all modules, with a coarse kind used for exit codes.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, RodError>;

/// Coarse failure category; the CLI maps these to process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: invalid parameters, malformed config, inadmissible data.
    Validation,
    /// A solver failed to converge or produced unusable numbers.
    Numerical,
    /// Filesystem problems while reading configs or writing artifacts.
    Io,
}

#[derive(Debug, Error)]
pub enum RodError {
    /// Invalid input; `path` names the offending field or argument.
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    /// Numerical failure; `context` names the solver, `message` the diagnostics.
    #[error("numerical failure in {context}: {message}")]
    Numerical { context: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RodError {
    /// Convenience constructor for validation failures.
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        RodError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Convenience constructor for numerical failures.
    pub fn numerical(context: impl Into<String>, message: impl Into<String>) -> Self {
        RodError::Numerical {
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            RodError::Validation { .. } => ErrorKind::Validation,
            RodError::Numerical { .. } => ErrorKind::Numerical,
            RodError::Io(_) => ErrorKind::Io,
        }
    }

    /// Process exit code used by the CLI: 2 for bad input (including i/o),
    /// 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Validation | ErrorKind::Io => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_distinguish_validation_from_numerical() {
        assert_eq!(RodError::validation("x", "bad").exit_code(), 2);
        assert_eq!(RodError::numerical("newton", "diverged").exit_code(), 3);
        let io = RodError::from(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        assert_eq!(io.exit_code(), 2);
    }

    #[test]
    fn messages_carry_field_paths() {
        let err = RodError::validation("params.twist_c", "must be positive");
        assert!(err.to_string().contains("params.twist_c"));
    }
}
