//! Error taxonomy shared by the whole crate.
//!
//! The variants map onto process exit codes, so the CLI can translate any
//! failure into its contract (1 = validation, 2 = numeric, 3 = I/O or data).

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("parameter out of range: {0}")]
    Parameter(String),

    /// A table or buffer is too short for the requested computation.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An iterative numeric procedure failed to reach its tolerance.
    #[error("numeric failure: {what} (achieved {achieved:.3e}, wanted {wanted:.3e})")]
    Numeric {
        what: String,
        achieved: f64,
        wanted: f64,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A binary or text artifact does not have the expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input sequence failed a required ordering invariant.
    #[error("monotonicity violation at index {index}: {message}")]
    Monotonicity { index: usize, message: String },
}

impl Error {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Capacity(_) => 1,
            Error::Numeric { .. } => 2,
            Error::Io { .. }
            | Error::Format(_)
            | Error::Parse { .. }
            | Error::Monotonicity { .. } => 3,
        }
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(Error::parameter("x").exit_code(), 1);
        assert_eq!(Error::capacity("x").exit_code(), 1);
        assert_eq!(
            Error::Numeric {
                what: "quadrature".into(),
                achieved: 1e-3,
                wanted: 1e-10
            }
            .exit_code(),
            2
        );
        assert_eq!(Error::Format("bad magic".into()).exit_code(), 3);
        assert_eq!(
            Error::Parse {
                line: 7,
                message: "not a float".into()
            }
            .exit_code(),
            3
        );
        assert_eq!(
            Error::Monotonicity {
                index: 2,
                message: "decreasing".into()
            }
            .exit_code(),
            3
        );
        let io = Error::Io {
            path: PathBuf::from("/nope"),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "gone"),
        };
        assert_eq!(io.exit_code(), 3);
    }
}
