use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// bad input (2), capacity limits (3) and falsification reports (4), the
/// last being raised whenever an audited identity fails on a concrete
/// instance.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("valuation of zero is undefined")]
    UndefinedValuation,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: String,
        requested: String,
        limit: String,
    },

    #[error("field mismatch: Q(sqrt {left}) vs Q(sqrt {right})")]
    FieldMismatch { left: String, right: String },

    #[error("unsupported extension: {0}")]
    UnsupportedExtension(String),

    #[error("term {term} has no representation as a product of two base elements")]
    Representation { term: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("integrity failure: {0}")]
    Integrity(String),

    #[error("falsification: {0}")]
    Falsification(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn capacity(what: impl Into<String>, requested: impl ToString, limit: impl ToString) -> Self {
        Error::Capacity {
            what: what.into(),
            requested: requested.to_string(),
            limit: limit.to_string(),
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            Error::Integrity(_) | Error::Falsification(_) => 4,
            Error::Io(_) => 1,
            _ => 2,
        }
    }

    /// Prefixes the message with a pipeline stage label, keeping the variant
    /// (and so the exit code).
    pub fn in_stage(self, stage: &str) -> Self {
        let tag = |m: String| format!("[{stage}] {m}");
        match self {
            Error::UndefinedValuation => Error::Domain(tag("valuation of zero is undefined".into())),
            Error::Domain(m) => Error::Domain(tag(m)),
            Error::Capacity { what, requested, limit } => Error::Capacity { what: tag(what), requested, limit },
            Error::FieldMismatch { left, right } => Error::FieldMismatch { left: tag(left), right },
            Error::UnsupportedExtension(m) => Error::UnsupportedExtension(tag(m)),
            Error::Representation { term } => Error::Representation { term: tag(term) },
            Error::Shape(m) => Error::Shape(tag(m)),
            Error::Precondition(m) => Error::Precondition(tag(m)),
            Error::Input(m) => Error::Input(tag(m)),
            Error::Integrity(m) => Error::Integrity(tag(m)),
            Error::Falsification(m) => Error::Falsification(tag(m)),
            Error::Io(m) => Error::Io(tag(m)),
        }
    }

    pub fn is_falsification(&self) -> bool {
        matches!(self, Error::Integrity(_) | Error::Falsification(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Input(format!("json: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Input("x".into()).exit_code(), 2);
        assert_eq!(Error::Precondition("x".into()).exit_code(), 2);
        assert_eq!(Error::capacity("sieve", 10, 5).exit_code(), 3);
        assert_eq!(Error::Falsification("x".into()).exit_code(), 4);
        assert_eq!(Error::Integrity("x".into()).exit_code(), 4);
        let staged = Error::Falsification("cycle".into()).in_stage("cycles");
        assert_eq!(staged, Error::Falsification("[cycles] cycle".into()));
        assert!(staged.is_falsification());
        assert_eq!(Error::UndefinedValuation.in_stage("x").exit_code(), 2);
    }
}
