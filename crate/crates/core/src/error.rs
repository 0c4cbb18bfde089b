use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("unsupported XML feature: {0}")]
    UnsupportedFeature(String),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable `{0}` is bound more than once")]
    DuplicateVariable(String),
    #[error("return expressions share the last element name `{0}`")]
    DuplicateReturnName(String),
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("path repeats element name `{0}`")]
    NonDistinctPathNames(String),
    #[error("binding chain through `{0}` is cyclic")]
    CyclicBinding(String),
    #[error("variable `{0}` cannot be resolved")]
    UnresolvableVariable(String),
    #[error("update is not rooted at view `{0}`")]
    ViewMismatch(String),
    #[error("unknown document `{0}`")]
    UnknownDocument(String),
    #[error("document `{doc}` has root `{found}`, query expects `{expected}`")]
    RootLabelMismatch {
        doc: String,
        expected: String,
        found: String,
    },
    #[error("cannot delete the document root `{0}`")]
    TargetIsRoot(String),
    #[error("expected a {expected}-level update, got a {found}-level one")]
    LevelMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    /// True for errors raised while reading view, update, or document text.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedXml(_)
                | Error::UnsupportedFeature(_)
                | Error::Syntax { .. }
                | Error::DuplicateVariable(_)
                | Error::DuplicateReturnName(_)
                | Error::UnboundVariable(_)
                | Error::NonDistinctPathNames(_)
                | Error::CyclicBinding(_)
                | Error::LevelMismatch { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
