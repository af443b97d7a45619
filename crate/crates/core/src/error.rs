use thiserror::Error;

use crate::term::FunId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Parse failure with a 1-based position into the original text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SyntaxError: {line}:{column}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("UnboundName: {name} in {location}")]
    UnboundName { name: String, location: String },
    #[error("DuplicateDefinition: {0}")]
    DuplicateDefinition(FunId),
    #[error("ShadowsIntrinsic: {0}")]
    ShadowsIntrinsic(FunId),
    #[error("InconsistentArity: external {name} used with arities {first} and {second}")]
    InconsistentArity {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("TargetUndefined: {0}")]
    TargetUndefined(FunId),
    #[error("AdapterNotClosed: free {}", .0.join(", "))]
    AdapterNotClosed(Vec<String>),
    #[error("ArityMismatch: {target} expects {expected}, adapter takes {found}")]
    ArityMismatch {
        target: FunId,
        expected: usize,
        found: usize,
    },
    #[error("NameCollision: {0}")]
    NameCollision(String),
    #[error("AmbiguousAtomArity: {0}")]
    AmbiguousAtomArity(String),
    #[error("RewriteDivergence: fuel {fuel} exhausted; last firings:\n{}", .last.join("\n"))]
    RewriteDivergence { fuel: usize, last: Vec<String> },
    #[error("ExtractNotFound: {0}")]
    ExtractNotFound(String),
    #[error("ExtractNotClosed: free {}", .0.join(", "))]
    ExtractNotClosed(Vec<String>),
    #[error("DefaultNotClosed: free {}", .0.join(", "))]
    DefaultNotClosed(Vec<String>),
    #[error("BadPermutation: {0}")]
    BadPermutation(String),
    #[error("PositionOutOfRange: {position} not in 1..={max}")]
    PositionOutOfRange { position: usize, max: usize },
    #[error("ParamStillUsed: {0}")]
    ParamStillUsed(String),
    #[error("RecursiveUnfold: {0}")]
    RecursiveUnfold(FunId),
    #[error("ShapeMismatch: {entry} takes {} arguments, {shapes} shapes given", .entry.arity)]
    ShapeMismatch { entry: FunId, shapes: usize },
    #[error("EntryMissing: {0}")]
    EntryMissing(FunId),
    #[error("ConflictingAdapters: {0}")]
    ConflictingAdapters(FunId),
    #[error("InvalidName: `{0}` is not a valid name here")]
    InvalidName(String),
    #[error("AdapterFile: {0}")]
    AdapterFile(String),
}

impl Error {
    /// Errors caused by malformed input text rather than by a transformation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax(_)
                | Error::UnboundName { .. }
                | Error::DuplicateDefinition(_)
                | Error::ShadowsIntrinsic(_)
                | Error::InconsistentArity { .. }
                | Error::AdapterFile(_)
                | Error::InvalidName(_)
                | Error::ShapeMismatch { .. }
                | Error::EntryMissing(_)
        )
    }
}
