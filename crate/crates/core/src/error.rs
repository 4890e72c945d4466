use thiserror::Error;

/// Errors raised while parsing inputs or building model values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("symbol `{0}` occurs more than once in the expression")]
    RepeatedSymbol(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,

    #[error("duplicate rule for label `{0}`")]
    DuplicateRule(String),

    #[error("missing `root = <label>` directive")]
    MissingRoot,

    #[error("malformed event stream at position {pos}: {msg}")]
    MalformedStream { pos: usize, msg: String },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("graph has a cycle reachable from its root; unfolding is infinite")]
    InfiniteUnfolding,

    #[error("schema is not disjunction-free")]
    NotDisjunctionFree,

    #[error("word exceeds the enumeration bound ({count} > {bound})")]
    BoundExceeded { count: u64, bound: u64 },

    #[error("required children form a cycle; no finite tree has label(s) {}", .0.join(", "))]
    UnsatisfiableLabels(Vec<String>),

    #[error("symbols of the two inputs come from different alphabets")]
    AlphabetMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
