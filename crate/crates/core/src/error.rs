//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong when constructing or combining structures,
/// parsing inputs, or running a check whose precondition fails.
///
/// Parse-flavoured variants carry a position so callers can point at the
/// offending input; the remaining variants are precondition violations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid symbol name {name:?} (allowed characters: A-Za-z0-9_.<, non-empty)")]
    InvalidSymbolName { name: String },

    #[error("duplicate symbol {name:?} in signature")]
    DuplicateSymbol { name: String },

    #[error("symbol {name:?} must have arity >= 1")]
    InvalidArity { name: String },

    #[error("unknown symbol {name:?}")]
    UnknownSymbol { name: String },

    #[error("symbol {name:?} has arity {expected}, got a tuple of length {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("element {element} out of range for domain of size {size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("signature mismatch: {context}")]
    SignatureMismatch { context: String },

    #[error("signatures overlap on symbol {name:?}")]
    OverlappingSignatures { name: String },

    #[error("symbol {name:?} already present")]
    NameCollision { name: String },

    #[error("invalid rename prefix {prefix:?}")]
    InvalidPrefix { prefix: String },

    #[error("map is not injective: elements {first} and {second} share image {image}")]
    NotInjective {
        first: usize,
        second: usize,
        image: usize,
    },

    #[error("map of length {got} does not cover a domain of size {expected}")]
    IncompleteMap { expected: usize, got: usize },

    #[error("not an embedding: {detail}")]
    NotAnEmbedding { detail: String },

    #[error("not a homomorphism: {detail}")]
    NotAHomomorphism { detail: String },

    #[error("line {line}: {message}")]
    TextFormat { line: usize, message: String },

    #[error("formula syntax error at position {position}: {message}")]
    Formula { position: usize, message: String },

    #[error("class spec syntax error at position {position}: {message}")]
    ClassDsl { position: usize, message: String },

    #[error("map file, line {line}: {message}")]
    MapFile { line: usize, message: String },

    #[error("invalid class parameter: {message}")]
    InvalidClassParameter { message: String },

    #[error("symbol sets do not partition the signature: {detail}")]
    NotAPartition { detail: String },

    #[error("relation {symbol:?} contains a tuple with repeated entries: {tuple:?}")]
    NonInjectiveRelation { symbol: String, tuple: Vec<usize> },

    #[error("structure is not a member of the class: {detail}")]
    NotAMember { detail: String },

    #[error("formula does not define a strict linear order on {which}")]
    FormulaNotOrder { which: String },

    #[error("no strong amalgam found within the size cap for a required diagram (|A|={base_size}, |B1|={left_size}, |B2|={right_size})")]
    NoStrongAmalgam {
        base_size: usize,
        left_size: usize,
        right_size: usize,
    },

    #[error("coloring is invalid: {detail}")]
    InvalidColoring { detail: String },

    #[error("{message}")]
    Unsupported { message: String },
}

impl Error {
    /// True for errors that stem from malformed textual input (structure
    /// files, formulas, class specs, map files) rather than from a violated
    /// operation precondition.
    pub fn is_input_format(&self) -> bool {
        matches!(
            self,
            Error::TextFormat { .. }
                | Error::Formula { .. }
                | Error::ClassDsl { .. }
                | Error::MapFile { .. }
        )
    }
}
