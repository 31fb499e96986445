use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("record {record}: expected {expected} values, found {found}")]
    Arity {
        record: usize,
        expected: usize,
        found: usize,
    },

    #[error("record {record}: {reason}")]
    MalformedRecord { record: usize, reason: String },

    #[error("record {record}: truncated ({reason})")]
    Truncated { record: usize, reason: String },

    #[error("duplicate word {word:?} at record {record} (first seen at record {first})")]
    DuplicateWord {
        word: String,
        record: usize,
        first: usize,
    },

    #[error("non-finite value in vector of {word:?} (record {record})")]
    NonFinite { word: String, record: usize },

    #[error("word {0:?} cannot be encoded in word2vec format")]
    Unencodable(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("word not in vocabulary: {0:?}")]
    OutOfVocabulary(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("subspace of rank {rank} cannot supply {requested} components")]
    RankDeficient { requested: usize, rank: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid proportion: {0}")]
    InvalidProportion(String),

    #[error("word list line {line}: {reason}")]
    WordList { line: usize, reason: String },

    #[error("malformed report: {0}")]
    Report(String),
}
