use thiserror::Error;

use crate::exact::{Model, Stat};

/// Errors produced by the parsers, models and pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unbalanced bracket at position {position}")]
    UnbalancedBracket { position: usize },
    #[error("illegal character {ch:?} at position {position}")]
    IllegalCharacter { ch: char, position: usize },
    #[error("bpseq indices are not exactly 1..={expected}: found {found}")]
    NonContiguousIndices { expected: usize, found: usize },
    #[error("bpseq pair {i} -> {j} is not mirrored")]
    AsymmetricPair { i: usize, j: usize },
    #[error("position {0} is paired with itself")]
    SelfPair(usize),
    #[error("malformed bpseq line {line}: {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("pairing needs more than four bracket families to render")]
    TooManyBracketFamilies,
    #[error("structure contains crossing pairs; use shortest_path_stats")]
    CrossingStructure,
    #[error("structure is empty")]
    EmptyStructure,
    #[error("invalid ETE model: {0}")]
    InvalidEteModel(String),
    #[error("invalid Pfold parameters: {0}")]
    InvalidPfoldParams(String),
    #[error("grammar assigns zero probability to length {0}")]
    ZeroMassLength(usize),
    #[error("unsupported combination: {model} x {stat}")]
    UnsupportedCombination { model: Model, stat: Stat },
    #[error("size {n} exceeds the enumeration limit {limit}")]
    SizeTooLarge { n: usize, limit: usize },
    #[error("R(z) has no sign change on (0, {upper})")]
    NoRootInRange { upper: f64 },
    #[error("tolerance {tol} needs more than {cap} summation terms")]
    TolNotAchievable { tol: f64, cap: usize },
    #[error("k = {k} exceeds sequence length {len}")]
    KTooLarge { k: usize, len: usize },
    #[error("law is bivariate; expand a marginal instead")]
    NotUnivariate,
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("input contains no records")]
    NoRecords,
    #[error("all {0} records failed")]
    AllRecordsFailed(usize),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
