use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty tree string")]
    Empty,
    #[error("unbalanced parentheses at offset {offset}")]
    Unbalanced { offset: usize },
    #[error("empty constituent at offset {offset}")]
    EmptyConstituent { offset: usize },
    #[error("unexpected token at offset {offset}")]
    UnexpectedToken { offset: usize },
    #[error("trailing input after root at offset {offset}")]
    TrailingInput { offset: usize },
}

/// Failures of a next-token provider.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmError {
    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("continuation word is empty")]
    EmptyWord,
    /// Transport-level failure; the same request may succeed when retried.
    #[error("provider transport failure: {0}")]
    Transport(String),
    #[error("provider protocol error: {0}")]
    Protocol(String),
    #[error("provider does not support {0}")]
    Unsupported(&'static str),
}

impl LmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LmError::Transport(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("main verb lemma {0:?} is missing from corpus statistics")]
    UnknownLemma(String),
    #[error("constructions reference sentences missing from the corpus: {0:?}")]
    DanglingReferences(Vec<String>),
    #[error("construction {sentence_id}:{main_verb_index} does not fit its sentence")]
    InconsistentConstruction {
        sentence_id: String,
        main_verb_index: usize,
    },
    #[error(transparent)]
    Provider(#[from] LmError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressionError {
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("column {0:?} is constant and cannot be standardized")]
    ConstantColumn(String),
    #[error("row {row} has {got} values, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("data are perfectly separable; the maximum-likelihood estimate does not exist (set a small ridge penalty)")]
    PerfectSeparation,
    #[error("IRLS did not converge in {iterations} iterations (consider a small ridge penalty)")]
    NonConvergence { iterations: usize },
    #[error("information matrix is singular (collinear predictors?)")]
    Singular,
    #[error("fit did not converge; refusing to compute inference")]
    NotConverged,
    #[error("{names} names supplied for {coefficients} coefficients")]
    NameMismatch { names: usize, coefficients: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("all values are equal; pass an explicit bandwidth")]
    DegenerateBandwidth,
    #[error("bandwidth must be positive and finite")]
    InvalidBandwidth,
    #[error("top_k must be at least 1")]
    InvalidTopK,
    #[error("sample size {0} must be even (half explicit, half implicit)")]
    OddSampleSize(usize),
    #[error("not enough constructions for a balanced sample of {requested}: {explicit} explicit, {implicit} implicit available")]
    InsufficientClass {
        requested: usize,
        explicit: usize,
        implicit: usize,
    },
}
