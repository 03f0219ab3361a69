//! Analysis core for optional-"that" complementizer omission.
//!
//! The pipeline reads pre-parsed sentences ([`corpus`]), finds main verbs
//! followed by a complement clause with an explicit or omitted "that"
//! ([`extraction`]), measures each construction against a next-token
//! provider ([`lm`], [`predictors`]) and fits a logistic model of the
//! speaker's choice ([`regression`]). [`analysis`] holds the descriptive
//! statistics.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the command
//! line and the neural sidecar client live in the `uidthat` crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod extraction;
pub mod lm;
pub mod predictors;
pub mod regression;
pub mod tree;

pub use corpus::{parse_corpus_lines, validate_record, CorpusLoad, Diagnostic, SentenceRecord};
pub use error::{AnalysisError, FeatureError, LmError, RegressionError, TreeError};
pub use extraction::{
    classify_that_usages, detect_constructions, length_filter, ConstructionRecord, Label,
    ThatRole, ThatUsage,
};
pub use lm::{entropy, Distribution, LanguageModel, NgramConfig, NgramModel};
pub use predictors::{featurize, CorpusStats, FeatureRow};
pub use tree::{parse_bracketed_tree, ParseTree};
