//! Next-token distributions and the provider abstraction.
//!
//! All log-probabilities and entropies are in nats.

mod ngram;

pub use ngram::{train_ngram, NgramConfig, NgramModel, BOS, EOS, UNK};

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::LmError;

/// A normalized probability vector over a provider's vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub vocab_ids: Vec<u32>,
    pub probs: Vec<f64>,
    /// Set when the provider had no evidence for the context and returned
    /// a uniform distribution instead.
    pub uniform_fallback: bool,
}

pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

impl Distribution {
    pub fn new(vocab_ids: Vec<u32>, probs: Vec<f64>) -> Result<Self, LmError> {
        if vocab_ids.len() != probs.len() || probs.is_empty() {
            return Err(LmError::Protocol(String::from(
                "distribution ids and probabilities differ in length",
            )));
        }
        let d = Distribution {
            vocab_ids,
            probs,
            uniform_fallback: false,
        };
        if !d.is_normalized(NORMALIZATION_TOLERANCE) {
            return Err(LmError::Protocol(String::from(
                "distribution is not normalized",
            )));
        }
        Ok(d)
    }

    pub fn uniform(size: usize) -> Self {
        Distribution {
            vocab_ids: (0..size as u32).collect(),
            probs: alloc::vec![1.0 / size as f64; size],
            uniform_fallback: false,
        }
    }

    /// Softmax over raw next-token scores.
    pub fn from_logits(vocab_ids: Vec<u32>, logits: &[f64]) -> Result<Self, LmError> {
        if logits.is_empty() || logits.iter().any(|l| l.is_nan()) {
            return Err(LmError::Protocol(String::from("invalid logits")));
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
        let z: f64 = exps.iter().sum();
        Self::new(vocab_ids, exps.into_iter().map(|e| e / z).collect())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.probs.iter().all(|p| *p >= 0.0 && p.is_finite())
            && libm::fabs(self.probs.iter().sum::<f64>() - 1.0) <= tol
    }

    pub fn prob_of(&self, id: u32) -> f64 {
        self.vocab_ids
            .iter()
            .position(|v| *v == id)
            .map_or(0.0, |i| self.probs[i])
    }
}

/// Shannon entropy `-Σ p ln p`, with `0 ln 0 = 0`.
pub fn entropy(d: &Distribution) -> f64 {
    let sum: f64 = d
        .probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * libm::log(*p))
        .sum();
    // avoids a signed zero for one-hot inputs
    (-sum).max(0.0)
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    Ngram,
    External,
}

/// How a provider expects its prefix to be segmented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tokenization {
    /// Whole words; prefixes are token lists.
    Word,
    /// Subword units; prefixes are detokenized to running text.
    Subword,
}

impl ProviderKind {
    pub fn tokenization(self) -> Tokenization {
        match self {
            ProviderKind::Ngram => Tokenization::Word,
            ProviderKind::External => Tokenization::Subword,
        }
    }
}

/// A source of next-token predictions.
///
/// Prefixes are always passed as sentence tokens; subword providers
/// detokenize them (see [`detokenize`]).
pub trait LanguageModel {
    fn kind(&self) -> ProviderKind;

    /// Short identity string recorded in output metadata.
    fn describe(&self) -> String;

    fn next_token_distribution(&self, prefix: &[&str]) -> Result<Distribution, LmError>;

    /// `ln p(word | prefix)`. Subword providers return the sum over the
    /// word's subword pieces, a lower bound on the word-level value.
    fn continuation_logprob(&self, prefix: &[&str], word: &str) -> Result<f64, LmError>;

    /// Entropy of the next-token distribution after `prefix`.
    fn next_token_entropy(&self, prefix: &[&str]) -> Result<f64, LmError> {
        self.next_token_distribution(prefix).map(|d| entropy(&d))
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for &T {
    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn next_token_distribution(&self, prefix: &[&str]) -> Result<Distribution, LmError> {
        (**self).next_token_distribution(prefix)
    }
    fn continuation_logprob(&self, prefix: &[&str], word: &str) -> Result<f64, LmError> {
        (**self).continuation_logprob(prefix, word)
    }
    fn next_token_entropy(&self, prefix: &[&str]) -> Result<f64, LmError> {
        (**self).next_token_entropy(prefix)
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for alloc::boxed::Box<T> {
    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn next_token_distribution(&self, prefix: &[&str]) -> Result<Distribution, LmError> {
        (**self).next_token_distribution(prefix)
    }
    fn continuation_logprob(&self, prefix: &[&str], word: &str) -> Result<f64, LmError> {
        (**self).continuation_logprob(prefix, word)
    }
    fn next_token_entropy(&self, prefix: &[&str]) -> Result<f64, LmError> {
        (**self).next_token_entropy(prefix)
    }
}

fn is_clitic(token: &str) -> bool {
    let lower = token.to_lowercase();
    matches!(
        lower.as_str(),
        "'s" | "'ve" | "'re" | "'ll" | "'d" | "'m" | "n't" | "’s" | "’ve" | "’re" | "’ll" | "’d"
            | "’m" | "n’t"
    )
}

fn attaches_left(token: &str) -> bool {
    is_clitic(token)
        || matches!(token, "." | "," | "?" | "!" | ":" | ";" | ")" | "]" | "}" | "..." | "%")
}

fn attaches_right(token: &str) -> bool {
    matches!(token, "(" | "[" | "{" | "$")
}

/// Joins tokens into running text, reattaching clitics and punctuation
/// ("I 've seen it ." becomes "I've seen it.").
pub fn detokenize(tokens: &[&str]) -> String {
    let mut out = String::new();
    let mut glue_next = true;
    for tok in tokens {
        if !glue_next && !attaches_left(tok) {
            out.push(' ');
        }
        out.push_str(tok);
        glue_next = attaches_right(tok);
    }
    out
}

/// Whether `word` should be preceded by a space when appended to text that
/// ends in a word.
pub fn needs_leading_space(word: &str) -> bool {
    !attaches_left(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64) -> bool {
        libm::fabs(a - b) < 1e-12
    }

    #[test]
    fn entropy_closed_forms() {
        assert!(close(entropy(&Distribution::uniform(4)), libm::log(4.0)));
        let one_hot = Distribution::new(vec![0, 1, 2], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(entropy(&one_hot), 0.0);
        let half = Distribution::new(vec![0, 1, 2, 3], vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(close(entropy(&half), libm::log(2.0)));
    }

    #[test]
    fn softmax_normalizes() {
        let d = Distribution::from_logits(vec![0, 1, 2], &[1000.0, 1000.0, -1000.0]).unwrap();
        assert!(close(d.probs[0], 0.5));
        assert!(d.is_normalized(1e-12));
        assert!(Distribution::from_logits(vec![0], &[f64::NAN]).is_err());
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(Distribution::new(vec![0, 1], vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![0, 1], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn log_add_exp_matches_direct() {
        let (a, b) = (libm::log(0.2), libm::log(0.05));
        assert!(close(log_add_exp(a, b), libm::log(0.25)));
        assert_eq!(log_add_exp(f64::NEG_INFINITY, a), a);
    }

    #[test]
    fn detokenize_reattaches() {
        assert_eq!(
            detokenize(&["Do", "you", "realize", "I", "'ve", "never", "seen", "him", "?"]),
            "Do you realize I've never seen him?"
        );
        assert_eq!(detokenize(&["they", "do", "n't", "(", "really", ")"]), "they don't (really)");
        assert_eq!(detokenize(&[]), "");
    }
}
