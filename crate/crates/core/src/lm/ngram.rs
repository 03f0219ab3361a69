//! Word-level n-gram model with additive (add-k) smoothing, trained from the
//! corpus itself.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Distribution, LanguageModel, ProviderKind};
use crate::corpus::SentenceRecord;
use crate::error::LmError;

pub const UNK: &str = "<unk>";
pub const EOS: &str = "</s>";
/// Context padding symbol; never predicted, so it has no vocabulary id.
pub const BOS: &str = "<s>";

const UNK_ID: u32 = 0;
const EOS_ID: u32 = 1;
const BOS_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgramConfig {
    pub order: usize,
    pub smoothing_k: f64,
    /// Words seen fewer times than this map to `<unk>`.
    pub min_count: u64,
    pub lowercase: bool,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            order: 2,
            smoothing_k: 0.01,
            min_count: 2,
            lowercase: true,
        }
    }
}

/// Trained model. Ids: `0 = <unk>`, `1 = </s>`, then words in sorted order,
/// so the model does not depend on sentence order.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    config: NgramConfig,
    words: Vec<String>,
    ids: BTreeMap<String, u32>,
    counts: BTreeMap<Vec<u32>, BTreeMap<u32, u64>>,
    context_totals: BTreeMap<Vec<u32>, u64>,
}

impl NgramModel {
    /// Trains from token sequences.
    pub fn train<I, S, W>(sentences: I, config: NgramConfig) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        if config.order == 0 {
            return Err(LmError::Config("order must be at least 1".to_string()));
        }
        if !(config.smoothing_k >= 0.0) || !config.smoothing_k.is_finite() {
            return Err(LmError::Config(format!(
                "smoothing constant {} must be finite and non-negative",
                config.smoothing_k
            )));
        }
        let normalize = |w: &str| {
            if config.lowercase {
                w.to_lowercase()
            } else {
                w.to_string()
            }
        };
        let sentences: Vec<Vec<String>> = sentences
            .into_iter()
            .map(|s| s.into_iter().map(|w| normalize(w.as_ref())).collect())
            .collect();
        if sentences.is_empty() {
            return Err(LmError::EmptyCorpus);
        }

        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for w in sentences.iter().flatten() {
            *freq.entry(w.as_str()).or_default() += 1;
        }
        let mut words = alloc::vec![UNK.to_string(), EOS.to_string()];
        words.extend(
            freq.iter()
                .filter(|(w, c)| **c >= config.min_count && **w != UNK && **w != EOS)
                .map(|(w, _)| w.to_string()),
        );
        let ids: BTreeMap<String, u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();

        let mut model = NgramModel {
            config,
            words,
            ids,
            counts: BTreeMap::new(),
            context_totals: BTreeMap::new(),
        };
        let history = config.order - 1;
        for sentence in &sentences {
            let mut seq = alloc::vec![BOS_ID; history];
            seq.extend(sentence.iter().map(|w| model.id_of_normalized(w)));
            seq.push(EOS_ID);
            for window in seq.windows(config.order) {
                let (context, word) = window.split_at(history);
                *model
                    .counts
                    .entry(context.to_vec())
                    .or_default()
                    .entry(word[0])
                    .or_default() += 1;
                *model.context_totals.entry(context.to_vec()).or_default() += 1;
            }
        }
        Ok(model)
    }

    pub fn config(&self) -> NgramConfig {
        self.config
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.words
    }

    fn id_of_normalized(&self, w: &str) -> u32 {
        self.ids.get(w).copied().unwrap_or(UNK_ID)
    }

    /// Vocabulary id of a surface word (`<unk>` when out of vocabulary).
    pub fn word_id(&self, word: &str) -> u32 {
        if self.config.lowercase {
            self.id_of_normalized(&word.to_lowercase())
        } else {
            self.id_of_normalized(word)
        }
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    /// Raw count of `word` after `context` (both as ids).
    pub fn count(&self, context: &[u32], word: u32) -> u64 {
        self.counts
            .get(context)
            .and_then(|m| m.get(&word))
            .copied()
            .unwrap_or(0)
    }

    fn context_ids(&self, prefix: &[&str]) -> Vec<u32> {
        let history = self.config.order - 1;
        let mut ctx: Vec<u32> = prefix
            .iter()
            .rev()
            .take(history)
            .map(|w| self.word_id(w))
            .collect();
        ctx.resize(history, BOS_ID);
        ctx.reverse();
        ctx
    }

    fn distribution_for(&self, context: &[u32]) -> Distribution {
        let v = self.vocab_size();
        let k = self.config.smoothing_k;
        let total = self.context_totals.get(context).copied().unwrap_or(0);
        if total == 0 && k == 0.0 {
            let mut d = Distribution::uniform(v);
            d.uniform_fallback = true;
            return d;
        }
        let denom = total as f64 + k * v as f64;
        let row = self.counts.get(context);
        let probs = (0..v as u32)
            .map(|id| {
                let c = row.and_then(|m| m.get(&id)).copied().unwrap_or(0);
                (c as f64 + k) / denom
            })
            .collect();
        Distribution {
            vocab_ids: (0..v as u32).collect(),
            probs,
            uniform_fallback: false,
        }
    }

    /// `p(word | prefix)` as a plain probability.
    pub fn probability(&self, prefix: &[&str], word: &str) -> f64 {
        let ctx = self.context_ids(prefix);
        self.distribution_for(&ctx).probs[self.word_id(word) as usize]
    }
}

impl LanguageModel for NgramModel {
    fn kind(&self) -> ProviderKind {
        ProviderKind::Ngram
    }

    fn describe(&self) -> String {
        format!(
            "ngram(order={}, k={}, min_count={}, lowercase={}, vocab={})",
            self.config.order,
            self.config.smoothing_k,
            self.config.min_count,
            self.config.lowercase,
            self.vocab_size()
        )
    }

    fn next_token_distribution(&self, prefix: &[&str]) -> Result<Distribution, LmError> {
        Ok(self.distribution_for(&self.context_ids(prefix)))
    }

    fn continuation_logprob(&self, prefix: &[&str], word: &str) -> Result<f64, LmError> {
        if word.is_empty() {
            return Err(LmError::EmptyWord);
        }
        Ok(libm::log(self.probability(prefix, word)))
    }
}

/// Trains on the tokens of every record.
pub fn train_ngram(corpus: &[SentenceRecord], config: NgramConfig) -> Result<NgramModel, LmError> {
    NgramModel::train(corpus.iter().map(|r| r.tokens.iter()), config)
}
