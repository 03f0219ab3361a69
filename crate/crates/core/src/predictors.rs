//! The six per-construction predictors of the omission model.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_punctuation, SentenceRecord};
use crate::error::FeatureError;
use crate::extraction::ConstructionRecord;
use crate::lm::{log_add_exp, LanguageModel};

/// Column keys of the feature table, in model order.
pub const PREDICTOR_KEYS: [&str; 6] = [
    "mc_length",
    "mc_verb_frequency",
    "sc_length",
    "sc_subject_distance",
    "sc_onset_surprisal",
    "sc_onset_entropy",
];

/// Human-readable predictor names used in regression summaries.
pub const PREDICTOR_NAMES: [&str; 6] = [
    "MC length (tokens)",
    "MC verb frequency",
    "SC length (tokens)",
    "SC subject distance",
    "SC onset surprisal",
    "SC onset entropy",
];

/// The complementizer inserted when marginalizing over its presence.
pub const COMPLEMENTIZER: &str = "that";

pub fn is_verbal_pos(tag: &str) -> bool {
    matches!(tag, "VERB" | "AUX") || tag.starts_with("VB")
}

/// Verb-lemma counts over the full corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    pub verb_lemma_counts: BTreeMap<String, u64>,
    pub total_verb_tokens: u64,
    pub total_sentences: usize,
    /// Lowercased surface-token counts, used for onset/subject frequency.
    pub token_counts: BTreeMap<String, u64>,
    pub total_tokens: u64,
}

impl CorpusStats {
    pub fn from_corpus<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = &'a SentenceRecord>,
    {
        let mut stats = CorpusStats::default();
        for r in records {
            stats.total_sentences += 1;
            for (i, tag) in r.pos.iter().enumerate() {
                if is_verbal_pos(tag) {
                    *stats
                        .verb_lemma_counts
                        .entry(r.lemmas[i].to_lowercase())
                        .or_default() += 1;
                    stats.total_verb_tokens += 1;
                }
            }
            for t in &r.tokens {
                *stats.token_counts.entry(t.to_lowercase()).or_default() += 1;
                stats.total_tokens += 1;
            }
        }
        stats
    }

    /// Occurrences of `lemma` as a verb over all verb tokens.
    pub fn verb_frequency(&self, lemma: &str) -> Option<f64> {
        let count = *self.verb_lemma_counts.get(&lemma.to_lowercase())?;
        (count > 0 && self.total_verb_tokens > 0)
            .then(|| count as f64 / self.total_verb_tokens as f64)
    }

    /// Relative frequency of a surface word among all tokens.
    pub fn token_frequency(&self, word: &str) -> f64 {
        if self.total_tokens == 0 {
            return 0.0;
        }
        let c = self.token_counts.get(&word.to_lowercase()).copied().unwrap_or(0);
        c as f64 / self.total_tokens as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralFeatures {
    pub mc_length: usize,
    pub sc_length: usize,
    pub main_verb_frequency: f64,
    pub sc_subject_distance: Option<usize>,
}

fn check_fits(c: &ConstructionRecord, s: &SentenceRecord) -> Result<(), FeatureError> {
    if c.sentence_id != s.id || !c.positions_consistent(s.len()) {
        return Err(FeatureError::InconsistentConstruction {
            sentence_id: c.sentence_id.clone(),
            main_verb_index: c.main_verb_index,
        });
    }
    Ok(())
}

pub fn compute_structural_features(
    c: &ConstructionRecord,
    s: &SentenceRecord,
    stats: &CorpusStats,
) -> Result<StructuralFeatures, FeatureError> {
    check_fits(c, s)?;
    let mc_length = s.tokens[..=c.main_verb_index]
        .iter()
        .filter(|t| !is_punctuation(t))
        .count();
    let main_verb_frequency = stats
        .verb_frequency(&c.main_verb_lemma)
        .ok_or_else(|| FeatureError::UnknownLemma(c.main_verb_lemma.clone()))?;
    Ok(StructuralFeatures {
        mc_length,
        sc_length: c.sc_end_index - c.sc_onset_index + 1,
        main_verb_frequency,
        sc_subject_distance: c.sc_subject_index.map(|i| i - c.sc_onset_index + 1),
    })
}

/// Main-clause prefix up to and including the main verb. The complementizer
/// is never part of it, so both labels are measured in the same context.
pub fn mc_prefix<'a>(c: &ConstructionRecord, s: &'a SentenceRecord) -> Vec<&'a str> {
    s.tokens[..=c.main_verb_index].iter().map(String::as_str).collect()
}

/// `-ln(p1 + p2)` for onset probabilities without and with the complementizer.
pub fn marginalized_surprisal(p1: f64, p2: f64) -> f64 {
    -libm::log(p1 + p2)
}

/// Onset surprisal with the presence of "that" marginalized out:
/// `-ln(p(onset | MC) + p(onset | MC "that"))`.
pub fn sc_onset_surprisal<M: LanguageModel + ?Sized>(
    provider: &M,
    c: &ConstructionRecord,
    s: &SentenceRecord,
) -> Result<f64, FeatureError> {
    check_fits(c, s)?;
    let mut prefix = mc_prefix(c, s);
    let onset = s.tokens[c.sc_onset_index].as_str();
    let without = provider.continuation_logprob(&prefix, onset)?;
    prefix.push(COMPLEMENTIZER);
    let with = provider.continuation_logprob(&prefix, onset)?;
    Ok(-log_add_exp(without, with))
}

/// Entropy of the next-token distribution after the main clause.
pub fn sc_onset_entropy<M: LanguageModel + ?Sized>(
    provider: &M,
    c: &ConstructionRecord,
    s: &SentenceRecord,
) -> Result<f64, FeatureError> {
    check_fits(c, s)?;
    Ok(provider.next_token_entropy(&mc_prefix(c, s))?)
}

/// One row of the design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub sentence_id: String,
    pub main_verb_index: usize,
    pub main_verb_lemma: String,
    pub mc_length: usize,
    pub mc_verb_frequency: f64,
    pub sc_length: usize,
    /// Imputed with the table mean when the clause has no subject.
    pub sc_subject_distance: f64,
    pub sc_subject_missing: bool,
    pub sc_onset_surprisal: f64,
    pub sc_onset_entropy: f64,
    /// 1 for EXPLICIT, 0 for IMPLICIT.
    pub label: u8,
}

impl FeatureRow {
    /// Predictor values in [`PREDICTOR_KEYS`] order.
    pub fn predictors(&self) -> [f64; 6] {
        [
            self.mc_length as f64,
            self.mc_verb_frequency,
            self.sc_length as f64,
            self.sc_subject_distance,
            self.sc_onset_surprisal,
            self.sc_onset_entropy,
        ]
    }
}

/// Computes a single row; the subject distance is left at 0 and flagged
/// when missing (see [`impute_subject_distance`]).
pub fn featurize_one<M: LanguageModel + ?Sized>(
    c: &ConstructionRecord,
    s: &SentenceRecord,
    stats: &CorpusStats,
    provider: &M,
) -> Result<FeatureRow, FeatureError> {
    let structural = compute_structural_features(c, s, stats)?;
    Ok(FeatureRow {
        sentence_id: c.sentence_id.clone(),
        main_verb_index: c.main_verb_index,
        main_verb_lemma: c.main_verb_lemma.clone(),
        mc_length: structural.mc_length,
        mc_verb_frequency: structural.main_verb_frequency,
        sc_length: structural.sc_length,
        sc_subject_distance: structural.sc_subject_distance.map_or(0.0, |d| d as f64),
        sc_subject_missing: structural.sc_subject_distance.is_none(),
        sc_onset_surprisal: sc_onset_surprisal(provider, c, s)?,
        sc_onset_entropy: sc_onset_entropy(provider, c, s)?,
        label: c.label.as_target(),
    })
}

/// Replaces flagged subject distances with the mean of the observed ones
/// (1 when none is observed).
pub fn impute_subject_distance(rows: &mut [FeatureRow]) {
    let observed: Vec<f64> = rows
        .iter()
        .filter(|r| !r.sc_subject_missing)
        .map(|r| r.sc_subject_distance)
        .collect();
    let fill = if observed.is_empty() {
        1.0
    } else {
        observed.iter().sum::<f64>() / observed.len() as f64
    };
    for r in rows.iter_mut().filter(|r| r.sc_subject_missing) {
        r.sc_subject_distance = fill;
    }
}

/// Pairs each construction with its sentence, sorted by
/// (sentence id, main verb index). Fails listing every dangling id.
pub fn join_constructions<'a>(
    constructions: &'a [ConstructionRecord],
    corpus: &'a [SentenceRecord],
) -> Result<Vec<(&'a ConstructionRecord, &'a SentenceRecord)>, FeatureError> {
    let by_id: BTreeMap<&str, &SentenceRecord> =
        corpus.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut missing: Vec<String> = constructions
        .iter()
        .filter(|c| !by_id.contains_key(c.sentence_id.as_str()))
        .map(|c| c.sentence_id.clone())
        .collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(FeatureError::DanglingReferences(missing));
    }
    let mut pairs: Vec<_> = constructions
        .iter()
        .map(|c| (c, by_id[c.sentence_id.as_str()]))
        .collect();
    pairs.sort_by(|a, b| {
        (a.0.sentence_id.as_str(), a.0.main_verb_index)
            .cmp(&(b.0.sentence_id.as_str(), b.0.main_verb_index))
    });
    Ok(pairs)
}

/// Builds the full feature table sequentially.
pub fn featurize<M: LanguageModel + ?Sized>(
    constructions: &[ConstructionRecord],
    corpus: &[SentenceRecord],
    stats: &CorpusStats,
    provider: &M,
) -> Result<Vec<FeatureRow>, FeatureError> {
    let mut rows = join_constructions(constructions, corpus)?
        .into_iter()
        .map(|(c, s)| featurize_one(c, s, stats, provider))
        .collect::<Result<Vec<_>, _>>()?;
    impute_subject_distance(&mut rows);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::record;
    use crate::extraction::{detect_constructions, Label};
    use crate::error::LmError;
    use crate::lm::{Distribution, ProviderKind};
    use alloc::string::ToString;
    use alloc::vec;

    fn realize(explicit: bool) -> SentenceRecord {
        let (tokens, parse): (Vec<&str>, &str) = if explicit {
            (
                vec!["Do", "you", "realize", "that", "I", "'ve", "never", "actually", "seen", "him", "at", "the", "office", "?"],
                "(SQ (VBP Do) (NP (PRP you)) (VP (VB realize) (SBAR (IN that) (S (NP (PRP I)) (VP (VBP 've) (ADVP (RB never)) (ADVP (RB actually)) (VP (VBN seen) (NP (PRP him)) (PP (IN at) (NP (DT the) (NN office)))))))) (. ?))",
            )
        } else {
            (
                vec!["Do", "you", "realize", "I", "'ve", "never", "actually", "seen", "him", "at", "the", "office", "?"],
                "(SQ (VBP Do) (NP (PRP you)) (VP (VB realize) (SBAR (S (NP (PRP I)) (VP (VBP 've) (ADVP (RB never)) (ADVP (RB actually)) (VP (VBN seen) (NP (PRP him)) (PP (IN at) (NP (DT the) (NN office)))))))) (. ?))",
            )
        };
        let mut r = record(&tokens, parse);
        r.pos = tokens
            .iter()
            .map(|t| match *t {
                "Do" | "'ve" => "AUX",
                "realize" | "seen" => "VERB",
                _ => "X",
            }.to_string())
            .collect();
        r
    }

    #[test]
    fn worked_example_lengths() {
        for explicit in [true, false] {
            let s = realize(explicit);
            let c = &detect_constructions(&s)[0];
            assert_eq!(c.label, if explicit { Label::Explicit } else { Label::Implicit });
            let stats = CorpusStats::from_corpus([&s]);
            let f = compute_structural_features(c, &s, &stats).unwrap();
            assert_eq!(f.mc_length, 3);
            assert_eq!(f.sc_length, 9);
            // four verb tokens: do, realize, 've, seen
            assert_eq!(f.main_verb_frequency, 0.25);
        }
    }

    #[test]
    fn unknown_lemma_is_an_error() {
        let s = realize(true);
        let c = &detect_constructions(&s)[0];
        let stats = CorpusStats::default();
        assert_eq!(
            compute_structural_features(c, &s, &stats),
            Err(FeatureError::UnknownLemma("realize".to_string()))
        );
    }

    #[test]
    fn closed_form_surprisal() {
        assert_eq!(marginalized_surprisal(0.5, 0.5), 0.0);
        assert!((marginalized_surprisal(0.2, 0.05) - 1.3862943611198906).abs() < 1e-12);
    }

    struct Uniform(usize);

    impl LanguageModel for Uniform {
        fn kind(&self) -> ProviderKind {
            ProviderKind::Ngram
        }
        fn describe(&self) -> String {
            "uniform".to_string()
        }
        fn next_token_distribution(&self, _: &[&str]) -> Result<Distribution, LmError> {
            Ok(Distribution::uniform(self.0))
        }
        fn continuation_logprob(&self, _: &[&str], _: &str) -> Result<f64, LmError> {
            Ok(-libm::log(self.0 as f64))
        }
    }

    #[test]
    fn uniform_provider_rows() {
        let s = realize(false);
        let cs = detect_constructions(&s);
        let stats = CorpusStats::from_corpus([&s]);
        let rows = featurize(&cs, core::slice::from_ref(&s), &stats, &Uniform(100)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].sc_onset_entropy - libm::log(100.0)).abs() < 1e-12);
        assert!((rows[0].sc_onset_surprisal + libm::log(2.0 / 100.0)).abs() < 1e-12);
    }

    #[test]
    fn dangling_reference_lists_ids() {
        let s = realize(false);
        let mut cs = detect_constructions(&s);
        cs[0].sentence_id = "missing".to_string();
        let stats = CorpusStats::from_corpus([&s]);
        assert_eq!(
            featurize(&cs, core::slice::from_ref(&s), &stats, &Uniform(3)),
            Err(FeatureError::DanglingReferences(vec!["missing".to_string()]))
        );
    }

    #[test]
    fn missing_subject_imputed_with_mean() {
        let base = FeatureRow {
            sentence_id: "a".to_string(),
            main_verb_index: 0,
            main_verb_lemma: "think".to_string(),
            mc_length: 1,
            mc_verb_frequency: 0.5,
            sc_length: 3,
            sc_subject_distance: 1.0,
            sc_subject_missing: false,
            sc_onset_surprisal: 1.0,
            sc_onset_entropy: 1.0,
            label: 0,
        };
        let mut rows = vec![
            base.clone(),
            FeatureRow { sc_subject_distance: 3.0, ..base.clone() },
            FeatureRow { sc_subject_distance: 0.0, sc_subject_missing: true, ..base },
        ];
        impute_subject_distance(&mut rows);
        assert_eq!(rows[2].sc_subject_distance, 2.0);
        assert!(rows[2].sc_subject_missing);
    }
}
