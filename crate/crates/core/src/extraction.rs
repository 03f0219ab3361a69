//! Detection of main-clause + subordinate-clause constructions joined by an
//! explicit or omitted complementizer "that".
//!
//! Detection works on the constituency tree. A main verb qualifies when it is
//! a verbal terminal under a VP whose very next constituent is a clause
//! starting at the following token:
//!
//! * `(VP (VBP agree) (SBAR (IN that) (S ...)))` is EXPLICIT,
//! * `(VP (VBZ thinks) (SBAR (S ...)))` or `(VP (VBZ thinks) (S ...))` is
//!   IMPLICIT, provided the clause is finite (subject NP before a tensed VP)
//!   and does not itself open with "that".
//!
//! Every occurrence of "that" is also given a syntactic role, checked in a
//! fixed order: relative pronoun, demonstrative determiner, demonstrative
//! pronoun, complementizer, other.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_punctuation, SentenceRecord};
use crate::tree::ParseTree;

pub const MIN_WORDS: usize = 5;
pub const MAX_WORDS: usize = 50;

/// Keeps sentences with 5 to 50 words inclusive, punctuation tokens excluded.
pub fn length_filter(record: &SentenceRecord) -> bool {
    (MIN_WORDS..=MAX_WORDS).contains(&record.word_count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ThatRole {
    Sconj,
    DemonstrativeDeterminer,
    DemonstrativePronoun,
    RelativePronoun,
    Other,
}

impl ThatRole {
    pub const ALL: [ThatRole; 5] = [
        ThatRole::Sconj,
        ThatRole::DemonstrativeDeterminer,
        ThatRole::DemonstrativePronoun,
        ThatRole::RelativePronoun,
        ThatRole::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ThatRole::Sconj => "SCONJ",
            ThatRole::DemonstrativeDeterminer => "DEMONSTRATIVE_DETERMINER",
            ThatRole::DemonstrativePronoun => "DEMONSTRATIVE_PRONOUN",
            ThatRole::RelativePronoun => "RELATIVE_PRONOUN",
            ThatRole::Other => "OTHER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThatUsage {
    pub token_index: usize,
    pub role: ThatRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Explicit,
    Implicit,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Explicit => "EXPLICIT",
            Label::Implicit => "IMPLICIT",
        }
    }

    /// Regression target: 1 when "that" is spelled out.
    pub fn as_target(self) -> u8 {
        match self {
            Label::Explicit => 1,
            Label::Implicit => 0,
        }
    }
}

/// One detected main clause + subordinate clause pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub sentence_id: String,
    pub label: Label,
    pub main_verb_index: usize,
    pub main_verb_lemma: String,
    /// Position of the complementizer; EXPLICIT only.
    pub sconj_index: Option<usize>,
    /// First word of the subordinate clause, "that" excluded.
    pub sc_onset_index: usize,
    /// Last subordinate-clause token, trailing punctuation excluded.
    pub sc_end_index: usize,
    pub sc_subject_index: Option<usize>,
    /// Word count of the source sentence (punctuation excluded).
    pub sentence_length: usize,
}

impl ConstructionRecord {
    /// Checks the positional invariants against a sentence of `len` tokens.
    pub fn positions_consistent(&self, len: usize) -> bool {
        let adjacency = match (self.label, self.sconj_index) {
            (Label::Explicit, Some(s)) => {
                s == self.main_verb_index + 1 && self.sc_onset_index == s + 1
            }
            (Label::Implicit, None) => self.sc_onset_index == self.main_verb_index + 1,
            _ => false,
        };
        let subject = self
            .sc_subject_index
            .is_none_or(|s| (self.sc_onset_index..=self.sc_end_index).contains(&s));
        adjacency
            && self.main_verb_index < self.sc_onset_index
            && self.sc_onset_index <= self.sc_end_index
            && self.sc_end_index < len
            && subject
    }
}

fn base_label(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    label.split(['-', '=']).next().unwrap_or(label)
}

fn is_that(word: &str) -> bool {
    word.eq_ignore_ascii_case("that")
}

fn is_verb_tag(tag: &str) -> bool {
    matches!(tag, "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ")
}

fn is_clause_label(label: &str) -> bool {
    matches!(base_label(label), "S" | "SINV" | "SQ")
}

fn is_nominal_label(label: &str) -> bool {
    let base = base_label(label);
    base.starts_with("NN")
        || matches!(base, "NP" | "NML" | "NX" | "JJ" | "JJR" | "JJS" | "ADJP" | "CD" | "QP" | "PRP$")
}

/// A VP is tensed when its head verb is finite or a modal.
fn vp_is_finite(vp: &ParseTree) -> bool {
    for child in &vp.children {
        if child.is_terminal() {
            match child.label.as_str() {
                "VBD" | "VBZ" | "VBP" | "MD" => return true,
                tag if tag.starts_with("VB") || tag == "TO" => return false,
                _ => continue,
            }
        } else if base_label(&child.label) == "VP" {
            return vp_is_finite(child);
        }
    }
    false
}

/// A clause with an overt subject NP followed by a tensed VP.
fn is_finite_clause(clause: &ParseTree) -> bool {
    if !is_clause_label(&clause.label) {
        return false;
    }
    let Some(subject) = clause
        .children
        .iter()
        .position(|c| base_label(&c.label) == "NP")
    else {
        return false;
    };
    clause.children[subject + 1..]
        .iter()
        .any(|c| base_label(&c.label) == "VP" && vp_is_finite(c))
}

fn role_in_path(path: &[&ParseTree]) -> ThatRole {
    let n = path.len();
    let Some(terminal) = path.last() else {
        return ThatRole::Other;
    };
    let Some(leaf) = &terminal.leaf else {
        return ThatRole::Other;
    };
    let parent = if n >= 2 { Some(path[n - 2]) } else { None };

    // relative pronoun: under a WH phrase, or opening an SBAR attached to an NP
    if parent.is_some_and(|p| base_label(&p.label).starts_with("WH")) {
        return ThatRole::RelativePronoun;
    }
    for k in (1..n.saturating_sub(1)).rev() {
        let node = path[k];
        if base_label(&node.label) == "SBAR"
            && node.first_leaf().map(|l| l.index) == Some(leaf.index)
            && base_label(&path[k - 1].label) == "NP"
        {
            return ThatRole::RelativePronoun;
        }
    }

    if let Some(parent) = parent {
        let pos = parent
            .children
            .iter()
            .position(|c| core::ptr::eq(c, *terminal))
            .unwrap_or(0);
        let parent_base = base_label(&parent.label);
        if parent_base == "NP" {
            let nominal_follows = parent.children[pos + 1..]
                .iter()
                .any(|c| is_nominal_label(&c.label));
            if matches!(terminal.label.as_str(), "DT" | "DET") && nominal_follows {
                return ThatRole::DemonstrativeDeterminer;
            }
            return ThatRole::DemonstrativePronoun;
        }
        if parent_base == "SBAR"
            && !terminal.label.starts_with('W')
            && parent
                .children
                .get(pos + 1)
                .is_some_and(|next| is_clause_label(&next.label))
        {
            return ThatRole::Sconj;
        }
    }
    ThatRole::Other
}

/// Roles of every "that" in the sentence, in token order.
pub fn classify_in_tree(record: &SentenceRecord, tree: &ParseTree) -> Vec<ThatUsage> {
    record
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| is_that(t))
        .map(|(i, _)| ThatUsage {
            token_index: i,
            role: tree
                .path_to_leaf(i)
                .map_or(ThatRole::Other, |path| role_in_path(&path)),
        })
        .collect()
}

/// Roles of every "that"; an unparseable tree yields OTHER for each.
pub fn classify_that_usages(record: &SentenceRecord) -> Vec<ThatUsage> {
    match record.tree() {
        Ok(tree) => classify_in_tree(record, &tree),
        Err(_) => record
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| is_that(t))
            .map(|(i, _)| ThatUsage {
                token_index: i,
                role: ThatRole::Other,
            })
            .collect(),
    }
}

fn sc_end(record: &SentenceRecord, onset: usize, last: usize) -> usize {
    let mut end = last;
    while end > onset && is_punctuation(&record.tokens[end]) {
        end -= 1;
    }
    end
}

fn sc_subject(record: &SentenceRecord, onset: usize, end: usize) -> Option<usize> {
    let span = onset..=end;
    span.clone().find(|&i| {
        record.dep_rel[i].starts_with("nsubj")
            && record.head(i).is_some_and(|h| span.contains(&h))
    })
}

/// All constructions in the sentence, ordered by main verb position.
///
/// Assumes a validated record; the length filter is applied separately.
pub fn detect_in_tree(record: &SentenceRecord, tree: &ParseTree) -> Vec<ConstructionRecord> {
    let usages = classify_in_tree(record, tree);
    let role_of = |i: usize| {
        usages
            .iter()
            .find(|u| u.token_index == i)
            .map(|u| u.role)
    };

    let mut found = Vec::new();
    tree.walk(&mut |node, parent, pos| {
        let (Some(verb), Some(parent)) = (&node.leaf, parent) else {
            return;
        };
        if !is_verb_tag(&node.label) || base_label(&parent.label) != "VP" {
            return;
        }
        let Some(clause) = parent.children.get(pos + 1) else {
            return;
        };
        let (Some(first), Some(last)) = (clause.first_leaf(), clause.last_leaf()) else {
            return;
        };
        if first.index != verb.index + 1 {
            return;
        }

        let (label, sconj, onset) = match base_label(&clause.label) {
            "SBAR" => {
                let head = &clause.children[0];
                if head.is_terminal() && is_that(&first.word) {
                    if role_of(first.index) != Some(ThatRole::Sconj) {
                        return;
                    }
                    (Label::Explicit, Some(first.index), first.index + 1)
                } else if is_finite_clause(head) && !is_that(&first.word) {
                    (Label::Implicit, None, first.index)
                } else {
                    return;
                }
            }
            _ if is_finite_clause(clause) && !is_that(&first.word) => {
                (Label::Implicit, None, first.index)
            }
            _ => return,
        };
        if onset > last.index {
            return;
        }
        let end = sc_end(record, onset, last.index);
        found.push(ConstructionRecord {
            sentence_id: record.id.clone(),
            label,
            main_verb_index: verb.index,
            main_verb_lemma: record.lemmas[verb.index].clone(),
            sconj_index: sconj,
            sc_onset_index: onset,
            sc_end_index: end,
            sc_subject_index: sc_subject(record, onset, end),
            sentence_length: record.word_count(),
        });
    });
    found.sort_by_key(|c| c.main_verb_index);
    found
}

/// Parses the record's tree and detects constructions; empty if the tree is
/// malformed.
pub fn detect_constructions(record: &SentenceRecord) -> Vec<ConstructionRecord> {
    record
        .tree()
        .map(|tree| detect_in_tree(record, &tree))
        .unwrap_or_default()
}

/// Per-sentence extraction outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceExtraction {
    pub passes_filter: bool,
    pub usages: Vec<ThatUsage>,
    pub constructions: Vec<ConstructionRecord>,
}

/// Length filter, role classification and detection for one sentence.
pub fn extract_sentence(record: &SentenceRecord) -> SentenceExtraction {
    let passes_filter = length_filter(record);
    let tree = record.tree().ok();
    let usages = match &tree {
        Some(tree) => classify_in_tree(record, tree),
        None => classify_that_usages(record),
    };
    let constructions = match (&tree, passes_filter) {
        (Some(tree), true) => detect_in_tree(record, tree),
        _ => Vec::new(),
    };
    SentenceExtraction {
        passes_filter,
        usages,
        constructions,
    }
}

/// Counts in the shape of the dataset table: constructions per label,
/// "that" occurrences per role, and sentences whose only "that"s are
/// non-complementizer uses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtractionSummary {
    pub sentences: usize,
    pub filtered_out: usize,
    pub explicit: usize,
    pub explicit_length_sum: usize,
    pub implicit: usize,
    pub implicit_length_sum: usize,
    pub other_that_sentences: usize,
    pub other_that_length_sum: usize,
    /// Indexed like [`ThatRole::ALL`].
    pub role_counts: [usize; 5],
}

impl ExtractionSummary {
    pub fn add(&mut self, record: &SentenceRecord, result: &SentenceExtraction) {
        self.sentences += 1;
        if !result.passes_filter {
            self.filtered_out += 1;
            return;
        }
        let len = record.word_count();
        for c in &result.constructions {
            match c.label {
                Label::Explicit => {
                    self.explicit += 1;
                    self.explicit_length_sum += len;
                }
                Label::Implicit => {
                    self.implicit += 1;
                    self.implicit_length_sum += len;
                }
            }
        }
        for u in &result.usages {
            let slot = ThatRole::ALL.iter().position(|r| *r == u.role).unwrap_or(4);
            self.role_counts[slot] += 1;
        }
        if !result.usages.is_empty() && result.constructions.is_empty() {
            self.other_that_sentences += 1;
            self.other_that_length_sum += len;
        }
    }

    fn mean(sum: usize, count: usize) -> Option<f64> {
        (count > 0).then(|| sum as f64 / count as f64)
    }

    pub fn explicit_mean_length(&self) -> Option<f64> {
        Self::mean(self.explicit_length_sum, self.explicit)
    }

    pub fn implicit_mean_length(&self) -> Option<f64> {
        Self::mean(self.implicit_length_sum, self.implicit)
    }

    pub fn other_mean_length(&self) -> Option<f64> {
        Self::mean(self.other_that_length_sum, self.other_that_sentences)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::record;
    use alloc::string::ToString;
    use alloc::vec;

    fn words(n: usize) -> SentenceRecord {
        let toks: Vec<String> = (0..n).map(|i| alloc::format!("w{i}")).collect();
        let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
        let mut parse = String::from("(S");
        for t in &toks {
            parse.push_str(&alloc::format!(" (NN {t})"));
        }
        parse.push_str(" (. .))");
        let mut all = refs.clone();
        all.push(".");
        record(&all, &parse)
    }

    #[test]
    fn length_bounds() {
        assert!(!length_filter(&words(4)));
        assert!(length_filter(&words(5)));
        assert!(length_filter(&words(50)));
        assert!(!length_filter(&words(51)));
    }

    #[test]
    fn determiner_pronoun_relative() {
        let det = record(
            &["I", "have", "never", "been", "to", "that", "part", "of", "the", "city"],
            "(S (NP (PRP I)) (VP (VBP have) (ADVP (RB never)) (VP (VBN been) (PP (IN to) (NP (NP (DT that) (NN part)) (PP (IN of) (NP (DT the) (NN city))))))))",
        );
        assert_eq!(
            classify_that_usages(&det),
            vec![ThatUsage { token_index: 5, role: ThatRole::DemonstrativeDeterminer }]
        );

        let pron = record(
            &["that", "is", "a", "beautiful", "view"],
            "(S (NP (DT that)) (VP (VBZ is) (NP (DT a) (JJ beautiful) (NN view))))",
        );
        assert_eq!(classify_that_usages(&pron)[0].role, ThatRole::DemonstrativePronoun);

        let rel = record(
            &["Ann", "is", "on", "the", "team", "that", "lost", "."],
            "(S (NP (NNP Ann)) (VP (VBZ is) (PP (IN on) (NP (NP (DT the) (NN team)) (SBAR (WHNP (WDT that)) (S (VP (VBD lost))))))) (. .))",
        );
        assert_eq!(classify_that_usages(&rel)[0].role, ThatRole::RelativePronoun);
        assert!(detect_constructions(&rel).is_empty());
    }

    #[test]
    fn relative_without_wh_node() {
        let rel = record(
            &["the", "book", "that", "I", "read", "was", "sad"],
            "(S (NP (NP (DT the) (NN book)) (SBAR (IN that) (S (NP (PRP I)) (VP (VBD read))))) (VP (VBD was) (ADJP (JJ sad))))",
        );
        assert_eq!(classify_that_usages(&rel)[0].role, ThatRole::RelativePronoun);
        assert!(detect_constructions(&rel).is_empty());
    }

    #[test]
    fn adverbial_that_is_other() {
        let r = record(
            &["it", "is", "not", "that", "bad"],
            "(S (NP (PRP it)) (VP (VBZ is) (RB not) (ADJP (RB that) (JJ bad))))",
        );
        assert_eq!(classify_that_usages(&r)[0].role, ThatRole::Other);
    }

    fn explicit_agree() -> SentenceRecord {
        let mut r = record(
            &["do", "you", "agree", "that", "his", "suggestion", "sounds", "better", "?"],
            "(SQ (VBP do) (NP (PRP you)) (VP (VB agree) (SBAR (IN that) (S (NP (PRP$ his) (NN suggestion)) (VP (VBZ sounds) (ADJP (JJR better)))))) (. ?))",
        );
        r.dep_head = vec![2, 2, -1, 6, 5, 6, 2, 6, 2];
        r.dep_rel = ["aux", "nsubj", "ROOT", "mark", "poss", "nsubj", "ccomp", "acomp", "punct"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        r
    }

    #[test]
    fn explicit_construction() {
        let r = explicit_agree();
        let found = detect_constructions(&r);
        assert_eq!(found.len(), 1);
        let c = &found[0];
        assert_eq!(c.label, Label::Explicit);
        assert_eq!(c.main_verb_lemma, "agree");
        assert_eq!(c.sconj_index, Some(3));
        assert_eq!(r.tokens[c.sc_onset_index], "his");
        assert_eq!(c.sc_end_index, 7);
        assert_eq!(c.sc_subject_index, Some(5));
        assert!(c.positions_consistent(r.len()));
        assert_eq!(classify_that_usages(&r)[0].role, ThatRole::Sconj);
    }

    #[test]
    fn missing_subject_still_emitted() {
        let mut r = explicit_agree();
        r.dep_rel[5] = "dobj".to_string();
        let found = detect_constructions(&r);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].sc_subject_index, None);
    }

    #[test]
    fn infinitival_complement_is_not_a_clause() {
        let r = record(
            &["I", "want", "to", "go", "home", "."],
            "(S (NP (PRP I)) (VP (VBP want) (S (VP (TO to) (VP (VB go) (ADVP (RB home)))))) (. .))",
        );
        assert!(detect_constructions(&r).is_empty());
    }

    #[test]
    fn clause_opening_with_that_pronoun_is_skipped() {
        let r = record(
            &["I", "guess", "that", "'s", "fine", "."],
            "(S (NP (PRP I)) (VP (VBP guess) (SBAR (S (NP (DT that)) (VP (VBZ 's) (ADJP (JJ fine)))))) (. .))",
        );
        assert!(detect_constructions(&r).is_empty());
        assert_eq!(classify_that_usages(&r)[0].role, ThatRole::DemonstrativePronoun);
    }

    #[test]
    fn bare_s_complement_is_implicit() {
        let r = record(
            &["we", "all", "know", "he", "lied", "to", "us"],
            "(S (NP (PRP we) (DT all)) (VP (VBP know) (S (NP (PRP he)) (VP (VBD lied) (PP (TO to) (NP (PRP us)))))))",
        );
        let found = detect_constructions(&r);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].label, Label::Implicit);
        assert_eq!(found[0].sc_onset_index, 3);
        assert_eq!(found[0].sc_end_index, 6);
    }

    #[test]
    fn summary_counts() {
        let r = explicit_agree();
        let mut s = ExtractionSummary::default();
        s.add(&r, &extract_sentence(&r));
        assert_eq!(s.explicit, 1);
        assert_eq!(s.explicit_mean_length(), Some(8.0));
        assert_eq!(s.implicit_mean_length(), None);
        assert_eq!(s.role_counts[0], 1);
    }
}
