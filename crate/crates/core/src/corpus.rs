//! Annotated sentence records and their structural validation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::tree::{parse_bracketed_tree, ParseTree};

/// One pre-parsed sentence. Tokens are clitic-split ("I", "'ve").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub lemmas: Vec<String>,
    pub pos: Vec<String>,
    /// 0-based head index; `-1` (or the token's own index) marks the root.
    pub dep_head: Vec<i64>,
    pub dep_rel: Vec<String>,
    pub parse: String,
}

impl SentenceRecord {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Head of token `i`, or `None` for the root.
    pub fn head(&self, i: usize) -> Option<usize> {
        let h = *self.dep_head.get(i)?;
        if h < 0 || h as usize == i {
            None
        } else {
            Some(h as usize)
        }
    }

    pub fn tree(&self) -> Result<ParseTree, crate::error::TreeError> {
        parse_bracketed_tree(&self.parse)
    }

    /// Number of tokens that are not pure punctuation.
    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| !is_punctuation(t)).count()
    }
}

/// True for tokens made only of punctuation characters ("?", "...", "--").
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_punctuation() || "…“”‘’«»–—¿¡".contains(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Record line is not a well-formed record object.
    Schema,
    EmptyRecord,
    LengthMismatch,
    HeadOutOfBounds,
    TreeSyntax,
    LeafCount,
    LeafMismatch,
}

/// One violated invariant of a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub record_id: Option<String>,
    /// 1-based line in the source stream, when known.
    pub line: Option<usize>,
    pub kind: DiagnosticKind,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(id) = &self.record_id {
            write!(f, "record {id:?}: ")?;
        }
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub fn validate_record(record: &SentenceRecord) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |kind, field, message: String| {
        out.push(Diagnostic {
            record_id: Some(record.id.clone()),
            line: None,
            kind,
            field,
            message,
        })
    };

    let n = record.tokens.len();
    if n == 0 {
        push(DiagnosticKind::EmptyRecord, "tokens", String::from("record has no tokens"));
    }
    let lengths: [(&'static str, usize); 4] = [
        ("lemmas", record.lemmas.len()),
        ("pos", record.pos.len()),
        ("dep_head", record.dep_head.len()),
        ("dep_rel", record.dep_rel.len()),
    ];
    for (field, len) in lengths {
        if len != n {
            push(
                DiagnosticKind::LengthMismatch,
                field,
                format!("has {len} entries but tokens has {n}"),
            );
        }
    }
    for (i, &h) in record.dep_head.iter().enumerate() {
        if h < -1 || h >= n as i64 {
            push(
                DiagnosticKind::HeadOutOfBounds,
                "dep_head",
                format!("head {h} of token {i} is outside 0..{n}"),
            );
        }
    }

    match record.tree() {
        Err(e) => push(DiagnosticKind::TreeSyntax, "parse", format!("{e}")),
        Ok(tree) => {
            let leaves = tree.leaves();
            if leaves.len() != n {
                push(
                    DiagnosticKind::LeafCount,
                    "parse",
                    format!("tree has {} leaves but tokens has {n}", leaves.len()),
                );
            } else if let Some((i, leaf)) = leaves
                .iter()
                .enumerate()
                .find(|(i, leaf)| leaf.word != record.tokens[*i])
            {
                push(
                    DiagnosticKind::LeafMismatch,
                    "parse",
                    format!("leaf {i} is {:?} but token is {:?}", leaf.word, record.tokens[i]),
                );
            }
        }
    }
    out
}

/// Result of reading a record stream: accepted records plus diagnostics for
/// every rejected line.
#[derive(Debug, Clone, Default)]
pub struct CorpusLoad {
    pub records: Vec<SentenceRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub skipped: usize,
}

/// Parses and validates line-delimited JSON records. Blank lines are ignored.
pub fn parse_corpus_lines<'a, I>(lines: I) -> CorpusLoad
where
    I: IntoIterator<Item = &'a str>,
{
    let mut load = CorpusLoad::default();
    for (i, line) in lines.into_iter().enumerate() {
        load.push_line(i + 1, line);
    }
    load
}

impl CorpusLoad {
    /// Feeds one source line (1-based `line_no`).
    pub fn push_line(&mut self, line_no: usize, line: &str) {
        if line.trim().is_empty() {
            return;
        }
        match serde_json::from_str::<SentenceRecord>(line) {
            Err(e) => {
                self.skipped += 1;
                self.diagnostics.push(Diagnostic {
                    record_id: None,
                    line: Some(line_no),
                    kind: DiagnosticKind::Schema,
                    field: "record",
                    message: format!("{e}"),
                });
            }
            Ok(record) => {
                let diags = validate_record(&record);
                if diags.is_empty() {
                    self.records.push(record);
                } else {
                    self.skipped += 1;
                    self.diagnostics.extend(diags.into_iter().map(|mut d| {
                        d.line = Some(line_no);
                        d
                    }));
                }
            }
        }
    }
}
