//! Stage files: the corpus, constructions.jsonl and features.csv.

use std::fs;
use std::path::Path;

use serde::Serialize;
use uidthat_core::{ConstructionRecord, CorpusLoad, FeatureRow};

use crate::error::{CliError, Result};

pub const CONSTRUCTIONS_FILE: &str = "constructions.jsonl";
pub const FEATURES_FILE: &str = "features.csv";
pub const FEATURES_META_FILE: &str = "features.meta.json";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Reads a JSON-lines corpus, keeping valid records and collecting a
/// diagnostic for every rejected line.
pub fn read_corpus(path: &Path) -> Result<CorpusLoad> {
    let text = read_text(path)?;
    Ok(uidthat_core::parse_corpus_lines(text.lines()))
}

pub fn constructions_to_jsonl(records: &[ConstructionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("construction serializes"));
        out.push('\n');
    }
    out
}

pub fn read_constructions(path: &Path) -> Result<Vec<ConstructionRecord>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::format(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn csv_bytes<T: Serialize>(header: &[&str], rows: &[T]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub const FEATURE_COLUMNS: [&str; 11] = [
    "sentence_id",
    "main_verb_index",
    "main_verb_lemma",
    "mc_length",
    "mc_verb_frequency",
    "sc_length",
    "sc_subject_distance",
    "sc_subject_missing",
    "sc_onset_surprisal",
    "sc_onset_entropy",
    "label",
];

pub fn features_csv(rows: &[FeatureRow]) -> Vec<u8> {
    csv_bytes(&FEATURE_COLUMNS, rows)
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::format(path, e))?.clone();
    if header.is_empty() {
        return Ok(Vec::new());
    }
    if header.iter().ne(FEATURE_COLUMNS) {
        return Err(CliError::format(
            path,
            format!("unexpected header; expected {}", FEATURE_COLUMNS.join(",")),
        ));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CliError::format(path, e)))
        .collect()
}
