//! The five stages. Each reads its inputs from files, validates them, and
//! only then writes its outputs into the output directory.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use uidthat_core::analysis::{
    annotation_sample, dataset_summary, default_grid, kde, lemma_distribution, pearson_r,
    scott_bandwidth,
};
use uidthat_core::extraction::{extract_sentence, ExtractionSummary};
use uidthat_core::lm::train_ngram;
use uidthat_core::predictors::{
    featurize_one, impute_subject_distance, join_constructions, PREDICTOR_KEYS, PREDICTOR_NAMES,
};
use uidthat_core::regression::{analyze, Dataset, FitConfig, RegressionSummary};
use uidthat_core::{
    ConstructionRecord, CorpusStats, FeatureRow, Label, LanguageModel, LmError, SentenceRecord,
    ThatRole,
};

use crate::config::{PipelineConfig, ProviderKindConfig, ALL_LEMMAS};
use crate::error::{CliError, Result};
use crate::io::{self, CONSTRUCTIONS_FILE, FEATURES_FILE, FEATURES_META_FILE};
use crate::sidecar::ExternalProvider;

pub const EXTRACTION_SUMMARY_FILE: &str = "extraction_summary.csv";
pub const THAT_ROLES_FILE: &str = "that_roles.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const REGRESSION_JSON_FILE: &str = "regression.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const LEMMAS_FILE: &str = "lemmas.csv";
pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const SAMPLE_FILE: &str = "annotation_sample.csv";

fn out(config: &PipelineConfig, name: &str) -> PathBuf {
    config.output_dir.join(name)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn load_corpus(config: &PipelineConfig) -> Result<(Vec<SentenceRecord>, String)> {
    let path = config.corpus_path()?;
    let text = io::read_text(path)?;
    let load = uidthat_core::parse_corpus_lines(text.lines());
    if load.skipped > 0 {
        log::warn!("{}: skipped {} invalid record(s)", path.display(), load.skipped);
    }
    for d in &load.diagnostics {
        log::debug!("{}: {d}", path.display());
    }
    Ok((load.records, sha256_hex(text.as_bytes())))
}

// ---------------------------------------------------------------- extract

#[derive(Serialize)]
struct TypeCount<'a> {
    sentence_type: &'a str,
    count: usize,
    mean_length: Option<f64>,
}

#[derive(Serialize)]
struct DiagnosticRow<'a> {
    line: Option<usize>,
    record_id: Option<&'a str>,
    kind: String,
    field: &'a str,
    message: &'a str,
}

pub struct ExtractOutcome {
    pub summary: ExtractionSummary,
    pub constructions: Vec<ConstructionRecord>,
    pub skipped: usize,
}

pub fn cmd_extract(config: &PipelineConfig) -> Result<ExtractOutcome> {
    let path = config.corpus_path()?;
    let text = io::read_text(path)?;
    let load = uidthat_core::parse_corpus_lines(text.lines());
    for d in &load.diagnostics {
        log::warn!("{}: {d}", path.display());
    }

    let mut summary = ExtractionSummary::default();
    let mut constructions = Vec::new();
    for record in &load.records {
        let result = extract_sentence(record);
        summary.add(record, &result);
        constructions.extend(result.constructions);
    }
    if constructions.is_empty() {
        log::warn!("no constructions found in {}", path.display());
    }

    let types = [
        TypeCount {
            sentence_type: Label::Explicit.as_str(),
            count: summary.explicit,
            mean_length: summary.explicit_mean_length(),
        },
        TypeCount {
            sentence_type: Label::Implicit.as_str(),
            count: summary.implicit,
            mean_length: summary.implicit_mean_length(),
        },
        TypeCount {
            sentence_type: "OTHER_THAT",
            count: summary.other_that_sentences,
            mean_length: summary.other_mean_length(),
        },
        TypeCount {
            sentence_type: "FILTERED_OUT",
            count: summary.filtered_out,
            mean_length: None,
        },
    ];
    let roles: Vec<(&str, usize)> = ThatRole::ALL
        .iter()
        .zip(summary.role_counts)
        .map(|(r, n)| (r.as_str(), n))
        .collect();
    let diagnostics: Vec<DiagnosticRow> = load
        .diagnostics
        .iter()
        .map(|d| DiagnosticRow {
            line: d.line,
            record_id: d.record_id.as_deref(),
            kind: format!("{:?}", d.kind),
            field: d.field,
            message: &d.message,
        })
        .collect();

    io::write_atomic(&out(config, CONSTRUCTIONS_FILE), io::constructions_to_jsonl(&constructions).as_bytes())?;
    io::write_atomic(
        &out(config, EXTRACTION_SUMMARY_FILE),
        &io::csv_bytes(&["sentence_type", "count", "mean_length"], &types),
    )?;
    io::write_atomic(&out(config, THAT_ROLES_FILE), &io::csv_bytes(&["role", "count"], &roles))?;
    io::write_atomic(
        &out(config, DIAGNOSTICS_FILE),
        &io::csv_bytes(&["line", "record_id", "kind", "field", "message"], &diagnostics),
    )?;
    log::info!(
        "{} sentences, {} filtered, {} explicit, {} implicit",
        summary.sentences,
        summary.filtered_out,
        summary.explicit,
        summary.implicit
    );
    Ok(ExtractOutcome {
        summary,
        constructions,
        skipped: load.skipped,
    })
}

// ---------------------------------------------------------------- featurize

type Provider = Box<dyn LanguageModel + Send + Sync>;

fn build_provider(config: &PipelineConfig, corpus: &[SentenceRecord]) -> Result<(Provider, serde_json::Value)> {
    match config.provider.kind {
        ProviderKindConfig::Ngram => {
            let model = train_ngram(corpus, config.ngram.to_core()).map_err(|e| match e {
                LmError::EmptyCorpus => CliError::Data("corpus has no valid records to train on".into()),
                LmError::Config(m) => CliError::config("ngram", m),
                other => other.into(),
            })?;
            let meta = json!({
                "kind": "ngram",
                "description": model.describe(),
                "order": config.ngram.order,
                "smoothing_k": config.ngram.smoothing_k,
                "min_count": config.ngram.min_count,
                "lowercase": config.ngram.lowercase,
                "vocab_size": model.vocab_size(),
            });
            Ok((Box::new(model), meta))
        }
        ProviderKindConfig::External => {
            let provider = ExternalProvider::connect(&config.provider)?;
            let meta = json!({
                "kind": "external",
                "description": provider.describe(),
                "model": provider.model(),
                "protocol_version": crate::sidecar::PROTOCOL_VERSION,
            });
            Ok((Box::new(provider), meta))
        }
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::config("jobs", e))
}

pub fn cmd_featurize(config: &PipelineConfig) -> Result<Vec<FeatureRow>> {
    let (corpus, corpus_sha) = load_corpus(config)?;
    let constructions_path = out(config, CONSTRUCTIONS_FILE);
    let constructions_text = io::read_text(&constructions_path)?;
    let mut constructions = io::read_constructions(&constructions_path)?;
    if let Some(lemma) = &config.features.lemma_filter {
        constructions.retain(|c| c.main_verb_lemma.eq_ignore_ascii_case(lemma));
        log::info!("lemma filter {lemma:?}: {} construction(s) kept", constructions.len());
    }
    let pairs = join_constructions(&constructions, &corpus)?;
    let stats = CorpusStats::from_corpus(&corpus);
    let (provider, provider_meta) = build_provider(config, &corpus)?;

    let pool = thread_pool(config.jobs)?;
    let mut rows = pool.install(|| {
        pairs
            .par_iter()
            .map(|(c, s)| featurize_one(c, s, &stats, &provider))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    let missing_subjects = rows.iter().filter(|r| r.sc_subject_missing).count();
    impute_subject_distance(&mut rows);
    if rows.is_empty() {
        log::warn!("feature table is empty");
    }

    let meta = json!({
        "provider": provider_meta,
        "config_sha256": config.digest(),
        "corpus_sha256": corpus_sha,
        "constructions_sha256": sha256_hex(constructions_text.as_bytes()),
        "lemma_filter": config.features.lemma_filter,
        "rows": rows.len(),
        "imputed_subject_distances": missing_subjects,
    });
    io::write_atomic(&out(config, FEATURES_FILE), &io::features_csv(&rows))?;
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    meta_text.push('\n');
    io::write_atomic(&out(config, FEATURES_META_FILE), meta_text.as_bytes())?;
    log::info!("{} feature rows via {}", rows.len(), provider.describe());
    Ok(rows)
}

// ---------------------------------------------------------------- fit

pub struct ScenarioFit {
    pub scenario: String,
    pub keys: Vec<&'static str>,
    pub summary: RegressionSummary,
    pub converged: bool,
    pub iterations: usize,
}

/// Builds the design table for one scenario. A single-lemma scenario has a
/// constant verb frequency, so that column is dropped there.
pub fn scenario_dataset(
    rows: &[FeatureRow],
    scenario: &str,
    log_frequency: bool,
) -> Result<(Dataset, Vec<&'static str>)> {
    let all = scenario == ALL_LEMMAS;
    let selected: Vec<&FeatureRow> = rows
        .iter()
        .filter(|r| all || r.main_verb_lemma.eq_ignore_ascii_case(scenario))
        .collect();
    if selected.is_empty() {
        return Err(CliError::Data(format!("scenario {scenario:?} has no feature rows")));
    }
    let keep: Vec<usize> = (0..PREDICTOR_KEYS.len())
        .filter(|&j| all || PREDICTOR_KEYS[j] != "mc_verb_frequency")
        .collect();
    let freq = PREDICTOR_KEYS.iter().position(|k| *k == "mc_verb_frequency");
    let table: Vec<Vec<f64>> = selected
        .iter()
        .map(|r| {
            let mut p = r.predictors();
            if let (true, Some(j)) = (log_frequency, freq) {
                p[j] = p[j].ln();
            }
            keep.iter().map(|&j| p[j]).collect()
        })
        .collect();
    let names = keep.iter().map(|&j| PREDICTOR_NAMES[j].to_string()).collect();
    let labels = selected.iter().map(|r| r.label).collect();
    let data = Dataset::new(names, table, labels)?;
    Ok((data, keep.iter().map(|&j| PREDICTOR_KEYS[j]).collect()))
}

fn file_stem(scenario: &str) -> String {
    scenario
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

pub fn cmd_fit(config: &PipelineConfig) -> Result<Vec<ScenarioFit>> {
    let rows = io::read_features(&out(config, FEATURES_FILE))?;
    if rows.is_empty() {
        return Err(CliError::Data("feature table is empty".into()));
    }
    let fit_config = FitConfig {
        tolerance: config.fit.tolerance,
        max_iter: config.fit.max_iter,
        ridge: config.fit.ridge,
    };

    let mut fits = Vec::new();
    for scenario in &config.fit.scenarios {
        let (data, keys) = scenario_dataset(&rows, scenario, config.fit.log_frequency)?;
        let (summary, fit) = analyze(&data, fit_config, config.fit.cv_folds, config.seed)
            .map_err(|e| CliError::Data(format!("scenario {scenario:?}: {e}")))?;
        fits.push(ScenarioFit {
            scenario: scenario.clone(),
            keys,
            summary,
            converged: fit.converged,
            iterations: fit.iterations,
        });
    }

    let mut json_fits = Vec::new();
    for f in &fits {
        let text = format!("scenario: {}\n{}", f.scenario, f.summary);
        println!("{text}");
        io::write_atomic(
            &out(config, &format!("regression_{}.txt", file_stem(&f.scenario))),
            text.as_bytes(),
        )?;
        let coefficients: Vec<_> = f
            .summary
            .rows
            .iter()
            .zip(std::iter::once("const").chain(f.keys.iter().copied()))
            .map(|(r, key)| {
                json!({
                    "predictor": key,
                    "label": r.name,
                    "beta": r.beta,
                    "std_error": r.std_error,
                    "z": r.z,
                    "ci_low": r.ci_low,
                    "ci_high": r.ci_high,
                    "p_value": r.p_value,
                    "stars": r.stars(),
                })
            })
            .collect();
        json_fits.push(json!({
            "scenario": f.scenario,
            "n": f.summary.n,
            "log_likelihood": f.summary.log_likelihood,
            "accuracy": f.summary.accuracy,
            "cv_accuracy": f.summary.cv_accuracy,
            "cv_folds": f.summary.cv_folds,
            "converged": f.converged,
            "iterations": f.iterations,
            "log_frequency": config.fit.log_frequency,
            "ridge": config.fit.ridge,
            "coefficients": coefficients,
        }));
    }
    let mut text = serde_json::to_string_pretty(&json!({ "scenarios": json_fits })).expect("serializes");
    text.push('\n');
    io::write_atomic(&out(config, REGRESSION_JSON_FILE), text.as_bytes())?;
    Ok(fits)
}

// ---------------------------------------------------------------- report

#[derive(Serialize)]
struct LemmaRow<'a> {
    rank: usize,
    lemma: &'a str,
    count: usize,
    explicit: usize,
    implicit: usize,
    share: f64,
    cumulative_share: f64,
}

#[derive(Serialize)]
struct CorrelationRow {
    x: String,
    y: String,
    n: usize,
    pearson_r: Option<f64>,
}

#[derive(Serialize)]
struct SampleRow<'a> {
    sentence_id: &'a str,
    label: &'a str,
    main_verb_lemma: &'a str,
    main_verb_index: usize,
    sc_onset_index: usize,
    sentence: String,
}

fn sample_rows<'a>(
    sample: &'a [ConstructionRecord],
    corpus: &'a BTreeMap<&str, &SentenceRecord>,
) -> Vec<SampleRow<'a>> {
    sample
        .iter()
        .map(|c| SampleRow {
            sentence_id: &c.sentence_id,
            label: c.label.as_str(),
            main_verb_lemma: &c.main_verb_lemma,
            main_verb_index: c.main_verb_index,
            sc_onset_index: c.sc_onset_index,
            sentence: corpus
                .get(c.sentence_id.as_str())
                .map(|s| s.tokens.join(" "))
                .unwrap_or_default(),
        })
        .collect()
}

fn write_sample(config: &PipelineConfig, sample: &[ConstructionRecord], corpus: &[SentenceRecord]) -> Result<()> {
    let by_id: BTreeMap<&str, &SentenceRecord> = corpus.iter().map(|r| (r.id.as_str(), r)).collect();
    io::write_atomic(
        &out(config, SAMPLE_FILE),
        &io::csv_bytes(
            &["sentence_id", "label", "main_verb_lemma", "main_verb_index", "sc_onset_index", "sentence"],
            &sample_rows(sample, &by_id),
        ),
    )
}

fn correlation(x: &str, y: &str, xs: &[f64], ys: &[f64]) -> CorrelationRow {
    let r = match pearson_r(xs, ys) {
        Ok(r) => Some(r),
        Err(e) => {
            log::warn!("correlation {x} ~ {y}: {e}");
            None
        }
    };
    CorrelationRow {
        x: x.to_string(),
        y: y.to_string(),
        n: xs.len(),
        pearson_r: r,
    }
}

pub fn cmd_report(config: &PipelineConfig) -> Result<()> {
    let (corpus, _) = load_corpus(config)?;
    let constructions = io::read_constructions(&out(config, CONSTRUCTIONS_FILE))?;
    let rows = io::read_features(&out(config, FEATURES_FILE))?;
    let report = &config.report;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();

    // dataset shape and lemma concentration
    let shape = dataset_summary(&constructions);
    let lemmas = lemma_distribution(&constructions, report.top_k)?;
    let mut summary: Vec<(String, String)> = vec![
        ("explicit_count".into(), shape.explicit.count.to_string()),
        ("explicit_mean_length".into(), opt(shape.explicit.mean_length)),
        ("implicit_count".into(), shape.implicit.count.to_string()),
        ("implicit_mean_length".into(), opt(shape.implicit.mean_length)),
        ("distinct_lemmas".into(), lemmas.distinct_lemmas.to_string()),
        ("top_k".into(), report.top_k.to_string()),
        ("top_k_share".into(), lemmas.top_k_share.to_string()),
        ("feature_rows".into(), rows.len().to_string()),
    ];
    let mut cumulative = 0.0;
    let lemma_rows: Vec<LemmaRow> = lemmas
        .lemmas
        .iter()
        .enumerate()
        .map(|(i, l)| {
            cumulative += l.share;
            LemmaRow {
                rank: i + 1,
                lemma: &l.lemma,
                count: l.total,
                explicit: l.explicit,
                implicit: l.implicit,
                share: l.share,
                cumulative_share: cumulative,
            }
        })
        .collect();
    files.push((
        LEMMAS_FILE.into(),
        io::csv_bytes(
            &["rank", "lemma", "count", "explicit", "implicit", "share", "cumulative_share"],
            &lemma_rows,
        ),
    ));

    // per-label densities of every predictor
    let columns: Vec<Vec<f64>> = (0..PREDICTOR_KEYS.len())
        .map(|j| rows.iter().map(|r| r.predictors()[j]).collect())
        .collect();
    for (j, key) in PREDICTOR_KEYS.iter().enumerate() {
        let all = &columns[j];
        let grid_h = report
            .kde_bandwidth
            .or_else(|| scott_bandwidth(all).ok())
            .unwrap_or(1.0);
        let grid = if all.is_empty() { Vec::new() } else { default_grid(all, grid_h, report.kde_points) };
        for label in [Label::Explicit, Label::Implicit] {
            let values: Vec<f64> = rows
                .iter()
                .zip(all)
                .filter(|(r, _)| r.label == label.as_target())
                .map(|(_, v)| *v)
                .collect();
            let name = format!("kde_{key}_{}.csv", label.as_str().to_lowercase());
            let points: Vec<(f64, f64)> = match kde(&values, &grid, report.kde_bandwidth) {
                Ok(curve) => {
                    summary.push((
                        format!("kde_bandwidth_{key}_{}", label.as_str().to_lowercase()),
                        curve.bandwidth.to_string(),
                    ));
                    curve.grid.into_iter().zip(curve.density).collect()
                }
                Err(e) => {
                    log::warn!("{name}: {e}");
                    Vec::new()
                }
            };
            files.push((name, io::csv_bytes(&["x", "density"], &points)));
        }
    }

    // pairwise predictor correlations plus onset/subject word frequency
    let mut correlations = Vec::new();
    for a in 0..PREDICTOR_KEYS.len() {
        for b in a + 1..PREDICTOR_KEYS.len() {
            correlations.push(correlation(PREDICTOR_KEYS[a], PREDICTOR_KEYS[b], &columns[a], &columns[b]));
        }
    }
    let stats = CorpusStats::from_corpus(&corpus);
    let by_key: BTreeMap<(&str, usize), &ConstructionRecord> = constructions
        .iter()
        .map(|c| ((c.sentence_id.as_str(), c.main_verb_index), c))
        .collect();
    let by_id: BTreeMap<&str, &SentenceRecord> = corpus.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut onset = (Vec::new(), Vec::new());
    let mut subject = (Vec::new(), Vec::new());
    for r in &rows {
        let key = (r.sentence_id.as_str(), r.main_verb_index);
        let (Some(c), Some(s)) = (by_key.get(&key), by_id.get(r.sentence_id.as_str())) else {
            return Err(CliError::Data(format!(
                "feature row {}:{} has no matching construction or sentence",
                r.sentence_id, r.main_verb_index
            )));
        };
        onset.0.push(r.sc_onset_surprisal);
        onset.1.push(stats.token_frequency(&s.tokens[c.sc_onset_index]));
        if let Some(i) = c.sc_subject_index {
            subject.0.push(r.sc_onset_surprisal);
            subject.1.push(stats.token_frequency(&s.tokens[i]));
        }
    }
    correlations.push(correlation("sc_onset_surprisal", "sc_onset_frequency", &onset.0, &onset.1));
    correlations.push(correlation("sc_onset_surprisal", "sc_subject_frequency", &subject.0, &subject.1));
    files.push((CORRELATIONS_FILE.into(), io::csv_bytes(&["x", "y", "n", "pearson_r"], &correlations)));
    files.push((SUMMARY_FILE.into(), io::csv_bytes(&["key", "value"], &summary)));

    // the report never fails on a small corpus: the sample shrinks to fit
    let available = 2 * shape.explicit.count.min(shape.implicit.count);
    let size = report.sample_size.min(available);
    if size < report.sample_size {
        log::warn!("annotation sample clipped to {size} of {} requested", report.sample_size);
    }
    let sample = annotation_sample(&constructions, size, config.seed)?;

    for (name, bytes) in &files {
        io::write_atomic(&out(config, name), bytes)?;
    }
    write_sample(config, &sample, &corpus)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------- sample

/// Balanced annotation sample of exactly `size` constructions.
pub fn cmd_sample(config: &PipelineConfig, size: Option<usize>) -> Result<Vec<ConstructionRecord>> {
    let (corpus, _) = load_corpus(config)?;
    let constructions = io::read_constructions(&out(config, CONSTRUCTIONS_FILE))?;
    let size = size.unwrap_or(config.report.sample_size);
    let sample = annotation_sample(&constructions, size, config.seed)?;
    write_sample(config, &sample, &corpus)?;
    Ok(sample)
}
