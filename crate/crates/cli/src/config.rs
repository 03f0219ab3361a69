//! Pipeline configuration: one TOML file, every key overridable from the
//! command line.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uidthat_core::NgramConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads for featurization; 0 uses every core.
    pub jobs: usize,
    pub provider: ProviderConfig,
    pub ngram: NgramSection,
    pub features: FeatureSection,
    pub fit: FitSection,
    pub report: ReportSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            output_dir: PathBuf::from("out"),
            seed: 13,
            jobs: 0,
            provider: ProviderConfig::default(),
            ngram: NgramSection::default(),
            features: FeatureSection::default(),
            fit: FitSection::default(),
            report: ReportSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKindConfig {
    #[default]
    Ngram,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    #[default]
    Http,
    Stdio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProviderConfig {
    pub kind: ProviderKindConfig,
    pub transport: Transport,
    /// Sidecar URL for the HTTP transport.
    pub endpoint: Option<String>,
    /// Program and arguments for the stdio transport.
    pub command: Vec<String>,
    pub timeout_secs: f64,
    /// Extra attempts after a transport failure.
    pub retries: u32,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKindConfig::Ngram,
            transport: Transport::Http,
            endpoint: None,
            command: Vec::new(),
            timeout_secs: 30.0,
            retries: 2,
        }
    }
}

impl ProviderConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NgramSection {
    pub order: usize,
    pub smoothing_k: f64,
    pub min_count: u64,
    pub lowercase: bool,
}

impl Default for NgramSection {
    fn default() -> Self {
        let d = NgramConfig::default();
        NgramSection {
            order: d.order,
            smoothing_k: d.smoothing_k,
            min_count: d.min_count,
            lowercase: d.lowercase,
        }
    }
}

impl NgramSection {
    pub fn to_core(&self) -> NgramConfig {
        NgramConfig {
            order: self.order,
            smoothing_k: self.smoothing_k,
            min_count: self.min_count,
            lowercase: self.lowercase,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureSection {
    /// Keep only constructions with this main-verb lemma.
    pub lemma_filter: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    /// `"all"` or a main-verb lemma; one summary per entry.
    pub scenarios: Vec<String>,
    pub tolerance: f64,
    pub max_iter: usize,
    pub ridge: f64,
    /// Regress on ln(main verb frequency) instead of the raw relative frequency.
    pub log_frequency: bool,
    pub cv_folds: usize,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            scenarios: vec![ALL_LEMMAS.to_string()],
            tolerance: 1e-8,
            max_iter: 100,
            ridge: 0.0,
            log_frequency: false,
            cv_folds: 5,
        }
    }
}

pub const ALL_LEMMAS: &str = "all";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    pub top_k: usize,
    pub kde_points: usize,
    /// Fixed KDE bandwidth; Scott's rule when absent.
    pub kde_bandwidth: Option<f64>,
    pub sample_size: usize,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            top_k: 10,
            kde_points: 256,
            kde_bandwidth: None,
            sample_size: 500,
        }
    }
}

/// Parses a config file. Relative paths inside it resolve against the
/// file's directory.
pub fn load(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut config = parse(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    if let Some(corpus) = &config.corpus {
        config.corpus = Some(base.join(corpus));
    }
    config.output_dir = base.join(&config.output_dir);
    Ok(config)
}

pub fn parse(text: &str) -> Result<PipelineConfig> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let field = field_in_message(&message).unwrap_or_else(|| "<file>".to_string());
        CliError::config(&field, message)
    })
}

fn field_in_message(message: &str) -> Option<String> {
    // toml reports unknown keys as "unknown field `name`, expected ..."
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

/// Applies a `key=value` override, e.g. `ngram.order=3` or
/// `fit.scenarios=["all","think"]`. Values are TOML; bare words are strings.
pub fn apply_override(config: &mut PipelineConfig, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let mut tree = toml::Value::try_from(&*config).map_err(|e| CliError::config(key, e))?;
    let mut node = &mut tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::config(key, "not a section"))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value.clone());
            break;
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    *config = tree
        .try_into()
        .map_err(|e: toml::de::Error| CliError::config(key, e.message()))?;
    Ok(())
}

impl PipelineConfig {
    /// Checks value ranges and cross-field requirements.
    pub fn validate(&self) -> Result<()> {
        let n = &self.ngram;
        if n.order == 0 {
            return Err(CliError::config("ngram.order", "must be at least 1"));
        }
        if !(n.smoothing_k >= 0.0 && n.smoothing_k.is_finite()) {
            return Err(CliError::config("ngram.smoothing_k", "must be a finite value >= 0"));
        }
        if n.min_count == 0 {
            return Err(CliError::config("ngram.min_count", "must be at least 1"));
        }
        let p = &self.provider;
        if p.kind == ProviderKindConfig::External {
            match p.transport {
                Transport::Http if p.endpoint.as_deref().is_none_or(str::is_empty) => {
                    return Err(CliError::config(
                        "provider.endpoint",
                        "required for the external provider over http",
                    ))
                }
                Transport::Stdio if p.command.is_empty() => {
                    return Err(CliError::config(
                        "provider.command",
                        "required for the external provider over stdio",
                    ))
                }
                _ => {}
            }
        }
        if !(p.timeout_secs > 0.0 && p.timeout_secs.is_finite()) {
            return Err(CliError::config("provider.timeout_secs", "must be positive"));
        }
        if let Some(lemma) = &self.features.lemma_filter {
            if lemma.trim().is_empty() {
                return Err(CliError::config("features.lemma_filter", "must not be empty"));
            }
        }
        let f = &self.fit;
        if f.scenarios.is_empty() {
            return Err(CliError::config("fit.scenarios", "needs at least one entry"));
        }
        if f.scenarios.iter().any(|s| s.trim().is_empty()) {
            return Err(CliError::config("fit.scenarios", "entries must not be empty"));
        }
        if !(f.tolerance > 0.0) {
            return Err(CliError::config("fit.tolerance", "must be positive"));
        }
        if f.max_iter == 0 {
            return Err(CliError::config("fit.max_iter", "must be at least 1"));
        }
        if !(f.ridge >= 0.0 && f.ridge.is_finite()) {
            return Err(CliError::config("fit.ridge", "must be a finite value >= 0"));
        }
        if f.cv_folds == 1 {
            return Err(CliError::config("fit.cv_folds", "use 0 to disable or at least 2"));
        }
        let r = &self.report;
        if r.top_k == 0 {
            return Err(CliError::config("report.top_k", "must be at least 1"));
        }
        if r.kde_points < 2 {
            return Err(CliError::config("report.kde_points", "must be at least 2"));
        }
        if let Some(h) = r.kde_bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::config("report.kde_bandwidth", "must be positive"));
            }
        }
        if !r.sample_size.is_multiple_of(2) {
            return Err(CliError::config("report.sample_size", "must be even"));
        }
        Ok(())
    }

    /// The corpus path, which must name an existing file.
    pub fn corpus_path(&self) -> Result<&Path> {
        let path = self
            .corpus
            .as_deref()
            .ok_or_else(|| CliError::config("corpus", "no corpus path given"))?;
        if !path.is_file() {
            return Err(CliError::config(
                "corpus",
                format!("{} does not exist or is not a file", path.display()),
            ));
        }
        Ok(path)
    }

    /// SHA-256 of the measurement-relevant settings. Output location,
    /// worker count and the corpus path are left out so the digest only
    /// changes when results could.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.jobs = 0;
        canonical.corpus = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
