//! File formats, configuration, the sidecar client and the staged
//! command-line pipeline built on `uidthat-core`.
//!
//! Stages communicate only through files in the output directory:
//!
//! | stage       | reads                                   | writes |
//! |-------------|-----------------------------------------|--------|
//! | `extract`   | corpus                                  | `constructions.jsonl`, `extraction_summary.csv`, `that_roles.csv`, `diagnostics.csv` |
//! | `featurize` | corpus, `constructions.jsonl`           | `features.csv`, `features.meta.json` |
//! | `fit`       | `features.csv`                          | `regression_<scenario>.txt`, `regression.json` |
//! | `report`    | corpus, `constructions.jsonl`, `features.csv` | `summary.csv`, `lemmas.csv`, `kde_*.csv`, `correlations.csv`, `annotation_sample.csv` |
//! | `sample`    | corpus, `constructions.jsonl`           | `annotation_sample.csv` |

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod sidecar;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
