use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uidthat::config::{self, PipelineConfig};
use uidthat::pipeline;
use uidthat::Result;

/// Detects optional-"that" constructions, measures them against a language
/// model and fits a logistic model of complementizer omission.
#[derive(Debug, Parser)]
#[command(name = "uidthat", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for featurization (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Corpus file (JSON lines).
    #[arg(long, global = true, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Override any config key, e.g. --set ngram.order=3.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Only print warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find explicit and implicit "that" constructions in the corpus.
    Extract,
    /// Compute the six predictors for every construction.
    Featurize,
    /// Fit the logistic model for each configured scenario.
    Fit,
    /// Write descriptive statistics, densities, correlations and a sample.
    Report,
    /// Draw a balanced annotation sample of exactly the requested size.
    Sample {
        #[arg(long)]
        size: Option<usize>,
    },
}

fn resolve(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => config::load(path)?,
        None => PipelineConfig::default(),
    };
    for o in &cli.overrides {
        config::apply_override(&mut config, o)?;
    }
    if let Some(v) = cli.jobs {
        config.jobs = v;
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = &cli.output_dir {
        config.output_dir = v.clone();
    }
    if let Some(v) = &cli.corpus {
        config.corpus = Some(v.clone());
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<()> {
    let config = resolve(cli)?;
    match cli.command {
        Command::Extract => pipeline::cmd_extract(&config).map(drop),
        Command::Featurize => pipeline::cmd_featurize(&config).map(drop),
        Command::Fit => pipeline::cmd_fit(&config).map(drop),
        Command::Report => pipeline::cmd_report(&config),
        Command::Sample { size } => pipeline::cmd_sample(&config, size).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info })
        .parse_env("UIDTHAT_LOG")
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
