mod commands;
mod config;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bargain::corpus::Split;
use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

use crate::commands::{Ctx, ImportArgs, PreprocessArgs};
use crate::config::RunConfig;

/// Early prediction of negotiation outcomes from partial dialogues.
#[derive(Parser)]
#[command(name = "bargain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Detail level of the log file.
    #[arg(long, global = true, default_value = "info")]
    log_level: LevelFilter,
    /// Log file; defaults to logs/<subcommand>.log under the output directory.
    #[arg(long, global = true)]
    log_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Convert CoCoA-format release files (JSON arrays) into a corpus file.
    Import {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        validation: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop unagreed, outlier and off-task dialogues.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// CSV listing every dropped dialogue and why.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Write feature tables for every split, fraction and feature set.
    Extract(ConfigArgs),
    /// Fit baselines and models on train, select on validation.
    Train(ConfigArgs),
    /// Fit, then score every row on the test split.
    Evaluate(ConfigArgs),
    /// Score the ablation base model with each feature group removed.
    Ablate(ConfigArgs),
    /// Write flattened encoder inputs for every split and fraction.
    Flatten(ConfigArgs),
    /// Combine external per-fraction predictions with a small network.
    Ensemble(ConfigArgs),
    /// Compare how well two representation sets encode each feature.
    Probe(ConfigArgs),
    /// Univariate F-test of every feature against the outcome on train.
    Significance(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Run config (TOML), or a manifest JSON from an earlier run.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = if self.config.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&self.config).with_context(|| format!("reading {}", self.config.display()))?;
            let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", self.config.display()))?;
            let cfg: RunConfig = serde_json::from_value(v.get("config").cloned().context("manifest has no config")?)
                .with_context(|| format!("config in manifest {}", self.config.display()))?;
            cfg
        } else {
            RunConfig::load(&self.config)?
        };
        let abs = |p: &Path| -> Result<PathBuf> {
            Ok(if p.is_absolute() { p.to_path_buf() } else { std::env::current_dir()?.join(p) })
        };
        if let Some(d) = &self.output_dir {
            cfg.output_dir = abs(d)?;
        }
        if let Some(c) = &self.corpus {
            cfg.corpus = abs(c)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn init_log(path: &Path, level: LevelFilter) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = fs::File::create(path).with_context(|| format!("creating log {}", path.display()))?;
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Pipe(Box::new(file)))
        .try_init()?;
    Ok(())
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Import { .. } => "import",
        Command::Preprocess { .. } => "preprocess",
        Command::Extract(_) => "extract",
        Command::Train(_) => "train",
        Command::Evaluate(_) => "evaluate",
        Command::Ablate(_) => "ablate",
        Command::Flatten(_) => "flatten",
        Command::Ensemble(_) => "ensemble",
        Command::Probe(_) => "probe",
        Command::Significance(_) => "significance",
    }
}

fn out_parent(out: &Path) -> PathBuf {
    out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf()
}

fn run(cli: Cli) -> Result<PathBuf> {
    let sub = name(&cli.command);
    let log_at = |root: &Path| cli.log_file.clone().unwrap_or_else(|| root.join("logs").join(format!("{sub}.log")));
    match &cli.command {
        Command::Import { train, validation, test, out } => {
            init_log(&log_at(&out_parent(out)), cli.log_level)?;
            let inputs = [(Split::Train, train), (Split::Validation, validation), (Split::Test, test)]
                .into_iter()
                .filter_map(|(s, p)| p.clone().map(|p| (s, p)))
                .collect();
            commands::import(&ImportArgs { inputs, out: out.clone() })
        }
        Command::Preprocess { input, out, audit } => {
            init_log(&log_at(&out_parent(out)), cli.log_level)?;
            commands::preprocess(&PreprocessArgs {
                input: input.clone(),
                out: out.clone(),
                audit: audit.clone(),
            })
        }
        Command::Extract(a)
        | Command::Train(a)
        | Command::Evaluate(a)
        | Command::Ablate(a)
        | Command::Flatten(a)
        | Command::Ensemble(a)
        | Command::Probe(a)
        | Command::Significance(a) => {
            let cfg = a.load()?;
            init_log(&log_at(&cfg.output_dir), cli.log_level)?;
            log::info!("bargain {} {sub}", manifest::VERSION);
            let ctx = Ctx::new(cfg)?;
            match &cli.command {
                Command::Extract(_) => commands::extract(&ctx),
                Command::Train(_) => commands::train(&ctx),
                Command::Evaluate(_) => commands::evaluate(&ctx),
                Command::Ablate(_) => commands::ablate(&ctx),
                Command::Flatten(_) => commands::flatten(&ctx),
                Command::Ensemble(_) => commands::ensemble(&ctx),
                Command::Probe(_) => commands::probe(&ctx),
                Command::Significance(_) => commands::significance(&ctx),
                Command::Import { .. } | Command::Preprocess { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = name(&cli.command);
    match run(cli) {
        Ok(manifest) => {
            println!("{sub}: wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e:?}");
            let line = format!("{e:#}").replace('\n', " ");
            eprintln!("bargain {sub}: error: {line}");
            ExitCode::FAILURE
        }
    }
}
