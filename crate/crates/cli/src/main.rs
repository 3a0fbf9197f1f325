//! `gaitblend` command-line front end.
//!
//! On success a JSON summary goes to stdout; on failure a JSON error object
//! goes to stderr and the exit status is nonzero. Log verbosity comes from
//! `GAITBLEND_LOG` (e.g. `GAITBLEND_LOG=info`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use gaitblend_core::config::{load_config, FullConfig};
use gaitblend_core::control::{BlendWeights, ControllerConfig, Strategy};
use gaitblend_core::runner::{
    calibrate, calibrate_for, export_gait, record_csvs, report_from_files, run_protocol,
    run_scenario, write_once, write_record, write_report, ProtocolGrid,
};
use gaitblend_core::sim::{protocol_suite, Scenario};
use gaitblend_core::Error;
use log::info;

const LOG_ENV: &str = "GAITBLEND_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "gaitblend",
    version,
    about = "Blended stance-model exoskeleton assistance testbed"
)]
struct Cli {
    /// TOML configuration file; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Blend,
    Fsm,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Blend => Strategy::Blend,
            StrategyArg::Fsm => Strategy::Fsm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

impl From<OnOff> for bool {
    fn from(v: OnOff) -> bool {
        matches!(v, OnOff::On)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train blend weights on a calibration walk and write the weights file.
    Calibrate {
        /// Calibrate for this protocol row instead of the `calibration` section.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        trial: Option<u8>,
    },
    /// Run one trial and write its CSV and JSON.
    Run {
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long, value_enum)]
        ankle: Option<OnOff>,
        /// Protocol row to run instead of the configured `trial` section.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        trial: Option<u8>,
        /// Blend weights file written by `calibrate`.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Run the protocol grid, then write the comparison report and manifest.
    Protocol {
        /// Restrict to one strategy (default: both).
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Restrict to one ankle setting (default: both).
        #[arg(long, value_enum)]
        ankle: Option<OnOff>,
        /// Restrict to one protocol row (default: all eight).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        trial: Option<u8>,
    },
    /// Recompute the comparison report from record CSVs or directories of them.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Export the synthetic gait of the configured trial as CSV.
    Gait {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        trial: Option<u8>,
    },
}

fn load(cli: &Cli) -> anyhow::Result<FullConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            load_config(&text)?
        }
        None => FullConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn protocol_row(cfg: &FullConfig, n: u8) -> Scenario {
    protocol_suite(&cfg.protocol, &cfg.gait.cadence)
        .into_iter()
        .find(|s| s.trial == Some(n))
        .expect("rows 1..=8 exist")
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn execute(cli: &Cli) -> anyhow::Result<serde_json::Value> {
    let cfg = load(cli)?;
    let out = cfg.output_dir.clone();
    match &cli.command {
        Command::Calibrate { trial } => {
            let (weights, tag) = match trial {
                Some(n) => {
                    let sc = protocol_row(&cfg, *n);
                    (calibrate_for(&cfg, &sc)?, sc.name)
                }
                None => (
                    calibrate(&cfg)?,
                    format!("calibration_{}kmh", cfg.calibration.speed_kmh),
                ),
            };
            let path = out
                .join("weights")
                .join(format!("{tag}__seed{}.toml", cfg.seed));
            write_once(&path, &weights.to_text())?;
            info!("wrote {}", path.display());
            Ok(serde_json::json!({
                "status": "ok",
                "weights": display(&path),
                "y": weights.y,
                "sample_count": weights.sample_count,
            }))
        }
        Command::Run {
            strategy,
            ankle,
            trial,
            weights,
        } => {
            let mut controller: ControllerConfig = cfg.controller;
            if let Some(s) = strategy {
                controller.strategy = (*s).into();
            }
            if let Some(a) = ankle {
                controller.ankle_actuated = (*a).into();
            }
            let scenario = match trial {
                Some(n) => protocol_row(&cfg, *n),
                None => cfg.scenario(),
            };
            let loaded = match weights {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    Some(BlendWeights::from_text(&text)?)
                }
                None if controller.strategy == Strategy::Blend => {
                    bail!(Error::Config(
                        "blend strategy requires calibrated weights; run `calibrate` and pass --weights".into()
                    ))
                }
                None => None,
            };
            let source = weights.as_deref().map(display);
            let record = run_scenario(
                &cfg,
                &scenario,
                &controller,
                loaded.as_ref(),
                source.as_deref(),
            )?;
            let (csv, json) = write_record(&record, &out.join("trials"))?;
            info!("wrote {} ({} samples)", csv.display(), record.samples.len());
            Ok(serde_json::json!({
                "status": "ok",
                "csv": display(&csv),
                "json": display(&json),
                "samples": record.samples.len(),
            }))
        }
        Command::Protocol {
            strategy,
            ankle,
            trial,
        } => {
            let mut grid = ProtocolGrid::default();
            if let Some(s) = strategy {
                grid.strategies = vec![(*s).into()];
            }
            if let Some(a) = ankle {
                grid.ankle = vec![(*a).into()];
            }
            if let Some(t) = trial {
                grid.trials = vec![*t];
            }
            let manifest = run_protocol(&cfg, &grid, &out)?;
            let failed: Vec<&str> = manifest
                .trials
                .iter()
                .filter(|t| !t.ok)
                .map(|t| t.stem.as_str())
                .collect();
            info!("{} trials, {} failed", manifest.trials.len(), failed.len());
            if !failed.is_empty() {
                bail!(Error::Config(format!(
                    "{} of {} trials failed: {}; see {}",
                    failed.len(),
                    manifest.trials.len(),
                    failed.join(", "),
                    out.join("manifest.json").display()
                )));
            }
            Ok(serde_json::json!({
                "status": "ok",
                "trials": manifest.trials.len(),
                "manifest": display(&out.join("manifest.json")),
            }))
        }
        Command::Report { inputs } => {
            let mut csvs = Vec::new();
            for p in inputs {
                if p.is_dir() {
                    csvs.extend(record_csvs(p)?);
                } else {
                    csvs.push(p.clone());
                }
            }
            if csvs.is_empty() {
                bail!(Error::Config("no record CSVs found".into()));
            }
            let report = report_from_files(&csvs)?;
            let files = write_report(&report, &out)?;
            Ok(serde_json::json!({
                "status": "ok",
                "records": csvs.len(),
                "reports": files.iter().map(|p| display(p)).collect::<Vec<_>>(),
            }))
        }
        Command::Gait { trial } => {
            let scenario = match trial {
                Some(n) => protocol_row(&cfg, *n),
                None => cfg.scenario(),
            };
            let path = out
                .join("gait")
                .join(format!("{}__seed{}.csv", scenario.name, cfg.seed));
            write_once(&path, &export_gait(&cfg, &scenario)?)?;
            Ok(serde_json::json!({"status": "ok", "csv": display(&path)}))
        }
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<Error>() {
        Some(Error::Validation { .. }) | Some(Error::Field { .. }) => "validation",
        Some(Error::Parse { .. }) => "parse",
        Some(Error::Config(_)) => "config",
        Some(Error::NonFinite { .. }) => "non_finite",
        Some(Error::SchemaMismatch { .. }) => "schema_mismatch",
        Some(Error::Io(_)) => "io",
        Some(_) => "runtime",
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "runtime",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let err = serde_json::json!({
                "status": "error",
                "kind": error_kind(&e),
                "message": format!("{e:#}"),
            });
            eprintln!("{err}");
            ExitCode::FAILURE
        }
    }
}
