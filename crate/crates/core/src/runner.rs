//! Command orchestration shared by the CLI and tests.
//!
//! Output files are write-once: rewriting a file with identical bytes is a
//! no-op, rewriting it with different bytes is an error.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::FullConfig;
use crate::control::{train_blend_weights, BlendWeights, ControllerConfig, Strategy};
use crate::error::{Error, Result};
use crate::gait::{gait_csv, make_calibration_dataset, GaitProfile};
use crate::metrics::{compare_runs, ComparisonReport, DEFAULT_JUMP_THRESHOLD};
use crate::sim::{protocol_suite, run_trial, trial_stem, RunRecord, Scenario, Trial};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Writes `content` unless an identical file is already present.
pub fn write_once(path: &Path, content: &str) -> Result<()> {
    if let Ok(existing) = std::fs::read(path) {
        if existing == content.as_bytes() {
            return Ok(());
        }
        return Err(Error::Config(format!(
            "refusing to overwrite {} with different content",
            path.display()
        )));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Constant-speed calibration walk at `kmh` under the given slope and load.
pub fn calibrate_at(
    cfg: &FullConfig,
    kmh: f64,
    slope: f64,
    load_mass: f64,
) -> Result<BlendWeights> {
    let profile = GaitProfile {
        slope,
        subject: cfg.subject,
        device_mass: cfg.exo.total_mass + load_mass,
        cadence: cfg.gait.cadence,
        stance: cfg.gait.stance,
        noise_sigma: cfg.gait.noise_sigma,
        seed: cfg.seed,
        ..GaitProfile::constant_speed(kmh)
    };
    profile.validate()?;
    let cal = &cfg.calibration;
    let data = make_calibration_dataset(&profile, cal.duration, cal.sample_rate)?;
    if data.degenerate {
        return Err(Error::DegenerateDataset);
    }
    train_blend_weights(&data.q, &data.labels, cal.ridge)
}

/// Calibration of the `calibration` section under the configured environment.
pub fn calibrate(cfg: &FullConfig) -> Result<BlendWeights> {
    let env = &cfg.environment;
    calibrate_at(
        cfg,
        cfg.calibration.speed_kmh,
        env.slope_deg.to_radians(),
        env.load_mass,
    )
}

/// Calibration matched to a scenario: its top speed, slope and load.
pub fn calibrate_for(cfg: &FullConfig, scenario: &Scenario) -> Result<BlendWeights> {
    let kmh = scenario.nominal_speed(&cfg.gait.cadence) * 3.6;
    calibrate_at(cfg, kmh, scenario.slope, scenario.load_mass)
}

pub fn run_scenario(
    cfg: &FullConfig,
    scenario: &Scenario,
    controller: &ControllerConfig,
    weights: Option<&BlendWeights>,
    weights_source: Option<&str>,
) -> Result<RunRecord> {
    run_trial(&Trial {
        scenario,
        controller,
        exo: &cfg.exo,
        subject: &cfg.subject,
        gait: &cfg.gait,
        weights,
        weights_source,
        seed: cfg.seed,
    })
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`.
pub fn write_record(record: &RunRecord, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let stem = record.stem();
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    write_once(&csv, &record.to_csv())?;
    write_once(&json, &record.meta_json())?;
    Ok((csv, json))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStatus {
    pub stem: String,
    pub trial: Option<u8>,
    pub condition: String,
    pub strategy: Strategy,
    pub ankle_actuated: bool,
    pub ok: bool,
    pub error: Option<String>,
    /// Paths relative to the output directory.
    pub csv: Option<String>,
    pub json: Option<String>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub seed: u64,
    pub trials: Vec<TrialStatus>,
    pub weights: Vec<String>,
    pub reports: Vec<String>,
}

impl Manifest {
    pub fn all_ok(&self) -> bool {
        self.trials.iter().all(|t| t.ok)
    }
}

/// Selection of the protocol grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolGrid {
    /// Protocol rows to run (1-based); empty means all.
    pub trials: Vec<u8>,
    pub strategies: Vec<Strategy>,
    pub ankle: Vec<bool>,
}

impl Default for ProtocolGrid {
    fn default() -> Self {
        Self {
            trials: Vec::new(),
            strategies: vec![Strategy::Blend, Strategy::Fsm],
            ankle: vec![true, false],
        }
    }
}

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_LONG_CSV: &str = "report_long.csv";
pub const MANIFEST: &str = "manifest.json";

fn relative(out: &Path, p: &Path) -> String {
    p.strip_prefix(out)
        .unwrap_or(p)
        .to_string_lossy()
        .replace('\\', "/")
}

/// Writes the three report files into `dir`.
pub fn write_report(report: &ComparisonReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = [
        (REPORT_JSON, report.to_json()),
        (REPORT_CSV, report.to_csv()),
        (REPORT_LONG_CSV, report.to_long_csv()),
    ];
    files
        .into_iter()
        .map(|(name, text)| {
            let p = dir.join(name);
            write_once(&p, &text)?;
            Ok(p)
        })
        .collect()
}

/// Runs the protocol grid into `out`. Trials run in parallel; the report and
/// then the manifest are written after all trials finish.
pub fn run_protocol(cfg: &FullConfig, grid: &ProtocolGrid, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let suite: Vec<Scenario> = protocol_suite(&cfg.protocol, &cfg.gait.cadence)
        .into_iter()
        .filter(|s| grid.trials.is_empty() || s.trial.is_some_and(|t| grid.trials.contains(&t)))
        .collect();
    if suite.is_empty() {
        return Err(Error::Config("no protocol trial selected".into()));
    }
    let trials_dir = out.join("trials");
    let weights_dir = out.join("weights");

    let needs_weights = grid.strategies.contains(&Strategy::Blend);
    let weights: Vec<Option<(BlendWeights, String)>> = suite
        .par_iter()
        .map(|sc| -> Result<_> {
            if !needs_weights {
                return Ok(None);
            }
            let w = calibrate_for(cfg, sc)?;
            let path = weights_dir.join(format!("{}__seed{}.toml", sc.name, cfg.seed));
            write_once(&path, &w.to_text())?;
            Ok(Some((w, relative(out, &path))))
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (i, sc) in suite.iter().enumerate() {
        for &strategy in &grid.strategies {
            for &ankle_actuated in &grid.ankle {
                let controller = ControllerConfig {
                    strategy,
                    ankle_actuated,
                    ..cfg.controller
                };
                jobs.push((i, sc, controller));
            }
        }
    }

    let results: Vec<(TrialStatus, Option<RunRecord>)> = jobs
        .par_iter()
        .map(|(i, sc, controller)| {
            let stem = trial_stem(sc, controller, cfg.seed);
            let w = weights[*i].as_ref();
            let outcome = run_scenario(
                cfg,
                sc,
                controller,
                w.map(|x| &x.0),
                w.map(|x| x.1.as_str()),
            )
            .and_then(|rec| write_record(&rec, &trials_dir).map(|paths| (rec, paths)));
            let mut status = TrialStatus {
                stem,
                trial: sc.trial,
                condition: sc.name.clone(),
                strategy: controller.strategy,
                ankle_actuated: controller.ankle_actuated,
                ok: false,
                error: None,
                csv: None,
                json: None,
                samples: 0,
            };
            match outcome {
                Ok((rec, (csv, json))) => {
                    status.ok = true;
                    status.csv = Some(relative(out, &csv));
                    status.json = Some(relative(out, &json));
                    status.samples = rec.samples.len();
                    (status, Some(rec))
                }
                Err(e) => {
                    status.error = Some(e.to_string());
                    (status, None)
                }
            }
        })
        .collect();

    // file-name order, so `report` over the trial directory reproduces this report
    let mut labeled: Vec<(String, &RunRecord)> = results
        .iter()
        .filter_map(|(s, r)| r.as_ref().map(|r| (s.stem.clone(), r)))
        .collect();
    labeled.sort_by(|a, b| a.0.cmp(&b.0));
    let mut reports = Vec::new();
    if !labeled.is_empty() {
        let report = compare_runs(&labeled, DEFAULT_JUMP_THRESHOLD)?;
        for p in write_report(&report, out)? {
            reports.push(relative(out, &p));
        }
    }
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        seed: cfg.seed,
        trials: results.into_iter().map(|(s, _)| s).collect(),
        weights: weights.into_iter().flatten().map(|(_, p)| p).collect(),
        reports,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_once(&out.join(MANIFEST), &text)?;
    Ok(manifest)
}

/// Recomputes the comparison report from record CSVs (JSON sidecars beside them).
pub fn report_from_files(csvs: &[PathBuf]) -> Result<ComparisonReport> {
    let records: Vec<RunRecord> = csvs
        .iter()
        .map(|p| RunRecord::read(p))
        .collect::<Result<_>>()?;
    let labeled: Vec<(String, &RunRecord)> = csvs
        .iter()
        .zip(&records)
        .map(|(p, r)| {
            (
                p.file_stem()
                    .map_or_else(|| r.stem(), |s| s.to_string_lossy().into_owned()),
                r,
            )
        })
        .collect();
    compare_runs(&labeled, DEFAULT_JUMP_THRESHOLD)
}

/// All record CSVs in a directory, sorted by name.
pub fn record_csvs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv") && p.with_extension("json").exists())
        .collect();
    out.sort();
    Ok(out)
}

/// Synthetic gait of a scenario as CSV.
pub fn export_gait(cfg: &FullConfig, sc: &Scenario) -> Result<String> {
    sc.validate()?;
    let profile = sc.gait_profile(&cfg.gait, &cfg.subject, &cfg.exo, cfg.seed);
    profile.validate()?;
    Ok(gait_csv(&profile, sc.duration, sc.sample_rate))
}
