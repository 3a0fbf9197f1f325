//! Outcome metrics over run records and cross-run comparison reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::control::Strategy;
use crate::error::{Error, Result};
use crate::model::{Torques, JOINT_COUNT, L_ANKLE, R_ANKLE};
use crate::sim::RunRecord;

/// Default per-sample jump threshold (N·m).
pub const DEFAULT_JUMP_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    /// Largest `|τ[k+1] − τ[k]|` per joint (N·m).
    pub max_jump: [f64; JOINT_COUNT],
    /// RMS of the first difference times the sample rate, per joint (N·m/s).
    pub rms_derivative: [f64; JOINT_COUNT],
    /// Jumps strictly above `threshold`, per joint.
    pub jumps_above: [usize; JOINT_COUNT],
    pub threshold: f64,
}

impl SmoothnessReport {
    pub fn overall_max_jump(&self) -> f64 {
        self.max_jump.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Joint-pooled RMS derivative.
    pub fn pooled_rms_derivative(&self) -> f64 {
        (self.rms_derivative.iter().map(|r| r * r).sum::<f64>() / JOINT_COUNT as f64).sqrt()
    }

    pub fn total_jumps_above(&self) -> usize {
        self.jumps_above.iter().sum()
    }
}

/// Smoothness of a torque series sampled at `rate` Hz.
pub fn smoothness_of(series: &[Torques], rate: f64, threshold: f64) -> Result<SmoothnessReport> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            samples: series.len(),
            needed: 2,
        });
    }
    let mut max_jump = [0.0; JOINT_COUNT];
    let mut sq = [0.0; JOINT_COUNT];
    let mut jumps_above = [0; JOINT_COUNT];
    for w in series.windows(2) {
        for j in 0..JOINT_COUNT {
            let d = (w[1].0[j] - w[0].0[j]).abs();
            max_jump[j] = f64::max(max_jump[j], d);
            sq[j] += d * d;
            jumps_above[j] += usize::from(d > threshold);
        }
    }
    let n = (series.len() - 1) as f64;
    Ok(SmoothnessReport {
        max_jump,
        rms_derivative: sq.map(|s| (s / n).sqrt() * rate),
        jumps_above,
        threshold,
    })
}

/// Smoothness of the applied assistance torque.
pub fn smoothness_metrics(record: &RunRecord, threshold: f64) -> Result<SmoothnessReport> {
    let series: Vec<Torques> = record.samples.iter().map(|s| s.applied).collect();
    smoothness_of(&series, record.meta.sample_rate, threshold)
}

/// Statistics of `|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MagnitudeStats {
    pub mean: f64,
    pub peak: f64,
    pub rms: f64,
    pub count: usize,
}

impl MagnitudeStats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut sum, mut sq, mut peak, mut count) = (0.0, 0.0, 0.0f64, 0usize);
        for v in values {
            let a = v.abs();
            sum += a;
            sq += a * a;
            peak = peak.max(a);
            count += 1;
        }
        if count == 0 {
            return Self::default();
        }
        let n = count as f64;
        Self {
            mean: sum / n,
            peak,
            rms: (sq / n).sqrt(),
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransparencyReport {
    /// In cuff order `l_thigh, l_shank, r_thigh, r_shank`.
    pub per_cuff: [MagnitudeStats; 4],
    pub pooled: MagnitudeStats,
}

pub fn transparency_metrics(record: &RunRecord) -> TransparencyReport {
    let per_cuff =
        std::array::from_fn(|c| MagnitudeStats::of(record.samples.iter().map(|s| s.cuff[c])));
    let pooled = MagnitudeStats::of(record.samples.iter().flat_map(|s| s.cuff));
    TransparencyReport { per_cuff, pooled }
}

/// Which ankle samples enter the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnkleSelection {
    /// Both ankles at every sample.
    BothLegs,
    /// Only the ankle of a foot in contact.
    StanceLeg,
}

impl AnkleSelection {
    pub fn tag(self) -> &'static str {
        match self {
            Self::BothLegs => "both_legs",
            Self::StanceLeg => "stance_leg",
        }
    }
}

/// Statistics of `|ankle residual torque|` for one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnkleTorqueStats {
    pub condition: String,
    pub selection: AnkleSelection,
    /// Mean over samples (N·m).
    pub average: f64,
    /// Population standard deviation over samples (N·m).
    pub std_dev: f64,
    pub max: f64,
    /// Mean and population SD of the per-cycle peaks.
    pub cycle_peak_mean: f64,
    pub cycle_peak_std_dev: f64,
    pub cycles: usize,
    pub samples: usize,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn ankle_values(record: &RunRecord, sel: AnkleSelection) -> (Vec<f64>, Vec<f64>) {
    let mut values = Vec::with_capacity(2 * record.samples.len());
    let mut peaks = Vec::new();
    let mut cycle_peak: Option<f64> = None;
    let mut prev_phase: Option<f64> = None;
    for s in &record.samples {
        if let Some(p) = prev_phase {
            // a phase wrap closes the running cycle
            if s.phase < p {
                if let Some(pk) = cycle_peak.take() {
                    peaks.push(pk);
                }
            }
        }
        prev_phase = Some(s.phase);
        for (leg, joint) in [(0, L_ANKLE), (1, R_ANKLE)] {
            if sel == AnkleSelection::StanceLeg && !s.contact[leg] {
                continue;
            }
            let a = s.residual.0[joint].abs();
            values.push(a);
            cycle_peak = Some(cycle_peak.map_or(a, |c: f64| c.max(a)));
        }
    }
    // the trailing partial cycle only counts when no cycle completed
    if peaks.is_empty() {
        peaks.extend(cycle_peak);
    }
    (values, peaks)
}

/// Ankle statistics for each condition, pooling that condition's records.
pub fn ankle_stats(
    conditions: &[(&str, Vec<&RunRecord>)],
    sel: AnkleSelection,
) -> Vec<AnkleTorqueStats> {
    conditions
        .iter()
        .map(|(name, records)| {
            let mut values = Vec::new();
            let mut peaks = Vec::new();
            for r in records {
                let (v, p) = ankle_values(r, sel);
                values.extend(v);
                peaks.extend(p);
            }
            let (average, std_dev) = mean_sd(&values);
            let (cycle_peak_mean, cycle_peak_std_dev) = mean_sd(&peaks);
            AnkleTorqueStats {
                condition: (*name).to_owned(),
                selection: sel,
                average,
                std_dev,
                max: values.iter().fold(0.0, |a, &b| a.max(b)),
                cycle_peak_mean,
                cycle_peak_std_dev,
                cycles: peaks.len(),
                samples: values.len(),
            }
        })
        .collect()
}

/// Every metric of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMetrics {
    pub smoothness: SmoothnessReport,
    pub transparency: TransparencyReport,
    pub ankle_both: AnkleTorqueStats,
    pub ankle_stance: AnkleTorqueStats,
    /// Peak `|τ|` per joint of the load-share blended model torque (N·m).
    pub peak_model_torque: [f64; JOINT_COUNT],
}

/// Scalar metric names in report column order.
pub const METRIC_NAMES: [&str; 17] = [
    "max_jump",
    "rms_derivative",
    "jumps_above",
    "cuff_mean",
    "cuff_peak",
    "cuff_rms",
    "ankle_mean_both",
    "ankle_sd_both",
    "ankle_max_both",
    "ankle_cycle_peak_mean_both",
    "ankle_mean_stance",
    "ankle_sd_stance",
    "ankle_max_stance",
    "ankle_cycle_peak_mean_stance",
    "peak_hip_torque",
    "peak_knee_torque",
    "peak_model_torque",
];

impl RecordMetrics {
    pub fn compute(record: &RunRecord, threshold: f64) -> Result<Self> {
        let name = record.meta.scenario.name.as_str();
        let stat = |sel| ankle_stats(&[(name, vec![record])], sel).remove(0);
        let mut peak = [0.0f64; JOINT_COUNT];
        for s in &record.samples {
            for j in 0..JOINT_COUNT {
                peak[j] = peak[j].max(s.truth.0[j].abs());
            }
        }
        Ok(Self {
            smoothness: smoothness_metrics(record, threshold)?,
            transparency: transparency_metrics(record),
            ankle_both: stat(AnkleSelection::BothLegs),
            ankle_stance: stat(AnkleSelection::StanceLeg),
            peak_model_torque: peak,
        })
    }

    /// Values in [`METRIC_NAMES`] order.
    pub fn scalars(&self) -> [f64; 17] {
        let p = &self.peak_model_torque;
        let (a, s) = (&self.ankle_both, &self.ankle_stance);
        [
            self.smoothness.overall_max_jump(),
            self.smoothness.pooled_rms_derivative(),
            self.smoothness.total_jumps_above() as f64,
            self.transparency.pooled.mean,
            self.transparency.pooled.peak,
            self.transparency.pooled.rms,
            a.average,
            a.std_dev,
            a.max,
            a.cycle_peak_mean,
            s.average,
            s.std_dev,
            s.max,
            s.cycle_peak_mean,
            p[0].max(p[3]),
            p[1].max(p[4]),
            p.iter().fold(0.0, |x, &y| x.max(y)),
        ]
    }
}

/// One row of a comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub condition: String,
    /// Records sharing a group differ only in strategy, ankle setting and load.
    pub group: String,
    pub trial: Option<u8>,
    pub strategy: Strategy,
    pub ankle_actuated: bool,
    pub load_mass: f64,
    pub baseline: String,
    pub metrics: BTreeMap<String, f64>,
    /// `value / baseline value`; absent when the baseline value is 0 and the value is not.
    pub ratios: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub jump_threshold: f64,
    pub rows: Vec<ComparisonRow>,
}

fn group_key(r: &RunRecord) -> String {
    let sc = &r.meta.scenario;
    let mut probe = sc.clone();
    probe.name.clear();
    probe.trial = None;
    probe.load_mass = 0.0;
    // the serialized shape, minus load and labels
    serde_json::to_string(&probe).expect("scenario serializes")
}

fn is_baseline(r: &RunRecord) -> bool {
    r.meta.controller.strategy == Strategy::Fsm
        && !r.meta.controller.ankle_actuated
        && r.meta.scenario.load_mass == 0.0
}

fn ratio(v: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        (v == 0.0).then_some(1.0)
    } else {
        Some(v / b)
    }
}

fn check_compatible(records: &[(String, &RunRecord)]) -> Result<()> {
    let Some((_, first)) = records.first() else {
        return Ok(());
    };
    let mut fields = Vec::new();
    for (_, r) in records {
        if r.meta.schema_version != first.meta.schema_version
            && !fields.contains(&"schema_version".to_string())
        {
            fields.push("schema_version".into());
        }
        if r.meta.sample_rate != first.meta.sample_rate
            && !fields.contains(&"sample_rate".to_string())
        {
            fields.push("sample_rate".into());
        }
    }
    if fields.is_empty() {
        Ok(())
    } else {
        Err(Error::SchemaMismatch { fields })
    }
}

/// Compares labeled records. Within each group the baseline is the FSM,
/// passive-ankle, unloaded record, or the group's first record when none
/// matches.
pub fn compare_runs(records: &[(String, &RunRecord)], threshold: f64) -> Result<ComparisonReport> {
    check_compatible(records)?;
    let metrics: Vec<RecordMetrics> = records
        .iter()
        .map(|(_, r)| RecordMetrics::compute(r, threshold))
        .collect::<Result<_>>()?;
    let keys: Vec<String> = records.iter().map(|(_, r)| group_key(r)).collect();
    let mut group_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut baselines: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        let next = group_ids.len();
        group_ids.entry(k).or_insert(next);
        baselines.entry(k).or_insert(i);
    }
    for (i, k) in keys.iter().enumerate() {
        let b = baselines[k.as_str()];
        if !is_baseline(records[b].1) && is_baseline(records[i].1) {
            baselines.insert(k, i);
        }
    }
    let rows = records
        .iter()
        .enumerate()
        .map(|(i, (label, r))| {
            let b = baselines[keys[i].as_str()];
            let values = metrics[i].scalars();
            let base = metrics[b].scalars();
            ComparisonRow {
                label: label.clone(),
                condition: r.meta.scenario.name.clone(),
                group: format!("g{}", group_ids[keys[i].as_str()]),
                trial: r.meta.scenario.trial,
                strategy: r.meta.controller.strategy,
                ankle_actuated: r.meta.controller.ankle_actuated,
                load_mass: r.meta.scenario.load_mass,
                baseline: records[b].0.clone(),
                metrics: METRIC_NAMES
                    .iter()
                    .zip(values)
                    .map(|(n, v)| (n.to_string(), v))
                    .collect(),
                ratios: METRIC_NAMES
                    .iter()
                    .zip(values.iter().zip(base))
                    .map(|(n, (&v, b))| (n.to_string(), ratio(v, b)))
                    .collect(),
            }
        })
        .collect();
    Ok(ComparisonReport {
        schema_version: crate::sim::RECORD_SCHEMA_VERSION,
        jump_threshold: threshold,
        rows,
    })
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per record: factors, metric values, then ratios.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,condition,group,trial,strategy,ankle,load_mass,baseline");
        for n in METRIC_NAMES {
            let _ = write!(out, ",{n}");
        }
        for n in METRIC_NAMES {
            let _ = write!(out, ",ratio_{n}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.label,
                r.condition,
                r.group,
                r.trial.map(|t| t.to_string()).unwrap_or_default(),
                r.strategy.tag(),
                if r.ankle_actuated { "on" } else { "off" },
                r.load_mass,
                r.baseline
            );
            for n in METRIC_NAMES {
                let _ = write!(out, ",{}", r.metrics[n]);
            }
            for n in METRIC_NAMES {
                match r.ratios[n] {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Plot-ready `condition,label,metric,value` rows.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("condition,label,metric,value\n");
        for r in &self.rows {
            for n in METRIC_NAMES {
                let _ = writeln!(out, "{},{},{},{}", r.condition, r.label, n, r.metrics[n]);
            }
        }
        out
    }
}
