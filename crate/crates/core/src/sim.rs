//! Trial execution.
//!
//! The plant is kinematic: the synthetic gait is prescribed and the
//! controller's torques do not feed back into it. At each tick both grounded
//! models are evaluated, the controller produces the applied torque, and the
//! residual (what the wearer must supply) is mapped onto the four harness
//! cuffs with a minimum-norm force distribution.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix4, SMatrix, Vector4, Vector6};
use serde::{Deserialize, Serialize};

use crate::control::{
    assist_torques, blend_gains_with, blend_torque, fsm_step, BlendGains, BlendWeights,
    ControllerConfig, FsmState, GainSource, Strategy,
};
use crate::error::{Error, Result, Violations};
use crate::gait::{
    gait_sample, stance_label, Anthropometrics, CadenceLaw, GaitProfile, Pacing, SpeedProfile,
    StanceLaw,
};
use crate::model::planar::Vec2;
use crate::model::{
    build_grounded_chain, chain_to_device_order, Environment, ExoParams, GroundedChain, Side,
    Torques, DEVICE_JOINT_NAMES, JOINT_COUNT,
};

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// Cuff order used for interaction forces.
pub const CUFF_NAMES: [&str; 4] = ["l_thigh", "l_shank", "r_thigh", "r_shank"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ground {
    Treadmill,
    FlatGround,
}

/// One trial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Content-stable condition tag.
    pub name: String,
    /// Row number in the trial protocol, when taken from it.
    pub trial: Option<u8>,
    pub ground: Ground,
    /// Slope angle (rad); 0 for level walking.
    pub slope: f64,
    pub load_mass: f64,
    pub pacing: Pacing,
    pub duration: f64,
    pub sample_rate: f64,
}

impl Scenario {
    pub fn treadmill(name: &str, speed: SpeedProfile, duration: f64) -> Self {
        Self {
            name: name.into(),
            trial: None,
            ground: Ground::Treadmill,
            slope: 0.0,
            load_mass: 0.0,
            pacing: Pacing::Treadmill { speed },
            duration,
            sample_rate: 100.0,
        }
    }

    pub fn constant_speed(name: &str, kmh: f64, duration: f64) -> Self {
        Self::treadmill(name, SpeedProfile::constant(kmh), duration)
    }

    pub fn flat_ground(name: &str, steps_per_min: f64, duration: f64) -> Self {
        Self {
            name: name.into(),
            trial: None,
            ground: Ground::FlatGround,
            slope: 0.0,
            load_mass: 0.0,
            pacing: Pacing::Metronome { steps_per_min },
            duration,
            sample_rate: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Pacing::Treadmill { speed } = &self.pacing {
            speed.validate()?;
        }
        let mut v = Violations::default();
        v.check(self.duration > 0.0 && self.duration.is_finite(), || {
            "duration must be > 0".into()
        });
        v.check(
            self.sample_rate > 0.0 && self.sample_rate.is_finite(),
            || "sample_rate must be > 0".into(),
        );
        match (self.ground, &self.pacing) {
            (Ground::FlatGround, Pacing::Treadmill { .. }) => v.check(false, || {
                "flat-ground trials require a metronome cadence".into()
            }),
            (Ground::Treadmill, Pacing::Metronome { .. }) => {
                v.check(false, || "treadmill trials require a speed sequence".into())
            }
            _ => {}
        }
        v.check(self.slope.abs() < std::f64::consts::FRAC_PI_4, || {
            "|slope| must be < pi/4".into()
        });
        v.check(self.load_mass >= 0.0, || "load_mass must be >= 0".into());
        v.finish("scenario")
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate + 1e-9).floor() as usize
    }

    pub fn environment(&self) -> Environment {
        Environment::flat()
            .with_slope(self.slope)
            .with_load(self.load_mass)
    }

    /// Highest speed reached (m/s).
    pub fn nominal_speed(&self, cadence: &CadenceLaw) -> f64 {
        match &self.pacing {
            Pacing::Treadmill { speed } => speed.max_kmh() / 3.6,
            Pacing::Metronome { steps_per_min } => cadence.speed_for_cadence(*steps_per_min),
        }
    }

    pub fn gait_profile(
        &self,
        tuning: &GaitTuning,
        subject: &Anthropometrics,
        exo: &ExoParams,
        seed: u64,
    ) -> GaitProfile {
        GaitProfile {
            pacing: self.pacing.clone(),
            cadence: tuning.cadence,
            stance: tuning.stance,
            slope: self.slope,
            subject: *subject,
            device_mass: exo.total_mass + self.load_mass,
            noise_sigma: tuning.noise_sigma,
            seed,
        }
    }
}

/// Gait-generator settings shared by all trials.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GaitTuning {
    pub cadence: CadenceLaw,
    pub stance: StanceLaw,
    pub noise_sigma: f64,
}

/// Harness cuff geometry. Cuff forces act perpendicular to their segment in
/// the sagittal plane; positive pushes the segment forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessModel {
    pub thigh_cuff_from_hip: f64,
    pub shank_cuff_from_knee: f64,
}

impl From<&ExoParams> for HarnessModel {
    fn from(exo: &ExoParams) -> Self {
        Self {
            thigh_cuff_from_hip: exo.thigh_cuff_from_hip,
            shank_cuff_from_knee: exo.shank_cuff_from_knee,
        }
    }
}

/// Cuff forces (N) in [`CUFF_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuffForces {
    pub forces: [f64; 4],
    /// A damped solve was needed.
    pub regularized: bool,
}

pub type CuffJacobianT = SMatrix<f64, JOINT_COUNT, 4>;

/// `Jᵀ`: column `k` holds the device-ordered joint torques produced by a unit
/// force at cuff `k`.
pub fn cuff_jacobian_transpose(
    chain: &GroundedChain,
    q: &[f64; JOINT_COUNT],
    h: &HarnessModel,
) -> CuffJacobianT {
    let qc = chain.chain_q(q);
    let rows = &chain.chain.rows;
    let thigh_len = rows[1].length;
    let shank_len = rows[0].length;
    // (link, distance from link's proximal chain joint, anterior sign of link normal)
    let stance_thigh = (1usize, thigh_len - h.thigh_cuff_from_hip, -1.0);
    let stance_shank = (0usize, shank_len - h.shank_cuff_from_knee, -1.0);
    let swing_thigh = (3usize, h.thigh_cuff_from_hip, 1.0);
    let swing_shank = (4usize, h.shank_cuff_from_knee, 1.0);
    let cuffs = match chain.stance {
        Side::Left => [stance_thigh, stance_shank, swing_thigh, swing_shank],
        Side::Right => [swing_thigh, swing_shank, stance_thigh, stance_shank],
    };
    let mut jt = CuffJacobianT::zeros();
    for (k, (link, dist, dir)) in cuffs.into_iter().enumerate() {
        let force = dir * chain.chain.link_normal(&qc, link);
        let tau = chain
            .chain
            .point_force_torques(&qc, link, &Vec2::new(dist, 0.0), &force);
        let tau: [f64; JOINT_COUNT] = tau.try_into().expect("six joints");
        let dev = chain_to_device_order(chain.stance, &tau);
        for (i, x) in dev.iter().enumerate() {
            jt[(i, k)] = *x;
        }
    }
    jt
}

/// Minimum-norm cuff forces whose joint torques best reproduce `residual`
/// (least squares over the joints the cuffs can reach).
pub fn interaction_forces(
    residual: &Torques,
    chain: &GroundedChain,
    q: &[f64; JOINT_COUNT],
    h: &HarnessModel,
) -> CuffForces {
    const DAMPING: f64 = 1e-9;
    let jt = cuff_jacobian_transpose(chain, q, h);
    let r = Vector6::from_row_slice(&residual.0);
    let gram: Matrix4<f64> = jt.transpose() * jt;
    let rhs: Vector4<f64> = jt.transpose() * r;
    let well_posed = gram.cholesky().filter(|c| {
        let d = c.l_dirty().diagonal();
        let (lo, hi) = (d.min(), d.max());
        lo > 0.0 && (lo / hi).powi(2) > 1e-14
    });
    let (sol, regularized) = match well_posed {
        Some(c) => (c.solve(&rhs), false),
        None => {
            let damped = gram + Matrix4::identity() * DAMPING;
            let sol = damped
                .cholesky()
                .map(|c| c.solve(&rhs))
                .unwrap_or_else(Vector4::zeros);
            (sol, true)
        }
    };
    CuffForces {
        forces: [sol[0], sol[1], sol[2], sol[3]],
        regularized,
    }
}

/// Reference to the calibration used for a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsRef {
    pub y: [f64; JOINT_COUNT],
    pub ridge_lambda: f64,
    pub sample_count: usize,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub controller: ControllerConfig,
    pub seed: u64,
    pub weights: Option<WeightsRef>,
    pub sample_rate: f64,
    pub samples: usize,
    pub regularized_samples: usize,
}

/// One logged tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSample {
    pub t: f64,
    pub phase: f64,
    pub speed: f64,
    pub contact: [bool; 2],
    /// Insole load sums (N), left then right.
    pub load: [f64; 2],
    pub q: [f64; JOINT_COUNT],
    pub gains: BlendGains,
    pub tau_left: Torques,
    pub tau_right: Torques,
    /// Controller output before the actuation mask.
    pub command: Torques,
    pub applied: Torques,
    /// Compensation target minus applied assistance.
    pub residual: Torques,
    /// Model torques blended with pressure-derived load shares.
    pub truth: Torques,
    pub cuff: [f64; 4],
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub meta: RunMeta,
    pub samples: Vec<RunSample>,
}

/// Inputs of a single trial.
#[derive(Debug, Clone, Copy)]
pub struct Trial<'a> {
    pub scenario: &'a Scenario,
    pub controller: &'a ControllerConfig,
    pub exo: &'a ExoParams,
    pub subject: &'a Anthropometrics,
    pub gait: &'a GaitTuning,
    pub weights: Option<&'a BlendWeights>,
    pub weights_source: Option<&'a str>,
    pub seed: u64,
}

struct Models {
    left: GroundedChain,
    right: GroundedChain,
}

impl Models {
    fn new(exo: &ExoParams, env: &Environment) -> Result<Self> {
        Ok(Self {
            left: build_grounded_chain(exo, Side::Left, env)?,
            right: build_grounded_chain(exo, Side::Right, env)?,
        })
    }

    fn chain(&self, side: Side) -> &GroundedChain {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

pub fn run_trial(trial: &Trial) -> Result<RunRecord> {
    let sc = trial.scenario;
    let cfg = trial.controller;
    sc.validate()?;
    cfg.validate()?;
    let weights = match (cfg.strategy, trial.weights) {
        (Strategy::Blend, None) => {
            return Err(Error::Config(
                "blend strategy requires calibrated weights".into(),
            ));
        }
        (_, Some(w)) => {
            w.validate().map_err(|e| Error::Config(e.to_string()))?;
            Some(w)
        }
        (Strategy::Fsm, None) => None,
    };

    let env = sc.environment();
    let plant = Models::new(trial.exo, &env)?;
    let ctrl_models = if cfg.environment_aware {
        None
    } else {
        Some(Models::new(trial.exo, &Environment::flat())?)
    };
    let harness = HarnessModel::from(trial.exo);
    let profile = sc.gait_profile(trial.gait, trial.subject, trial.exo, trial.seed);
    profile.validate()?;

    let n = sc.sample_count();
    let mut samples = Vec::with_capacity(n);
    let mut fsm: Option<FsmState> = None;
    let mut regularized_samples = 0;
    for k in 0..n {
        let t = k as f64 / sc.sample_rate;
        let g = gait_sample(&profile, t);
        let state = g.state;
        let tau_left = plant.left.compensation_torques(&state);
        let tau_right = plant.right.compensation_torques(&state);
        let (ctrl_left, ctrl_right) = match &ctrl_models {
            None => (tau_left, tau_right),
            Some(m) => (
                m.left.compensation_torques(&state),
                m.right.compensation_torques(&state),
            ),
        };

        let source = match cfg.strategy {
            Strategy::Blend => {
                let w = weights.expect("checked above");
                GainSource::Blend(blend_gains_with(w, &state.q, cfg.clamp))
            }
            Strategy::Fsm => {
                let next = match fsm {
                    None => FsmState::new(stance_label(&g).side(), t),
                    Some(prev) => fsm_step(prev, &g, cfg),
                };
                fsm = Some(next);
                GainSource::Fsm(next.selection)
            }
        };
        let applied = assist_torques(cfg, &ctrl_left, &ctrl_right, source);
        let required = match source {
            GainSource::Blend(gains) => blend_torque(&tau_left, &tau_right, &gains),
            GainSource::Fsm(Side::Left) => tau_left,
            GainSource::Fsm(Side::Right) => tau_right,
        };
        let residual = required.sub(&applied.torque);
        let share = g.left_load_fraction();
        let truth = blend_torque(&tau_left, &tau_right, &BlendGains::from_left(share));
        let stance = if share >= 0.5 {
            Side::Left
        } else {
            Side::Right
        };
        let cuff = interaction_forces(&residual, plant.chain(stance), &state.q, &harness);

        let finite = tau_left.is_finite()
            && tau_right.is_finite()
            && applied.torque.is_finite()
            && residual.is_finite()
            && cuff.forces.iter().all(|f| f.is_finite());
        if !finite {
            return Err(Error::NonFinite { tick: k });
        }
        regularized_samples += usize::from(cuff.regularized);
        samples.push(RunSample {
            t,
            phase: g.phase,
            speed: g.speed,
            contact: g.contact,
            load: [g.pressure_sum(Side::Left), g.pressure_sum(Side::Right)],
            q: state.q,
            gains: applied.gains,
            tau_left,
            tau_right,
            command: applied.command,
            applied: applied.torque,
            residual,
            truth,
            cuff: cuff.forces,
            regularized: cuff.regularized,
        });
    }

    Ok(RunRecord {
        meta: RunMeta {
            schema_version: RECORD_SCHEMA_VERSION,
            scenario: sc.clone(),
            controller: *cfg,
            seed: trial.seed,
            weights: weights.map(|w| WeightsRef {
                y: w.y,
                ridge_lambda: w.ridge_lambda,
                sample_count: w.sample_count,
                source: trial.weights_source.map(str::to_owned),
            }),
            sample_rate: sc.sample_rate,
            samples: n,
            regularized_samples,
        },
        samples,
    })
}

/// Settings for building the trial protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolSettings {
    /// Duration of each speed transition (s).
    pub ramp_s: f64,
    /// Time spent at each intermediate speed level (s).
    pub hold_s: f64,
    pub ramp_trial_duration: f64,
    pub constant_trial_duration: f64,
    /// Flat-ground walking distance (m); sets the flat-ground trial duration.
    pub flat_ground_distance: f64,
    pub metronome_cadence: f64,
    pub slope_deg: f64,
    pub load_mass: f64,
    pub sample_rate: f64,
}

impl Default for ProtocolSettings {
    fn default() -> Self {
        Self {
            ramp_s: 15.0,
            hold_s: 3.0,
            ramp_trial_duration: 90.0,
            constant_trial_duration: 30.0,
            flat_ground_distance: 7.0,
            metronome_cadence: 100.0,
            slope_deg: 10.0,
            load_mass: 10.0,
            sample_rate: 100.0,
        }
    }
}

/// The eight trial conditions, in protocol order.
pub fn protocol_suite(settings: &ProtocolSettings, cadence: &CadenceLaw) -> Vec<Scenario> {
    let s = settings;
    let slope = s.slope_deg.to_radians();
    let full = SpeedProfile::from_sequence(&[0.0, 2.0, 4.0, 6.0, 2.0, 6.0], s.ramp_s, s.hold_s);
    let up = SpeedProfile::from_sequence(&[0.0, 4.0], s.ramp_s, s.hold_s);
    let fg_duration = s.flat_ground_distance / cadence.speed_for_cadence(s.metronome_cadence);

    let tm =
        |n: u8, tag: &str, speed: &SpeedProfile, slope: f64, load: f64, duration: f64| Scenario {
            name: format!("t{n}_{tag}"),
            trial: Some(n),
            ground: Ground::Treadmill,
            slope,
            load_mass: load,
            pacing: Pacing::Treadmill {
                speed: speed.clone(),
            },
            duration,
            sample_rate: s.sample_rate,
        };
    let fg = |n: u8, tag: &str, load: f64| Scenario {
        name: format!("t{n}_{tag}"),
        trial: Some(n),
        ground: Ground::FlatGround,
        slope: 0.0,
        load_mass: load,
        pacing: Pacing::Metronome {
            steps_per_min: s.metronome_cadence,
        },
        duration: fg_duration,
        sample_rate: s.sample_rate,
    };
    let ramp = s.ramp_trial_duration;
    let constant = s.constant_trial_duration;
    vec![
        tm(1, "tm_flat_noload_0-2-4-6-2-6", &full, 0.0, 0.0, ramp),
        tm(2, "tm_slope_noload_0-4", &up, slope, 0.0, ramp),
        tm(3, "tm_flat_load_0-2-4-6-2-6", &full, 0.0, s.load_mass, ramp),
        tm(4, "tm_slope_noload_0-4", &up, slope, 0.0, ramp),
        tm(
            5,
            "tm_flat_noload_4",
            &SpeedProfile::constant(4.0),
            0.0,
            0.0,
            constant,
        ),
        tm(
            6,
            "tm_flat_load_4",
            &SpeedProfile::constant(4.0),
            0.0,
            s.load_mass,
            constant,
        ),
        fg(7, "fg_flat_noload_metronome", 0.0),
        fg(8, "fg_flat_load_metronome", s.load_mass),
    ]
}

/// The three walking conditions of the preliminary passive-ankle experiment:
/// 1 km/h and 3.5 km/h on the treadmill for 30 s, and 7 m overground.
pub fn preliminary_suite(settings: &ProtocolSettings, cadence: &CadenceLaw) -> Vec<Scenario> {
    let d = settings.constant_trial_duration;
    let mut t1 = Scenario::constant_speed("t1_kmh", 1.0, d);
    let mut t35 = Scenario::constant_speed("t3.5_kmh", 3.5, d);
    let mut ss = Scenario::flat_ground(
        "ss_ground",
        settings.metronome_cadence,
        settings.flat_ground_distance / cadence.speed_for_cadence(settings.metronome_cadence),
    );
    for s in [&mut t1, &mut t35, &mut ss] {
        s.sample_rate = settings.sample_rate;
    }
    vec![t1, t35, ss]
}

fn torque_columns(prefix: &str) -> impl Iterator<Item = String> + '_ {
    DEVICE_JOINT_NAMES
        .iter()
        .map(move |j| format!("{prefix}_{j}"))
}

/// Column names of the per-sample CSV, in order.
pub fn record_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "t",
        "phase",
        "speed",
        "contact_l",
        "contact_r",
        "load_l",
        "load_r",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(torque_columns("q"));
    cols.push("gamma_l".into());
    cols.push("gamma_r".into());
    for p in [
        "tau_lfg", "tau_rfg", "command", "applied", "residual", "truth",
    ] {
        cols.extend(torque_columns(p));
    }
    cols.extend(CUFF_NAMES.iter().map(|c| format!("cuff_{c}")));
    cols.push("regularized".into());
    cols
}

impl RunRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 + self.samples.len() * 900);
        out.push_str(&record_columns().join(","));
        out.push('\n');
        for s in &self.samples {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                s.t,
                s.phase,
                s.speed,
                u8::from(s.contact[0]),
                u8::from(s.contact[1]),
                s.load[0],
                s.load[1]
            );
            for x in &s.q {
                let _ = write!(out, ",{x}");
            }
            let _ = write!(out, ",{},{}", s.gains.left, s.gains.right);
            for tau in [
                &s.tau_left,
                &s.tau_right,
                &s.command,
                &s.applied,
                &s.residual,
                &s.truth,
            ] {
                for x in &tau.0 {
                    let _ = write!(out, ",{x}");
                }
            }
            for x in &s.cuff {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{}", u8::from(s.regularized));
        }
        out
    }

    pub fn meta_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.meta).expect("meta serializes");
        s.push('\n');
        s
    }

    /// Parses a CSV produced by [`RunRecord::to_csv`].
    pub fn from_csv(meta: RunMeta, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty CSV".into()))?;
        let expected = record_columns();
        let found: Vec<&str> = header.split(',').collect();
        if found != expected {
            let diff: Vec<String> = expected
                .iter()
                .zip(found.iter().chain(std::iter::repeat(&"<missing>")))
                .filter(|(e, f)| e.as_str() != **f)
                .map(|(e, _)| e.clone())
                .collect();
            return Err(Error::SchemaMismatch { fields: diff });
        }
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("row {}: {e}", lineno + 2)))?;
            if vals.len() != expected.len() {
                return Err(Error::Format(format!(
                    "row {} has {} fields",
                    lineno + 2,
                    vals.len()
                )));
            }
            let mut it = vals.into_iter();
            let mut next = || it.next().expect("length checked");
            let t = next();
            let phase = next();
            let speed = next();
            let contact = [next() != 0.0, next() != 0.0];
            let load = [next(), next()];
            let q: [f64; JOINT_COUNT] = std::array::from_fn(|_| next());
            let gains = BlendGains {
                left: next(),
                right: next(),
            };
            let mut tq = || Torques(std::array::from_fn(|_| next()));
            let (tau_left, tau_right, command, applied, residual, truth) =
                (tq(), tq(), tq(), tq(), tq(), tq());
            let cuff: [f64; 4] = std::array::from_fn(|_| next());
            let regularized = next() != 0.0;
            samples.push(RunSample {
                t,
                phase,
                speed,
                contact,
                load,
                q,
                gains,
                tau_left,
                tau_right,
                command,
                applied,
                residual,
                truth,
                cuff,
                regularized,
            });
        }
        Ok(Self { meta, samples })
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&csv, self.to_csv())?;
        std::fs::write(&json, self.meta_json())?;
        Ok((csv, json))
    }

    /// Reads a record from its CSV path; the JSON sidecar must sit beside it.
    pub fn read(csv_path: &Path) -> Result<Self> {
        let meta: RunMeta =
            serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json"))?)?;
        Self::from_csv(meta, &std::fs::read_to_string(csv_path)?)
    }

    /// Content-stable file stem: condition, strategy, ankle setting and seed.
    pub fn stem(&self) -> String {
        trial_stem(&self.meta.scenario, &self.meta.controller, self.meta.seed)
    }
}

pub fn trial_stem(sc: &Scenario, cfg: &ControllerConfig, seed: u64) -> String {
    format!(
        "{}__{}__ankle-{}__seed{}",
        sc.name,
        cfg.strategy.tag(),
        if cfg.ankle_actuated { "on" } else { "off" },
        seed
    )
}
