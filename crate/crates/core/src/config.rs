//! TOML configuration with documented defaults.
//!
//! Every field may be omitted. An empty document is the default config:
//!
//! | Path | Default |
//! |---|---|
//! | `seed` | 0 |
//! | `output_dir` | `"out"` |
//! | `exo` | 15 kg device sized for a 1.75 m wearer |
//! | `subject.height`, `subject.mass` | 1.75 m, 69.4 kg |
//! | `environment.slope_deg`, `.load_mass`, `.gravity` | 0°, 0 kg, 9.81 m/s² |
//! | `gait.noise_sigma` | 0 N (noise off) |
//! | `controller.strategy` | `"blend"` |
//! | `controller.ankle_actuated` | false |
//! | `controller.fsm_threshold`, `.fsm_dwell` | 50 N, 0.2 s |
//! | `trial.name` | `"t3.5_kmh"` |
//! | `trial.ground` | `"treadmill"` |
//! | `trial.speeds_kmh` | `[3.5]` (several values ramp between levels) |
//! | `trial.ramp_s`, `.hold_s` | 15 s, 3 s |
//! | `trial.steps_per_min` | 100 (flat ground only) |
//! | `trial.duration`, `.sample_rate` | 30 s, 100 Hz |
//! | `calibration.speed_kmh` | 3.5 |
//! | `calibration.duration`, `.sample_rate` | 30 s, 100 Hz |
//! | `calibration.ridge` | 1e-8 |
//! | `protocol` | 15 s ramps, 3 s holds, 90 s / 30 s trials, 7 m overground, 100 steps/min, 10° slope, 10 kg load |

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::control::{ControllerConfig, DEFAULT_RIDGE};
use crate::error::{Error, Result};
use crate::gait::{Anthropometrics, Pacing, SpeedProfile};
use crate::model::{Environment, ExoParams, GRAVITY};
use crate::sim::{GaitTuning, Ground, ProtocolSettings, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub slope_deg: f64,
    pub load_mass: f64,
    pub gravity: f64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            slope_deg: 0.0,
            load_mass: 0.0,
            gravity: GRAVITY,
        }
    }
}

impl EnvironmentConfig {
    pub fn environment(&self) -> Environment {
        let mut env = Environment::flat()
            .with_slope(self.slope_deg.to_radians())
            .with_load(self.load_mass);
        env.gravity = self.gravity;
        env
    }
}

/// The single trial executed by `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub name: String,
    pub ground: Ground,
    pub speeds_kmh: Vec<f64>,
    pub ramp_s: f64,
    pub hold_s: f64,
    pub steps_per_min: f64,
    pub duration: f64,
    pub sample_rate: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            name: "t3.5_kmh".into(),
            ground: Ground::Treadmill,
            speeds_kmh: vec![3.5],
            ramp_s: 15.0,
            hold_s: 3.0,
            steps_per_min: 100.0,
            duration: 30.0,
            sample_rate: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Constant walking speed of the calibration walk (km/h).
    pub speed_kmh: f64,
    pub duration: f64,
    pub sample_rate: f64,
    pub ridge: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            speed_kmh: 3.5,
            duration: 30.0,
            sample_rate: 100.0,
            ridge: DEFAULT_RIDGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FullConfig {
    /// Any u64; values above `i64::MAX` are written as decimal strings.
    #[serde(with = "seed_repr")]
    pub seed: u64,
    pub output_dir: PathBuf,
    pub exo: ExoParams,
    pub subject: Anthropometrics,
    pub environment: EnvironmentConfig,
    pub gait: GaitTuning,
    pub controller: ControllerConfig,
    pub trial: TrialConfig,
    pub calibration: CalibrationConfig,
    pub protocol: ProtocolSettings,
}

impl Default for FullConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            exo: ExoParams::default(),
            subject: Anthropometrics::default(),
            environment: EnvironmentConfig::default(),
            gait: GaitTuning::default(),
            controller: ControllerConfig::default(),
            trial: TrialConfig::default(),
            calibration: CalibrationConfig::default(),
            protocol: ProtocolSettings::default(),
        }
    }
}

mod seed_repr {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => u64::try_from(v).map_err(|_| de::Error::custom("seed must be >= 0")),
            Repr::Text(t) => t
                .parse()
                .map_err(|_| de::Error::custom("seed must be a u64")),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.chars().count(), |i| before[i + 1..].chars().count())
        + 1;
    (line, column)
}

/// Parses and validates a configuration document.
pub fn load_config(text: &str) -> Result<FullConfig> {
    let cfg: FullConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().to_owned(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

struct FieldCheck(Option<Error>);

impl FieldCheck {
    fn check(&mut self, ok: bool, path: &str, message: &str) {
        if !ok && self.0.is_none() {
            self.0 = Some(Error::Field {
                path: path.into(),
                message: message.into(),
            });
        }
    }

    fn nested(&mut self, path: &str, r: Result<()>) {
        if let Err(e) = r {
            let message = match e {
                Error::Validation { violations, .. } => violations.join("; "),
                other => other.to_string(),
            };
            self.check(false, path, &message);
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl FullConfig {
    /// Validates every section; the error names the first offending field.
    pub fn validate(&self) -> Result<()> {
        let mut c = FieldCheck(None);
        c.nested("exo", self.exo.validate());
        c.check(
            positive(self.subject.height),
            "subject.height",
            "must be > 0",
        );
        c.check(positive(self.subject.mass), "subject.mass", "must be > 0");
        let env = &self.environment;
        c.check(
            env.slope_deg.abs() < 45.0,
            "environment.slope_deg",
            "must lie in (-45, 45)",
        );
        c.check(
            env.load_mass >= 0.0 && env.load_mass.is_finite(),
            "environment.load_mass",
            "must be >= 0",
        );
        c.check(
            env.gravity >= 0.0 && env.gravity.is_finite(),
            "environment.gravity",
            "must be >= 0",
        );
        c.check(
            self.gait.noise_sigma >= 0.0,
            "gait.noise_sigma",
            "must be >= 0",
        );
        let cad = &self.gait.cadence;
        c.check(
            positive(cad.coefficient),
            "gait.cadence.coefficient",
            "must be > 0",
        );
        c.check(
            positive(cad.min_steps_per_min),
            "gait.cadence.min_steps_per_min",
            "must be > 0",
        );
        c.check(
            cad.max_steps_per_min >= cad.min_steps_per_min,
            "gait.cadence.max_steps_per_min",
            "must be >= min_steps_per_min",
        );
        let st = &self.gait.stance;
        c.check(
            st.min > 0.5 && st.min <= st.max,
            "gait.stance.min",
            "must lie in (0.5, max]",
        );
        c.check(st.max <= 0.8, "gait.stance.max", "must be <= 0.8");
        c.check(
            positive(self.controller.fsm_threshold),
            "controller.fsm_threshold",
            "must be > 0",
        );
        c.check(
            self.controller.fsm_dwell >= 0.0,
            "controller.fsm_dwell",
            "must be >= 0",
        );
        let t = &self.trial;
        c.check(!t.name.is_empty(), "trial.name", "must not be empty");
        c.check(
            t.name
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || "._-".contains(ch)),
            "trial.name",
            "may only contain ASCII letters, digits, '.', '_' and '-'",
        );
        c.check(
            !t.speeds_kmh.is_empty(),
            "trial.speeds_kmh",
            "must list at least one speed",
        );
        c.check(
            t.speeds_kmh.iter().all(|v| *v >= 0.0 && v.is_finite()),
            "trial.speeds_kmh",
            "speeds must be >= 0",
        );
        c.check(positive(t.ramp_s), "trial.ramp_s", "must be > 0");
        c.check(t.hold_s >= 0.0, "trial.hold_s", "must be >= 0");
        c.check(
            positive(t.steps_per_min),
            "trial.steps_per_min",
            "must be > 0",
        );
        c.check(positive(t.duration), "trial.duration", "must be > 0");
        c.check(positive(t.sample_rate), "trial.sample_rate", "must be > 0");
        let cal = &self.calibration;
        c.check(
            positive(cal.speed_kmh),
            "calibration.speed_kmh",
            "must be > 0",
        );
        c.check(
            positive(cal.duration),
            "calibration.duration",
            "must be > 0",
        );
        c.check(
            positive(cal.sample_rate),
            "calibration.sample_rate",
            "must be > 0",
        );
        c.check(cal.ridge >= 0.0, "calibration.ridge", "must be >= 0");
        let p = &self.protocol;
        c.check(positive(p.ramp_s), "protocol.ramp_s", "must be > 0");
        c.check(p.hold_s >= 0.0, "protocol.hold_s", "must be >= 0");
        c.check(
            positive(p.ramp_trial_duration),
            "protocol.ramp_trial_duration",
            "must be > 0",
        );
        c.check(
            positive(p.constant_trial_duration),
            "protocol.constant_trial_duration",
            "must be > 0",
        );
        c.check(
            positive(p.flat_ground_distance),
            "protocol.flat_ground_distance",
            "must be > 0",
        );
        c.check(
            positive(p.metronome_cadence),
            "protocol.metronome_cadence",
            "must be > 0",
        );
        c.check(
            p.slope_deg.abs() < 45.0,
            "protocol.slope_deg",
            "must lie in (-45, 45)",
        );
        c.check(p.load_mass >= 0.0, "protocol.load_mass", "must be >= 0");
        c.check(
            positive(p.sample_rate),
            "protocol.sample_rate",
            "must be > 0",
        );
        match c.0 {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The `run` trial with this config's environment applied.
    pub fn scenario(&self) -> Scenario {
        let t = &self.trial;
        let pacing = match t.ground {
            Ground::Treadmill => Pacing::Treadmill {
                speed: if t.speeds_kmh.len() == 1 {
                    SpeedProfile::constant(t.speeds_kmh[0])
                } else {
                    SpeedProfile::from_sequence(&t.speeds_kmh, t.ramp_s, t.hold_s)
                },
            },
            Ground::FlatGround => Pacing::Metronome {
                steps_per_min: t.steps_per_min,
            },
        };
        Scenario {
            name: t.name.clone(),
            trial: None,
            ground: t.ground,
            slope: self.environment.slope_deg.to_radians(),
            load_mass: self.environment.load_mass,
            pacing,
            duration: t.duration,
            sample_rate: t.sample_rate,
        }
    }
}
