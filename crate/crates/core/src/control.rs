//! Blend assistance, its least-squares calibration, the FSM baseline, and the
//! ankle actuation mask.
//!
//! The blend strategy mixes the torques of the left- and right-grounded models
//! with gains that are an affine function of the joint angles:
//! `γ_L = ½(clamp(Yᵀq) + 1)`, `γ_R = 1 − γ_L`, `τ = γ_L τ_L + γ_R τ_R`.
//! `Y` is fitted by ridge regression of the stance class (+1 left, −1 right)
//! on joint angles, without an intercept.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::gait::GaitSample;
use crate::model::{Side, Torques, DEVICE_JOINT_NAMES, JOINT_COUNT, L_ANKLE, R_ANKLE};

pub const WEIGHTS_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Regression weights `Y` (1/rad), device joint order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    pub schema_version: u32,
    pub joint_order: Vec<String>,
    pub y: [f64; JOINT_COUNT],
    pub ridge_lambda: f64,
    pub sample_count: usize,
    pub residual_norm: f64,
    /// Whether joint angles were standardized before fitting (never, currently).
    pub standardized: bool,
}

impl BlendWeights {
    pub fn from_y(y: [f64; JOINT_COUNT]) -> Self {
        Self {
            schema_version: WEIGHTS_SCHEMA_VERSION,
            joint_order: DEVICE_JOINT_NAMES.iter().map(|s| s.to_string()).collect(),
            y,
            ridge_lambda: 0.0,
            sample_count: 0,
            residual_norm: 0.0,
            standardized: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Violations::default();
        v.check(self.y.iter().all(|x| x.is_finite()), || {
            "Y must be finite".into()
        });
        v.check(
            self.joint_order
                .iter()
                .map(String::as_str)
                .eq(DEVICE_JOINT_NAMES),
            || {
                format!(
                    "joint order {:?} does not match device order {:?}",
                    self.joint_order, DEVICE_JOINT_NAMES
                )
            },
        );
        v.check(self.schema_version == WEIGHTS_SCHEMA_VERSION, || {
            format!("unsupported weights schema_version {}", self.schema_version)
        });
        v.finish("blend weights")
    }

    /// Text artifact (TOML).
    pub fn to_text(&self) -> String {
        let mut out = String::from("# blend regression weights, one per device joint (1/rad)\n");
        out.push_str(&toml::to_string(self).expect("weights serialize"));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let w: BlendWeights =
            toml::from_str(text).map_err(|e| Error::Config(format!("weights artifact: {e}")))?;
        w.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(w)
    }

    pub fn dot(&self, q: &[f64; JOINT_COUNT]) -> f64 {
        self.y.iter().zip(q).map(|(a, b)| a * b).sum()
    }
}

/// Fits `Y = argmin ‖QY − c‖² + λ‖Y‖²` through the normal equations.
pub fn train_blend_weights(
    q: &[[f64; JOINT_COUNT]],
    c: &[f64],
    ridge: f64,
) -> Result<BlendWeights> {
    if q.len() != c.len() {
        return Err(Error::LengthMismatch {
            expected: q.len(),
            got: c.len(),
        });
    }
    if q.len() < JOINT_COUNT {
        return Err(Error::InsufficientData {
            rows: q.len(),
            cols: JOINT_COUNT,
        });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Config(
            "ridge parameter must be finite and >= 0".into(),
        ));
    }
    if let Some(bad) = c.iter().find(|&&x| x != 1.0 && x != -1.0) {
        return Err(Error::Config(format!(
            "stance labels must be +1 or -1, found {bad}"
        )));
    }
    if q.iter().all(|row| row == &q[0]) {
        return Err(Error::DegenerateDataset);
    }

    let n = JOINT_COUNT;
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (row, &label) in q.iter().zip(c) {
        for i in 0..n {
            rhs[i] += row[i] * label;
            for j in 0..n {
                gram[(i, j)] += row[i] * row[j];
            }
        }
    }
    if ridge == 0.0 {
        let sv = gram.singular_values();
        let max = sv.max();
        if max == 0.0 || sv.min() <= max * 1e-12 {
            return Err(Error::Singular);
        }
    } else {
        for i in 0..n {
            gram[(i, i)] += ridge;
        }
    }
    let chol = gram.cholesky().ok_or(Error::Singular)?;
    let sol = chol.solve(&rhs);
    let y: [f64; JOINT_COUNT] = std::array::from_fn(|i| sol[i]);

    let residual_norm = q
        .iter()
        .zip(c)
        .map(|(row, &label)| {
            let r: f64 = row.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() - label;
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(BlendWeights {
        ridge_lambda: ridge,
        sample_count: q.len(),
        residual_norm,
        ..BlendWeights::from_y(y)
    })
}

/// How `Yᵀq` is mapped into [−1, 1] before computing the gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampPolicy {
    /// Hard clamp to [−1, 1].
    #[default]
    Clamp,
    /// Smooth saturation with `tanh`.
    Tanh,
}

impl ClampPolicy {
    pub fn apply(self, s: f64) -> f64 {
        match self {
            ClampPolicy::Clamp => s.clamp(-1.0, 1.0),
            ClampPolicy::Tanh => s.tanh(),
        }
    }
}

/// Convex gain pair; `left + right == 1` holds exactly in floating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendGains {
    pub left: f64,
    pub right: f64,
}

impl BlendGains {
    /// Builds the pair from `γ_L`, arranging the arithmetic so the sum is exactly 1.
    pub fn from_left(g: f64) -> Self {
        let g = g.clamp(0.0, 1.0);
        if g >= 0.5 {
            // 1 - g is exact for g in [0.5, 1]
            Self {
                left: g,
                right: 1.0 - g,
            }
        } else {
            let right = 1.0 - g;
            Self {
                left: 1.0 - right,
                right,
            }
        }
    }

    pub fn select(side: Side) -> Self {
        match side {
            Side::Left => Self {
                left: 1.0,
                right: 0.0,
            },
            Side::Right => Self {
                left: 0.0,
                right: 1.0,
            },
        }
    }
}

pub fn blend_gains(weights: &BlendWeights, q: &[f64; JOINT_COUNT]) -> BlendGains {
    blend_gains_with(weights, q, ClampPolicy::Clamp)
}

pub fn blend_gains_with(
    weights: &BlendWeights,
    q: &[f64; JOINT_COUNT],
    policy: ClampPolicy,
) -> BlendGains {
    let s = policy.apply(weights.dot(q));
    BlendGains::from_left(0.5 * (s + 1.0))
}

#[inline]
fn mix(l: f64, r: f64, g: &BlendGains) -> f64 {
    // exact at g = (1, 0) and for l == r
    let v = l + g.right * (r - l);
    v.clamp(l.min(r), l.max(r))
}

/// `γ_L τ_L + γ_R τ_R`.
pub fn blend_torque(left: &Torques, right: &Torques, g: &BlendGains) -> Torques {
    Torques(std::array::from_fn(|i| mix(left.0[i], right.0[i], g)))
}

/// Slice form of [`blend_torque`].
pub fn blend_vectors(left: &[f64], right: &[f64], g: &BlendGains) -> Result<Vec<f64>> {
    if left.len() != right.len() {
        return Err(Error::LengthMismatch {
            expected: left.len(),
            got: right.len(),
        });
    }
    Ok(left
        .iter()
        .zip(right)
        .map(|(&l, &r)| mix(l, r, g))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Blend,
    Fsm,
}

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Blend => "blend",
            Strategy::Fsm => "fsm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub strategy: Strategy,
    pub ankle_actuated: bool,
    /// Insole load (N) separating loaded from unloaded feet for the FSM.
    pub fsm_threshold: f64,
    /// Minimum time between FSM switches (s).
    pub fsm_dwell: f64,
    pub clamp: ClampPolicy,
    /// Whether the controller's models include the known slope and load.
    pub environment_aware: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Blend,
            ankle_actuated: false,
            fsm_threshold: 50.0,
            fsm_dwell: 0.2,
            clamp: ClampPolicy::Clamp,
            environment_aware: true,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let mut v = Violations::default();
        v.check(self.fsm_threshold > 0.0, || {
            "fsm_threshold must be > 0".into()
        });
        v.check(self.fsm_dwell >= 0.0, || "fsm_dwell must be >= 0".into());
        v.finish("controller config")
    }

    /// Per-joint actuation; hips and knees are always actuated.
    pub fn actuation_mask(&self) -> [bool; JOINT_COUNT] {
        let mut mask = [true; JOINT_COUNT];
        mask[L_ANKLE] = self.ankle_actuated;
        mask[R_ANKLE] = self.ankle_actuated;
        mask
    }
}

/// Which grounded model the FSM currently applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsmState {
    pub selection: Side,
    pub last_switch: f64,
}

impl FsmState {
    pub fn new(selection: Side, t: f64) -> Self {
        Self {
            selection,
            last_switch: t,
        }
    }
}

/// Switches to the contralateral model once it carries the load alone and the
/// dwell time has elapsed.
pub fn fsm_step(state: FsmState, sample: &GaitSample, cfg: &ControllerConfig) -> FsmState {
    let ipsi = sample.pressure_sum(state.selection);
    let contra = sample.pressure_sum(state.selection.other());
    let dwell_ok = sample.t - state.last_switch >= cfg.fsm_dwell;
    if contra > cfg.fsm_threshold && ipsi < cfg.fsm_threshold && dwell_ok {
        FsmState {
            selection: state.selection.other(),
            last_switch: sample.t.max(state.last_switch),
        }
    } else {
        state
    }
}

/// Gains from the active strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainSource {
    Blend(BlendGains),
    Fsm(Side),
}

impl GainSource {
    pub fn gains(&self) -> BlendGains {
        match *self {
            GainSource::Blend(g) => g,
            GainSource::Fsm(side) => BlendGains::select(side),
        }
    }
}

/// Controller output before and after the actuation mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedTorques {
    pub torque: Torques,
    /// Unmasked command.
    pub command: Torques,
    pub mask: [bool; JOINT_COUNT],
    pub gains: BlendGains,
}

pub fn assist_torques(
    cfg: &ControllerConfig,
    left: &Torques,
    right: &Torques,
    source: GainSource,
) -> AppliedTorques {
    let gains = source.gains();
    let command = match source {
        GainSource::Blend(g) => blend_torque(left, right, &g),
        GainSource::Fsm(Side::Left) => *left,
        GainSource::Fsm(Side::Right) => *right,
    };
    let mask = cfg.actuation_mask();
    let torque = Torques(std::array::from_fn(|i| {
        if mask[i] {
            command.0[i]
        } else {
            0.0
        }
    }));
    AppliedTorques {
        torque,
        command,
        mask,
        gains,
    }
}

/// Human-readable one-line summary of a weights artifact.
pub fn describe_weights(w: &BlendWeights) -> String {
    let mut s = String::new();
    for (name, y) in w.joint_order.iter().zip(&w.y) {
        let _ = write!(s, "{name}={y:.4} ");
    }
    let _ = write!(
        s,
        "(n={}, residual={:.3}, lambda={:e})",
        w.sample_count, w.residual_norm, w.ridge_lambda
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::{gait_sample, GaitProfile};

    fn torques(v: f64) -> Torques {
        Torques([v; JOINT_COUNT])
    }

    #[test]
    fn zero_weights_split_evenly() {
        let g = blend_gains(&BlendWeights::from_y([0.0; 6]), &[0.3; 6]);
        assert_eq!((g.left, g.right), (0.5, 0.5));
    }

    #[test]
    fn gain_boundaries_and_clamp() {
        let w = BlendWeights::from_y([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let g = blend_gains(&w, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!((g.left, g.right), (1.0, 0.0));
        let g = blend_gains(&w, &[3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!((g.left, g.right), (1.0, 0.0));
        let g = blend_gains(&w, &[-3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!((g.left, g.right), (0.0, 1.0));
        let g = blend_gains_with(&w, &[3.0, 0.0, 0.0, 0.0, 0.0, 0.0], ClampPolicy::Tanh);
        assert!(g.left < 1.0 && g.left > 0.99);
    }

    #[test]
    fn blend_endpoints() {
        let l = Torques([1.5, -2.0, 3.25, 0.1, 7.0, -9.0]);
        let r = Torques([4.0, 2.0, -1.0, 0.3, -7.0, 1.0]);
        assert_eq!(blend_torque(&l, &r, &BlendGains::select(Side::Left)), l);
        assert_eq!(blend_torque(&l, &l, &BlendGains::from_left(0.3137)), l);
        let z = blend_torque(&torques(10.0), &torques(-10.0), &BlendGains::from_left(0.5));
        assert_eq!(z, Torques::ZERO);
        assert!(blend_vectors(&[1.0, 2.0], &[1.0], &BlendGains::from_left(0.5)).is_err());
    }

    #[test]
    fn fsm_switching_rules() {
        let cfg = ControllerConfig::default();
        let mut s = gait_sample(&GaitProfile::constant_speed(3.5), 1.0);
        s.pressure = [[0.0; 4], [75.0; 4]];
        let st = FsmState::new(Side::Left, 0.0);
        assert_eq!(fsm_step(st, &s, &cfg).selection, Side::Right);
        assert_eq!(fsm_step(st, &s, &cfg).last_switch, 1.0);

        s.pressure = [[75.0; 4], [75.0; 4]];
        assert_eq!(fsm_step(st, &s, &cfg).selection, Side::Left);

        s.pressure = [[0.0; 4], [75.0; 4]];
        let recent = FsmState::new(Side::Left, 0.95);
        assert_eq!(fsm_step(recent, &s, &cfg), recent);
    }

    #[test]
    fn fsm_output_is_hard_selection() {
        let cfg = ControllerConfig {
            ankle_actuated: true,
            ..Default::default()
        };
        let l = Torques([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = torques(-1.0);
        assert_eq!(
            assist_torques(&cfg, &l, &r, GainSource::Fsm(Side::Left)).torque,
            l
        );
        assert_eq!(
            assist_torques(&cfg, &l, &r, GainSource::Fsm(Side::Right)).torque,
            r
        );
    }

    #[test]
    fn passive_ankles_are_zeroed() {
        let cfg = ControllerConfig::default();
        let out = assist_torques(
            &cfg,
            &torques(10.0),
            &torques(20.0),
            GainSource::Blend(BlendGains::from_left(0.5)),
        );
        assert_eq!(out.torque.0[L_ANKLE], 0.0);
        assert_eq!(out.torque.0[R_ANKLE], 0.0);
        assert_eq!(out.torque.0[0], 15.0);
        assert_eq!(out.command.0[L_ANKLE], 15.0);
    }

    #[test]
    fn ols_is_scale_equivariant() {
        let data =
            crate::gait::make_calibration_dataset(&GaitProfile::constant_speed(3.5), 10.0, 100.0)
                .unwrap();
        let a = train_blend_weights(&data.q, &data.labels, 0.0).unwrap();
        let scaled: Vec<[f64; 6]> = data.q.iter().map(|r| r.map(|x| 2.0 * x)).collect();
        let b = train_blend_weights(&scaled, &data.labels, 0.0).unwrap();
        for i in 0..6 {
            assert!((b.y[i] - 0.5 * a.y[i]).abs() <= 1e-9 * a.y[i].abs().max(1.0));
        }
    }

    #[test]
    fn training_errors() {
        let rows = vec![[0.1; 6]; 10];
        assert!(matches!(
            train_blend_weights(&rows, &[1.0; 10], 1e-8),
            Err(Error::DegenerateDataset)
        ));
        let mut rank1: Vec<[f64; 6]> = (0..10)
            .map(|k| [k as f64, 0.0, 0.0, 0.0, 0.0, 0.0])
            .collect();
        assert!(matches!(
            train_blend_weights(&rank1, &[1.0; 10], 0.0),
            Err(Error::Singular)
        ));
        assert!(train_blend_weights(&rank1, &[1.0; 10], 1e-3).is_ok());
        rank1.truncate(3);
        assert!(matches!(
            train_blend_weights(&rank1, &[1.0; 3], 1.0),
            Err(Error::InsufficientData { .. })
        ));
        assert!(train_blend_weights(&rows, &[0.5; 10], 1.0).is_err());
    }

    #[test]
    fn weights_artifact_roundtrip() {
        let mut w = BlendWeights::from_y([0.1, -2.5, 1e-3, 3.0, 0.0, -0.7]);
        w.sample_count = 3000;
        w.ridge_lambda = 1e-8;
        let back = BlendWeights::from_text(&w.to_text()).unwrap();
        assert_eq!(back, w);
        let bad = w.to_text().replace("l_hip", "hip_l");
        assert!(BlendWeights::from_text(&bad).is_err());
    }
}
