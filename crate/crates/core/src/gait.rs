//! Deterministic synthetic walking: joint kinematics, foot contact and insole
//! pressures as pure functions of a [`GaitProfile`] and time.
//!
//! Joint angles are three-harmonic Fourier series fitted to normative sagittal
//! gait curves, scaled with walking speed. Gait phase is the exact integral of
//! the cadence law over the piecewise-linear speed profile, so velocities and
//! accelerations are analytic.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};
use crate::model::{JointState, Side, GRAVITY, JOINT_COUNT};

/// Conversion factor km/h → m/s.
pub const KMH: f64 = 1.0 / 3.6;

/// Fourier coefficients `[a0, a1, b1, a2, b2, a3, b3]` (rad) of hip flexion,
/// knee flexion and ankle dorsiflexion over one stride, heel strike at phase 0.
///
/// Jointly fitted to normative curves with two extra penalties over the stance
/// window: variation of the trunk angle implied by a flat stance foot, and the
/// angular accelerations of the stance shank, thigh and trunk. Without them the
/// flat-foot grounded model sees a trunk swinging through ~60° per step.
const HIP: [f64; 7] = [
    0.24189, 0.19516, -0.17657, -0.03725, -0.00061, -0.00881, 0.00671,
];
const KNEE: [f64; 7] = [
    0.40825, 0.06731, -0.26998, -0.14995, 0.01218, -0.02049, 0.04660,
];
const ANKLE: [f64; 7] = [
    0.00671, -0.10796, -0.02810, -0.07320, -0.00347, -0.01525, 0.02766,
];

/// Value and first two phase derivatives of a Fourier series.
fn fourier(c: &[f64; 7], phase: f64) -> (f64, f64, f64) {
    let mut v = c[0];
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for k in 1..=3 {
        let w = TAU * k as f64;
        let (s, co) = (w * phase).sin_cos();
        let (a, b) = (c[2 * k - 1], c[2 * k]);
        v += a * co + b * s;
        d1 += w * (-a * s + b * co);
        d2 += -w * w * (a * co + b * s);
    }
    (v, d1, d2)
}

/// Piecewise-linear speed schedule (km/h), held constant after the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    /// `(time s, speed km/h)` pairs with strictly increasing times, first at t = 0.
    pub breakpoints: Vec<(f64, f64)>,
}

impl SpeedProfile {
    pub fn constant(kmh: f64) -> Self {
        Self {
            breakpoints: vec![(0.0, kmh)],
        }
    }

    /// Holds each level for `hold_s`, moving between levels with linear ramps
    /// of `ramp_s`. The last level is held indefinitely.
    pub fn from_sequence(levels_kmh: &[f64], ramp_s: f64, hold_s: f64) -> Self {
        let mut breakpoints = Vec::with_capacity(2 * levels_kmh.len());
        let mut t = 0.0;
        for (i, &v) in levels_kmh.iter().enumerate() {
            if i > 0 {
                t += ramp_s;
            }
            breakpoints.push((t, v));
            if i + 1 < levels_kmh.len() && hold_s > 0.0 {
                t += hold_s;
                breakpoints.push((t, v));
            }
        }
        Self { breakpoints }
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Violations::default();
        v.check(!self.breakpoints.is_empty(), || {
            "speed profile is empty".into()
        });
        if let Some(first) = self.breakpoints.first() {
            v.check(first.0 == 0.0, || {
                "first breakpoint must be at t = 0".into()
            });
        }
        for w in self.breakpoints.windows(2) {
            v.check(w[1].0 > w[0].0, || "ramp durations must be > 0".into());
        }
        for &(t, s) in &self.breakpoints {
            v.check(t.is_finite() && s.is_finite() && s >= 0.0, || {
                format!("speed {s} km/h at t = {t} must be finite and >= 0")
            });
        }
        v.finish("speed profile")
    }

    /// Time of the last breakpoint.
    pub fn settle_time(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.0)
    }

    pub fn max_kmh(&self) -> f64 {
        self.breakpoints.iter().fold(0.0, |m, b| m.max(b.1))
    }

    /// Index of the segment containing `t` and its (start time, start speed m/s, accel m/s²).
    fn segment(&self, t: f64) -> (usize, f64, f64, f64) {
        let b = &self.breakpoints;
        let i = b.partition_point(|p| p.0 <= t).saturating_sub(1);
        if i + 1 >= b.len() {
            return (i, b[i].0, b[i].1 * KMH, 0.0);
        }
        let (t0, v0) = b[i];
        let (t1, v1) = b[i + 1];
        (i, t0, v0 * KMH, (v1 - v0) * KMH / (t1 - t0))
    }

    /// Speed (m/s) and its time derivative at `t`.
    pub fn speed_and_accel(&self, t: f64) -> (f64, f64) {
        let (_, t0, v0, a) = self.segment(t);
        ((v0 + a * (t - t0)).max(0.0), a)
    }
}

/// Cadence law `steps/min = coefficient · sqrt(speed m/s)`, clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CadenceLaw {
    pub coefficient: f64,
    pub min_steps_per_min: f64,
    pub max_steps_per_min: f64,
}

impl Default for CadenceLaw {
    fn default() -> Self {
        Self {
            coefficient: 96.0,
            min_steps_per_min: 40.0,
            max_steps_per_min: 140.0,
        }
    }
}

impl CadenceLaw {
    pub fn steps_per_min(&self, v: f64) -> f64 {
        (self.coefficient * v.max(0.0).sqrt()).clamp(self.min_steps_per_min, self.max_steps_per_min)
    }

    /// Stride frequency (Hz) and its derivative with respect to speed.
    fn stride_rate(&self, v: f64) -> (f64, f64) {
        let raw = self.coefficient * v.max(0.0).sqrt();
        if raw <= self.min_steps_per_min || raw >= self.max_steps_per_min {
            (self.steps_per_min(v) / 120.0, 0.0)
        } else {
            (raw / 120.0, 0.5 * self.coefficient / v.sqrt() / 120.0)
        }
    }

    /// Antiderivative of the stride frequency with respect to speed.
    fn rate_integral(&self, v: f64) -> f64 {
        let lo = (self.min_steps_per_min / self.coefficient).powi(2);
        let hi = (self.max_steps_per_min / self.coefficient).powi(2);
        let g = |u: f64| self.coefficient * (2.0 / 3.0) * u.powf(1.5);
        let steps = if v <= lo {
            self.min_steps_per_min * v
        } else if v <= hi {
            self.min_steps_per_min * lo + g(v) - g(lo)
        } else {
            self.min_steps_per_min * lo + g(hi) - g(lo) + self.max_steps_per_min * (v - hi)
        };
        steps / 120.0
    }

    /// Walking speed (m/s) whose cadence equals `steps_per_min`.
    pub fn speed_for_cadence(&self, steps_per_min: f64) -> f64 {
        (steps_per_min / self.coefficient).powi(2)
    }
}

/// Stance fraction as a linear function of speed, clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StanceLaw {
    pub at_rest: f64,
    pub per_mps: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for StanceLaw {
    fn default() -> Self {
        Self {
            at_rest: 0.62,
            per_mps: -0.03,
            min: 0.56,
            max: 0.62,
        }
    }
}

impl StanceLaw {
    pub fn fraction(&self, v: f64) -> f64 {
        (self.at_rest + self.per_mps * v).clamp(self.min, self.max)
    }
}

/// Wearer body dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Anthropometrics {
    pub height: f64,
    pub mass: f64,
}

impl Default for Anthropometrics {
    fn default() -> Self {
        Self {
            height: 1.75,
            mass: 69.4,
        }
    }
}

/// How stride frequency is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Pacing {
    /// Treadmill: speed schedule, cadence from the cadence law.
    Treadmill { speed: SpeedProfile },
    /// Overground at a metronome cadence (steps/min); speed follows the inverse law.
    Metronome { steps_per_min: f64 },
}

/// Everything that determines a synthetic gait.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitProfile {
    pub pacing: Pacing,
    pub cadence: CadenceLaw,
    pub stance: StanceLaw,
    /// Walking surface slope (rad); added to both ankles so the body stays upright.
    pub slope: f64,
    pub subject: Anthropometrics,
    /// Device plus carried load (kg), borne by the insoles.
    pub device_mass: f64,
    /// Insole noise standard deviation (N); 0 disables noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GaitProfile {
    pub fn treadmill(speed: SpeedProfile) -> Self {
        Self {
            pacing: Pacing::Treadmill { speed },
            cadence: CadenceLaw::default(),
            stance: StanceLaw::default(),
            slope: 0.0,
            subject: Anthropometrics::default(),
            device_mass: 15.0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn constant_speed(kmh: f64) -> Self {
        Self::treadmill(SpeedProfile::constant(kmh))
    }

    pub fn metronome(steps_per_min: f64) -> Self {
        Self {
            pacing: Pacing::Metronome { steps_per_min },
            ..Self::constant_speed(0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Pacing::Treadmill { speed } = &self.pacing {
            speed.validate()?;
        }
        let mut v = Violations::default();
        if let Pacing::Metronome { steps_per_min } = self.pacing {
            v.check(steps_per_min > 0.0, || {
                "metronome cadence must be > 0".into()
            });
        }
        let s = &self.stance;
        v.check(s.min > 0.5 && s.max <= 0.8 && s.min <= s.max, || {
            "stance fraction bounds must lie in (0.5, 0.8]".into()
        });
        v.check(
            self.cadence.coefficient > 0.0 && self.cadence.min_steps_per_min > 0.0,
            || "cadence law must be positive".into(),
        );
        v.check(
            self.cadence.min_steps_per_min <= self.cadence.max_steps_per_min,
            || "cadence clamp bounds inverted".into(),
        );
        v.check(self.noise_sigma >= 0.0, || {
            "noise_sigma must be >= 0".into()
        });
        v.check(self.subject.height > 0.0 && self.subject.mass > 0.0, || {
            "subject height and mass must be > 0".into()
        });
        v.check(self.device_mass >= 0.0, || {
            "device_mass must be >= 0".into()
        });
        v.finish("gait profile")
    }

    /// Speed (m/s) and acceleration (m/s²) at `t`.
    pub fn speed_and_accel(&self, t: f64) -> (f64, f64) {
        match &self.pacing {
            Pacing::Treadmill { speed } => speed.speed_and_accel(t),
            Pacing::Metronome { steps_per_min } => {
                (self.cadence.speed_for_cadence(*steps_per_min), 0.0)
            }
        }
    }

    /// Speed at `t` in m/s.
    pub fn speed_at(&self, t: f64) -> f64 {
        self.speed_and_accel(t).0
    }

    /// Stride frequency (Hz) at a given speed.
    pub fn stride_rate(&self, v: f64) -> f64 {
        match self.pacing {
            Pacing::Treadmill { .. } => self.cadence.stride_rate(v).0,
            Pacing::Metronome { steps_per_min } => steps_per_min / 120.0,
        }
    }

    /// Accumulated stride count since t = 0, with its first and second time derivatives.
    fn stride_count(&self, t: f64) -> (f64, f64, f64) {
        match &self.pacing {
            Pacing::Metronome { steps_per_min } => {
                (t * steps_per_min / 120.0, steps_per_min / 120.0, 0.0)
            }
            Pacing::Treadmill { speed } => {
                let law = &self.cadence;
                let (seg, _, _, _) = speed.segment(t);
                let mut total = 0.0;
                for i in 0..seg {
                    total += segment_strides(law, speed, i, speed.breakpoints[i + 1].0);
                }
                total += segment_strides(law, speed, seg, t);
                let (v, a) = speed.speed_and_accel(t);
                let (f, df) = law.stride_rate(v);
                (total, f, df * a)
            }
        }
    }

    pub fn sample(&self, t: f64) -> GaitSample {
        gait_sample(self, t)
    }
}

/// Strides accumulated from the start of segment `i` up to time `t` in that segment.
fn segment_strides(law: &CadenceLaw, speed: &SpeedProfile, i: usize, t: f64) -> f64 {
    let (t0, v0) = speed.breakpoints[i];
    let v0 = v0 * KMH;
    let a = if i + 1 < speed.breakpoints.len() {
        let (t1, v1) = speed.breakpoints[i + 1];
        (v1 * KMH - v0) / (t1 - t0)
    } else {
        0.0
    };
    let dt = t - t0;
    if a.abs() < 1e-12 {
        return law.stride_rate(v0).0 * dt;
    }
    let v1 = (v0 + a * dt).max(0.0);
    (law.rate_integral(v1) - law.rate_integral(v0)) / a
}

/// Amplitude scale applied to the normative curves, with first and second
/// derivatives in speed. Unity near 1 m/s, tapering smoothly to 0 at rest.
fn amplitude_scale(v: f64) -> (f64, f64, f64) {
    const TAPER: f64 = 0.1;
    let e = (-v / TAPER).exp();
    let (r, r1, r2) = (1.0 - e, e / TAPER, -e / (TAPER * TAPER));
    let lin = 0.5 + 0.5 * v;
    (lin * r, 0.5 * r + lin * r1, r1 + lin * r2)
}

/// Insole sensor order within a foot.
pub const PRESSURE_SENSORS: [&str; 4] = ["heel", "medial", "lateral", "toe"];

/// One synthetic time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitSample {
    pub t: f64,
    /// Left-leg stride phase in [0, 1); 0 at left heel strike.
    pub phase: f64,
    /// Walking speed (m/s).
    pub speed: f64,
    pub state: JointState,
    /// `[left, right]` foot contact.
    pub contact: [bool; 2],
    /// `[left, right]` insole pressures (N), sensor order heel, medial, lateral, toe.
    pub pressure: [[f64; 4]; 2],
}

impl GaitSample {
    pub fn pressure_sum(&self, side: Side) -> f64 {
        self.pressure[side_index(side)].iter().sum()
    }

    /// Fraction of the vertical load on the left foot; 0.5 when unloaded.
    pub fn left_load_fraction(&self) -> f64 {
        let l = self.pressure_sum(Side::Left);
        let r = self.pressure_sum(Side::Right);
        if l + r > 0.0 {
            l / (l + r)
        } else {
            0.5
        }
    }

    pub fn is_single_support(&self) -> bool {
        self.contact[0] != self.contact[1]
    }
}

pub(crate) fn side_index(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// Left-foot vertical load share and total load factor for a left phase.
fn load_split(phase: f64, stance_fraction: f64) -> (f64, f64) {
    let d = stance_fraction - 0.5;
    let peak = 1.2;
    if phase < d {
        (phase / d, peak)
    } else if phase < 0.5 {
        let u = (phase - d) / (0.5 - d);
        (1.0, 1.0 + 0.2 * (TAU * u).cos())
    } else if phase < 0.5 + d {
        (1.0 - (phase - 0.5) / d, peak)
    } else {
        let u = (phase - 0.5 - d) / (0.5 - d);
        (0.0, 1.0 + 0.2 * (TAU * u).cos())
    }
}

fn foot_pressures(load: f64, leg_phase: f64, stance_fraction: f64) -> [f64; 4] {
    if load <= 0.0 {
        return [0.0; 4];
    }
    let u = (leg_phase / stance_fraction).clamp(0.0, 1.0);
    let heel = 0.4 - 0.2 * u;
    let toe = 0.2 + 0.2 * u;
    [heel * load, 0.2 * load, 0.2 * load, toe * load]
}

fn noise_rng(seed: u64, t: f64) -> ChaCha8Rng {
    // splitmix64 finalizer over (seed, t)
    let mut z = seed ^ t.to_bits().wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Synthesizes the gait sample at time `t` (s).
pub fn gait_sample(profile: &GaitProfile, t: f64) -> GaitSample {
    let t = t.max(0.0);
    let (v, acc) = profile.speed_and_accel(t);
    let weight = (profile.subject.mass + profile.device_mass) * GRAVITY;
    let slope_bias = [0.0, 0.0, profile.slope];

    if v <= 0.0 {
        let mut q = [0.0; JOINT_COUNT];
        q[2] = profile.slope;
        q[5] = profile.slope;
        let foot = [0.125 * weight; 4];
        return GaitSample {
            t,
            phase: 0.0,
            speed: 0.0,
            state: JointState::at_rest(q),
            contact: [true, true],
            pressure: [foot, foot],
        };
    }

    let (strides, rate, rate_dot) = profile.stride_count(t);
    let phase = strides.rem_euclid(1.0);
    let (s, s1, s2) = amplitude_scale(v);
    // time derivatives of the amplitude scale
    let sd = s1 * acc;
    let sdd = s2 * acc * acc;

    let mut state = JointState::default();
    for (leg, leg_phase) in [(0usize, phase), (1, (phase + 0.5).rem_euclid(1.0))] {
        for (j, coeffs) in [HIP, KNEE, ANKLE].iter().enumerate() {
            let (f, f1, f2) = fourier(coeffs, leg_phase);
            let i = 3 * leg + j;
            state.q[i] = s * f + slope_bias[j];
            state.qd[i] = sd * f + s * f1 * rate;
            state.qdd[i] = sdd * f + 2.0 * sd * f1 * rate + s * (f2 * rate * rate + f1 * rate_dot);
        }
    }

    let beta = profile.stance.fraction(v);
    let (left_share, factor) = load_split(phase, beta);
    let total = weight * factor;
    let mut pressure = [
        foot_pressures(total * left_share, phase, beta),
        foot_pressures(
            total * (1.0 - left_share),
            (phase + 0.5).rem_euclid(1.0),
            beta,
        ),
    ];
    if profile.noise_sigma > 0.0 {
        let mut rng = noise_rng(profile.seed, t);
        let normal = Normal::new(0.0, profile.noise_sigma).expect("sigma checked >= 0");
        for foot in pressure.iter_mut() {
            if foot.iter().sum::<f64>() > 0.0 {
                for p in foot.iter_mut() {
                    *p = (*p + normal.sample(&mut rng)).max(0.0);
                }
            }
        }
    }
    let contact = [
        pressure[0].iter().sum::<f64>() > 0.0,
        pressure[1].iter().sum::<f64>() > 0.0,
    ];
    GaitSample {
        t,
        phase,
        speed: v,
        state,
        contact,
        pressure,
    }
}

/// Stance class used as the regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StanceLabel {
    /// Left foot grounded, +1.
    Lfg,
    /// Right foot grounded, −1.
    Rfg,
}

impl StanceLabel {
    pub fn value(self) -> f64 {
        match self {
            StanceLabel::Lfg => 1.0,
            StanceLabel::Rfg => -1.0,
        }
    }

    pub fn side(self) -> Side {
        match self {
            StanceLabel::Lfg => Side::Left,
            StanceLabel::Rfg => Side::Right,
        }
    }
}

/// Raw pressure-based label; ties go to RFG.
pub fn stance_label(sample: &GaitSample) -> StanceLabel {
    if sample.pressure_sum(Side::Left) > sample.pressure_sum(Side::Right) {
        StanceLabel::Lfg
    } else {
        StanceLabel::Rfg
    }
}

/// Joint-angle rows with their stance labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationData {
    pub q: Vec<[f64; JOINT_COUNT]>,
    pub labels: Vec<f64>,
    /// Whether the sample is in single support.
    pub single_support: Vec<bool>,
    /// All rows identical (e.g. quiet standing).
    pub degenerate: bool,
}

impl CalibrationData {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

pub fn make_calibration_dataset(
    profile: &GaitProfile,
    duration: f64,
    rate: f64,
) -> Result<CalibrationData> {
    if !(duration > 0.0 && rate > 0.0) {
        return Err(Error::Config(
            "calibration duration and rate must be > 0".into(),
        ));
    }
    let rows = (duration * rate).floor() as usize;
    if rows < JOINT_COUNT {
        return Err(Error::InsufficientData {
            rows,
            cols: JOINT_COUNT,
        });
    }
    let mut data = CalibrationData {
        q: Vec::with_capacity(rows),
        labels: Vec::with_capacity(rows),
        single_support: Vec::with_capacity(rows),
        degenerate: false,
    };
    for k in 0..rows {
        let s = gait_sample(profile, k as f64 / rate);
        data.q.push(s.state.q);
        data.labels.push(stance_label(&s).value());
        data.single_support.push(s.is_single_support());
    }
    data.degenerate = data.q.iter().all(|r| r == &data.q[0]);
    Ok(data)
}

pub const GAIT_CSV_HEADER: &str = "t,phase,\
l_hip_q,l_knee_q,l_ankle_q,r_hip_q,r_knee_q,r_ankle_q,\
l_hip_qd,l_knee_qd,l_ankle_qd,r_hip_qd,r_knee_qd,r_ankle_qd,\
l_hip_qdd,l_knee_qdd,l_ankle_qdd,r_hip_qdd,r_knee_qdd,r_ankle_qdd,\
l_heel,l_medial,l_lateral,l_toe,r_heel,r_medial,r_lateral,r_toe";

/// Exports `duration · rate` samples as CSV (see [`GAIT_CSV_HEADER`]).
pub fn gait_csv(profile: &GaitProfile, duration: f64, rate: f64) -> String {
    let rows = (duration * rate).floor() as usize;
    let mut out = String::with_capacity(rows * 400);
    out.push_str(GAIT_CSV_HEADER);
    out.push('\n');
    for k in 0..rows {
        let s = gait_sample(profile, k as f64 / rate);
        let _ = write!(out, "{},{}", s.t, s.phase);
        for x in s.state.q.iter().chain(&s.state.qd).chain(&s.state.qdd) {
            let _ = write!(out, ",{x}");
        }
        for x in s.pressure.iter().flatten() {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> SpeedProfile {
        SpeedProfile::from_sequence(&[0.0, 2.0], 15.0, 0.0)
    }

    #[test]
    fn speed_endpoints_and_midpoint() {
        let p = ramp();
        assert_eq!(p.speed_and_accel(0.0).0, 0.0);
        assert!((p.speed_and_accel(7.5).0 - 1.0 / 3.6).abs() < 1e-12);
        assert!((p.speed_and_accel(7.5).0 - 0.2778).abs() < 1e-4);
        assert!((p.speed_and_accel(100.0).0 - 2.0 / 3.6).abs() < 1e-12);
    }

    #[test]
    fn sequence_breakpoints() {
        let p = SpeedProfile::from_sequence(&[0.0, 2.0, 4.0, 6.0, 2.0, 6.0], 15.0, 3.0);
        p.validate().unwrap();
        assert_eq!(p.settle_time(), 5.0 * 15.0 + 5.0 * 3.0);
        assert!((p.speed_and_accel(1e4).0 - 6.0 / 3.6).abs() < 1e-12);
    }

    #[test]
    fn invalid_profiles() {
        let p = SpeedProfile {
            breakpoints: vec![(0.0, 1.0), (0.0, 2.0)],
        };
        assert!(p.validate().is_err());
        assert!(SpeedProfile::constant(-1.0).validate().is_err());
    }

    #[test]
    fn quiet_standing() {
        let g = GaitProfile::constant_speed(0.0);
        for t in [0.0, 1.3, 20.0] {
            let s = gait_sample(&g, t);
            assert_eq!(s.state.q, [0.0; 6]);
            assert_eq!(s.state.qd, [0.0; 6]);
            assert_eq!(s.contact, [true, true]);
            assert_eq!(s.pressure_sum(Side::Left), s.pressure_sum(Side::Right));
            assert!(s.pressure_sum(Side::Left) > 0.0);
        }
    }

    #[test]
    fn cadence_increases_with_speed() {
        let law = CadenceLaw::default();
        assert!(law.steps_per_min(3.5 * KMH) > law.steps_per_min(1.0 * KMH));
        assert_eq!(law.steps_per_min(0.0), 40.0);
        assert_eq!(law.steps_per_min(10.0), 140.0);
    }

    #[test]
    fn stride_integral_matches_quadrature() {
        let g = GaitProfile::treadmill(SpeedProfile::from_sequence(
            &[0.0, 2.0, 6.0, 2.0],
            15.0,
            2.0,
        ));
        let t_end = 40.0;
        let n = 400_000;
        let h = t_end / n as f64;
        // composite Simpson over the stride rate
        let f = |t: f64| g.stride_rate(g.speed_at(t));
        let mut acc = f(0.0) + f(t_end);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        let quad = acc * h / 3.0;
        assert!(
            (g.stride_count(t_end).0 - quad).abs() < 1e-6,
            "{} vs {quad}",
            g.stride_count(t_end).0
        );
    }

    #[test]
    fn labels_follow_pressure() {
        let mut s = gait_sample(&GaitProfile::constant_speed(3.5), 0.0);
        s.pressure = [[100.0; 4], [0.0; 4]];
        assert_eq!(stance_label(&s), StanceLabel::Lfg);
        s.pressure = [[0.0; 4], [100.0; 4]];
        assert_eq!(stance_label(&s), StanceLabel::Rfg);
        s.pressure = [[50.0; 4], [50.0; 4]];
        assert_eq!(stance_label(&s).value(), -1.0);
    }

    #[test]
    fn calibration_dataset_shape() {
        let d = make_calibration_dataset(&GaitProfile::constant_speed(1.0), 30.0, 100.0).unwrap();
        assert_eq!(d.len(), 3000);
        assert!(d.labels.iter().all(|&c| c == 1.0 || c == -1.0));
        assert!(!d.degenerate);
        let still =
            make_calibration_dataset(&GaitProfile::constant_speed(0.0), 1.0, 100.0).unwrap();
        assert!(still.degenerate);
        assert!(matches!(
            make_calibration_dataset(&GaitProfile::constant_speed(1.0), 0.05, 100.0),
            Err(Error::InsufficientData { rows: 5, .. })
        ));
    }

    #[test]
    fn csv_export_has_fixed_width() {
        let csv = gait_csv(&GaitProfile::constant_speed(3.5), 0.1, 100.0);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 11);
        assert!(lines.iter().all(|l| l.split(',').count() == 28));
    }

    #[test]
    fn metronome_speed_follows_inverse_law() {
        let g = GaitProfile::metronome(96.0);
        assert!((g.speed_at(3.0) - 1.0).abs() < 1e-12);
        assert!((g.stride_rate(1.0) - 0.8).abs() < 1e-12);
    }
}
