use serde::{Deserialize, Serialize};

use crate::error::{Result, Violations};

/// Number of modeled joints (hip, knee, ankle flexion per leg).
pub const JOINT_COUNT: usize = 6;

/// Standard gravity used by default environments (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Device-frame joint names, in controller-facing order.
pub const DEVICE_JOINT_NAMES: [&str; JOINT_COUNT] =
    ["l_hip", "l_knee", "l_ankle", "r_hip", "r_knee", "r_ankle"];

pub const L_HIP: usize = 0;
pub const L_KNEE: usize = 1;
pub const L_ANKLE: usize = 2;
pub const R_HIP: usize = 3;
pub const R_KNEE: usize = 4;
pub const R_ANKLE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Device indices of (hip, knee, ankle) for this leg.
    pub fn leg_indices(self) -> [usize; 3] {
        match self {
            Side::Left => [L_HIP, L_KNEE, L_ANKLE],
            Side::Right => [R_HIP, R_KNEE, R_ANKLE],
        }
    }

    /// Device index of this leg's ankle.
    pub fn ankle(self) -> usize {
        self.leg_indices()[2]
    }
}

/// For a chain grounded on `stance`, `chain_to_device(stance)[i]` is the device
/// index of chain joint `i`. Chain order is
/// [stance ankle, stance knee, stance hip, swing hip, swing knee, swing ankle].
pub fn chain_to_device(stance: Side) -> [usize; JOINT_COUNT] {
    let [sh, sk, sa] = stance.leg_indices();
    let [wh, wk, wa] = stance.other().leg_indices();
    [sa, sk, sh, wh, wk, wa]
}

pub fn device_to_chain_order(stance: Side, device: &[f64; JOINT_COUNT]) -> [f64; JOINT_COUNT] {
    let map = chain_to_device(stance);
    std::array::from_fn(|i| device[map[i]])
}

pub fn chain_to_device_order(stance: Side, chain: &[f64; JOINT_COUNT]) -> [f64; JOINT_COUNT] {
    let map = chain_to_device(stance);
    let mut out = [0.0; JOINT_COUNT];
    for (i, &d) in map.iter().enumerate() {
        out[d] = chain[i];
    }
    out
}

/// Swaps left and right legs of a device-ordered vector.
pub fn mirror_device(v: &[f64; JOINT_COUNT]) -> [f64; JOINT_COUNT] {
    [v[3], v[4], v[5], v[0], v[1], v[2]]
}

/// Joint angle limits (rad), applied symmetrically to both legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointLimits {
    pub hip: (f64, f64),
    pub knee: (f64, f64),
    pub ankle: (f64, f64),
}

impl Default for JointLimits {
    fn default() -> Self {
        Self {
            hip: (-2.0, 2.0),
            knee: (0.0, 2.4),
            ankle: (-0.8, 0.8),
        }
    }
}

impl JointLimits {
    pub fn for_device_joint(&self, idx: usize) -> (f64, f64) {
        match idx % 3 {
            0 => self.hip,
            1 => self.knee,
            _ => self.ankle,
        }
    }
}

/// Joint positions, velocities and accelerations in device order
/// (anatomical convention: hip flexion, knee flexion and ankle dorsiflexion positive).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointState {
    pub q: [f64; JOINT_COUNT],
    pub qd: [f64; JOINT_COUNT],
    pub qdd: [f64; JOINT_COUNT],
}

impl JointState {
    pub fn at_rest(q: [f64; JOINT_COUNT]) -> Self {
        Self {
            q,
            ..Self::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q
            .iter()
            .chain(&self.qd)
            .chain(&self.qdd)
            .all(|x| x.is_finite())
    }

    pub fn validate(&self, limits: &JointLimits) -> Result<()> {
        let mut v = Violations::default();
        v.check(self.is_finite(), || "non-finite joint entry".into());
        for (i, &q) in self.q.iter().enumerate() {
            let (lo, hi) = limits.for_device_joint(i);
            v.check((lo..=hi).contains(&q), || {
                format!("{} = {q} outside [{lo}, {hi}]", DEVICE_JOINT_NAMES[i])
            });
        }
        v.finish("joint state")
    }

    /// Reorders into chain coordinates for a model grounded on `stance`.
    pub fn to_chain(&self, stance: Side) -> JointState {
        JointState {
            q: device_to_chain_order(stance, &self.q),
            qd: device_to_chain_order(stance, &self.qd),
            qdd: device_to_chain_order(stance, &self.qdd),
        }
    }

    pub fn mirrored(&self) -> JointState {
        JointState {
            q: mirror_device(&self.q),
            qd: mirror_device(&self.qd),
            qdd: mirror_device(&self.qdd),
        }
    }
}

/// Per-joint torque vector (N·m), device order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Torques(pub [f64; JOINT_COUNT]);

impl Torques {
    pub const ZERO: Torques = Torques([0.0; JOINT_COUNT]);

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn add(&self, other: &Torques) -> Torques {
        Torques(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    pub fn sub(&self, other: &Torques) -> Torques {
        Torques(std::array::from_fn(|i| self.0[i] - other.0[i]))
    }

    pub fn scale(&self, k: f64) -> Torques {
        Torques(self.0.map(|x| k * x))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Geometry and inertia of one segment class (used for both legs where applicable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Joint-to-joint length (m).
    pub length: f64,
    pub mass: f64,
    /// COM distance from the proximal joint along the segment (m).
    pub com: f64,
    /// Rotational inertia about the COM (kg·m²).
    pub inertia: f64,
}

impl Segment {
    /// Uniform rod with COM at mid-segment.
    pub fn rod(length: f64, mass: f64) -> Self {
        Self {
            length,
            mass,
            com: 0.5 * length,
            inertia: mass * length * length / 12.0,
        }
    }
}

/// Geometric and inertial description of the exoskeleton.
///
/// The seven rigid links are the back-link plus a thigh, shank and foot per
/// leg. The foot segment runs from the ankle joint down to the sole, so every
/// COM lies on the vertical axis in the straight posture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExoParams {
    pub back: Segment,
    pub thigh: Segment,
    pub shank: Segment,
    pub foot: Segment,
    /// Device height (m), informational.
    pub total_height: f64,
    pub total_mass: f64,
    /// Thigh cuff distance from the hip joint (m).
    pub thigh_cuff_from_hip: f64,
    /// Shank cuff distance from the knee joint (m).
    pub shank_cuff_from_knee: f64,
    /// Posterior offset of a carried load from the back-link COM (m).
    pub load_posterior_offset: f64,
}

impl Default for ExoParams {
    fn default() -> Self {
        Self::for_wearer_height(1.75)
    }
}

impl ExoParams {
    /// Default device fitted to a wearer of the given height (m).
    pub fn for_wearer_height(height: f64) -> Self {
        let back = Segment::rod(0.35, 7.0);
        let thigh = Segment::rod(0.245 * height, 2.5);
        let shank = Segment::rod(0.246 * height, 1.2);
        let foot = Segment::rod(0.039 * height, 0.3);
        Self {
            back,
            thigh,
            shank,
            foot,
            total_height: 1.10,
            total_mass: back.mass + 2.0 * (thigh.mass + shank.mass + foot.mass),
            thigh_cuff_from_hip: 0.20,
            shank_cuff_from_knee: 0.15,
            load_posterior_offset: 0.10,
        }
    }

    pub fn link_mass_sum(&self) -> f64 {
        self.back.mass + 2.0 * (self.thigh.mass + self.shank.mass + self.foot.mass)
    }

    /// Leg length from hip joint to sole (m).
    pub fn leg_length(&self) -> f64 {
        self.thigh.length + self.shank.length + self.foot.length
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Violations::default();
        for (name, s) in [
            ("back", &self.back),
            ("thigh", &self.thigh),
            ("shank", &self.shank),
            ("foot", &self.foot),
        ] {
            v.check(s.length > 0.0 && s.length.is_finite(), || {
                format!("{name}.length must be > 0")
            });
            v.check(s.mass > 0.0 && s.mass.is_finite(), || {
                format!("{name}.mass must be > 0")
            });
            v.check((0.0..=s.length).contains(&s.com), || {
                format!("{name}.com must lie within [0, {name}.length]")
            });
            v.check(s.inertia >= 0.0 && s.inertia.is_finite(), || {
                format!("{name}.inertia must be >= 0")
            });
        }
        v.check(
            (self.link_mass_sum() - self.total_mass).abs() <= 1e-9,
            || {
                format!(
                    "link masses sum to {} but total_mass is {}",
                    self.link_mass_sum(),
                    self.total_mass
                )
            },
        );
        v.check(self.total_height > 0.0, || {
            "total_height must be > 0".into()
        });
        v.check(
            self.thigh_cuff_from_hip > 0.0 && self.thigh_cuff_from_hip < self.thigh.length,
            || "thigh_cuff_from_hip must lie inside the thigh".into(),
        );
        v.check(
            self.shank_cuff_from_knee > 0.0 && self.shank_cuff_from_knee < self.shank.length,
            || "shank_cuff_from_knee must lie inside the shank".into(),
        );
        v.check(self.load_posterior_offset.is_finite(), || {
            "load_posterior_offset must be finite".into()
        });
        v.finish("exoskeleton parameters")
    }
}

/// Ground slope, carried load and gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Environment {
    /// Slope angle (rad), positive ascending.
    pub slope: f64,
    /// Load carried on the back-link (kg).
    pub load_mass: f64,
    pub gravity: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            slope: 0.0,
            load_mass: 0.0,
            gravity: GRAVITY,
        }
    }
}

impl Environment {
    pub fn flat() -> Self {
        Self::default()
    }

    pub fn with_load(mut self, kg: f64) -> Self {
        self.load_mass = kg;
        self
    }

    pub fn with_slope(mut self, rad: f64) -> Self {
        self.slope = rad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Violations::default();
        v.check(self.slope.abs() < std::f64::consts::FRAC_PI_4, || {
            "|slope| must be < pi/4".into()
        });
        v.check(self.load_mass >= 0.0 && self.load_mass.is_finite(), || {
            "load_mass must be >= 0".into()
        });
        v.check(self.gravity >= 0.0 && self.gravity.is_finite(), || {
            "gravity must be >= 0".into()
        });
        v.finish("environment")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_exo_weighs_fifteen_kilograms() {
        let exo = ExoParams::default();
        assert!((exo.total_mass - 15.0).abs() < 1e-12);
        exo.validate().unwrap();
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut exo = ExoParams::default();
        exo.thigh.mass = -1.0;
        exo.shank.com = 5.0;
        let err = exo.validate().unwrap_err().to_string();
        assert!(err.contains("thigh.mass"), "{err}");
        assert!(err.contains("shank.com"), "{err}");
        assert!(err.contains("total_mass"), "{err}");
    }

    #[test]
    fn chain_reorder_roundtrip() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        for side in [Side::Left, Side::Right] {
            let c = device_to_chain_order(side, &v);
            assert_eq!(chain_to_device_order(side, &c), v);
        }
        assert_eq!(
            device_to_chain_order(Side::Left, &v),
            [3.0, 2.0, 1.0, 4.0, 5.0, 6.0]
        );
        assert_eq!(
            device_to_chain_order(Side::Right, &v),
            [6.0, 5.0, 4.0, 1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn joint_limits_checked() {
        let mut s = JointState::default();
        s.validate(&JointLimits::default()).unwrap();
        s.q[L_KNEE] = -0.1;
        assert!(s.validate(&JointLimits::default()).is_err());
        s.q[L_KNEE] = 0.5;
        s.qd[3] = f64::NAN;
        assert!(s.validate(&JointLimits::default()).is_err());
    }

    #[test]
    fn environment_bounds() {
        assert!(Environment::flat().with_load(-1.0).validate().is_err());
        assert!(Environment::flat().with_slope(0.8).validate().is_err());
        Environment::flat()
            .with_slope(0.17)
            .with_load(10.0)
            .validate()
            .unwrap();
    }
}
