use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::params::{
    chain_to_device_order, Environment, ExoParams, JointState, Side, Torques, JOINT_COUNT,
};
use super::planar::{Frames, LinkRow, PlanarChain, Vec2};
use crate::error::Result;

/// Inertial data of the grounded (stance) foot. It never moves, so it only
/// contributes to mass bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseLink {
    pub mass: f64,
    pub com: Vec2,
    pub inertia: f64,
}

/// The 6-joint sagittal chain rooted at the stance foot.
///
/// Chain order: stance ankle, stance knee, stance hip, swing hip, swing knee,
/// swing ankle. The base frame has x along the walking surface (forward) and
/// y normal to it; gravity is rotated by the slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundedChain {
    pub stance: Side,
    pub base: BaseLink,
    pub chain: PlanarChain,
}

/// Gravity vector in the base frame of a slope-aligned stance foot.
pub fn slope_gravity(env: &Environment) -> Vec2 {
    let (s, c) = env.slope.sin_cos();
    Vec2::new(-env.gravity * s, -env.gravity * c)
}

/// Back-link inertial data with a point load folded in.
fn back_with_load(exo: &ExoParams, load_mass: f64) -> (f64, Vec2, f64) {
    let mb = exo.back.mass;
    let cb = Vec2::new(exo.back.com, 0.0);
    if load_mass <= 0.0 {
        return (mb, cb, exo.back.inertia);
    }
    // link y-axis points posterior when the back-link is upright
    let cl = Vec2::new(exo.back.com, exo.load_posterior_offset);
    let m = mb + load_mass;
    let c = (mb * cb + load_mass * cl) / m;
    let inertia =
        exo.back.inertia + mb * (cb - c).norm_squared() + load_mass * (cl - c).norm_squared();
    (m, c, inertia)
}

pub fn build_grounded_chain(
    exo: &ExoParams,
    stance: Side,
    env: &Environment,
) -> Result<GroundedChain> {
    exo.validate()?;
    env.validate()?;
    let (back_mass, back_com, back_inertia) = back_with_load(exo, env.load_mass);
    let row = |offset: f64, sign: f64, length: f64, mass: f64, com: f64, inertia: f64| LinkRow {
        offset,
        sign,
        length,
        mass,
        com: Vec2::new(com, 0.0),
        inertia,
    };
    let (th, sh, ft) = (&exo.thigh, &exo.shank, &exo.foot);
    let rows = vec![
        // stance shank, ankle -> knee; dorsiflexion tilts it forward
        row(
            FRAC_PI_2,
            -1.0,
            sh.length,
            sh.mass,
            sh.length - sh.com,
            sh.inertia,
        ),
        // stance thigh, knee -> hip
        row(0.0, 1.0, th.length, th.mass, th.length - th.com, th.inertia),
        // back-link; the swing hip shares the hip axis
        LinkRow {
            offset: 0.0,
            sign: -1.0,
            length: 0.0,
            mass: back_mass,
            com: back_com,
            inertia: back_inertia,
        },
        // swing thigh, hip -> knee, pointing down
        row(PI, 1.0, th.length, th.mass, th.com, th.inertia),
        row(0.0, -1.0, sh.length, sh.mass, sh.com, sh.inertia),
        // swing foot, ankle -> sole
        row(0.0, 1.0, ft.length, ft.mass, ft.com, ft.inertia),
    ];
    Ok(GroundedChain {
        stance,
        base: BaseLink {
            mass: ft.mass,
            com: Vec2::new(0.0, -ft.com),
            inertia: ft.inertia,
        },
        chain: PlanarChain::new(rows, slope_gravity(env)),
    })
}

impl GroundedChain {
    /// Mass of all links including the grounded foot and any folded load.
    pub fn total_mass(&self) -> f64 {
        self.base.mass + self.chain.total_mass()
    }

    /// Positions in the base frame for a device-ordered state.
    pub fn forward_kinematics(&self, q: &[f64; JOINT_COUNT]) -> Frames {
        let qc = self.chain_q(q);
        self.chain.forward_kinematics(&qc)
    }

    /// Swing ankle position in the base frame.
    pub fn swing_ankle(&self, q: &[f64; JOINT_COUNT]) -> Vec2 {
        self.forward_kinematics(q).joints[5]
    }

    pub fn chain_q(&self, q: &[f64; JOINT_COUNT]) -> [f64; JOINT_COUNT] {
        super::params::device_to_chain_order(self.stance, q)
    }

    fn to_device(&self, tau_chain: Vec<f64>) -> Torques {
        let arr: [f64; JOINT_COUNT] = tau_chain.try_into().expect("six-joint chain");
        Torques(chain_to_device_order(self.stance, &arr))
    }

    pub fn potential_energy(&self, q: &[f64; JOINT_COUNT]) -> f64 {
        self.chain.potential_energy(&self.chain_q(q))
    }

    pub fn kinetic_energy(&self, state: &JointState) -> f64 {
        let c = state.to_chain(self.stance);
        self.chain.kinetic_energy(&c.q, &c.qd)
    }

    /// Torques balancing gravity (`∂V/∂q`), device order.
    pub fn gravity_torques(&self, q: &[f64; JOINT_COUNT]) -> Torques {
        self.to_device(self.chain.gravity_torques(&self.chain_q(q)))
    }

    /// `M(q) q̈ + C(q, q̇) q̇`, device order.
    pub fn inertia_torques(&self, state: &JointState) -> Torques {
        let c = state.to_chain(self.stance);
        self.to_device(self.chain.inertia_torques(&c.q, &c.qd, &c.qdd))
    }

    /// Feed-forward gravity plus inertia compensation, device order.
    pub fn compensation_torques(&self, state: &JointState) -> Torques {
        let c = state.to_chain(self.stance);
        self.to_device(self.chain.inverse_dynamics(&c.q, &c.qd, &c.qdd, true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{mirror_device, L_ANKLE, R_ANKLE};

    fn default_chain(side: Side, env: Environment) -> GroundedChain {
        build_grounded_chain(&ExoParams::default(), side, &env).unwrap()
    }

    #[test]
    fn link_masses_sum_to_device_mass() {
        let g = default_chain(Side::Left, Environment::flat());
        assert!((g.total_mass() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn load_is_folded_into_back_link() {
        let a = default_chain(Side::Left, Environment::flat());
        let b = default_chain(Side::Left, Environment::flat().with_load(10.0));
        assert!((b.chain.rows[2].mass - a.chain.rows[2].mass - 10.0).abs() < 1e-12);
        assert!((b.total_mass() - 25.0).abs() < 1e-12);
        assert!(b.chain.rows[2].com.y > 0.0);
    }

    #[test]
    fn sides_share_the_sagittal_table() {
        let l = default_chain(Side::Left, Environment::flat());
        let r = default_chain(Side::Right, Environment::flat());
        assert_eq!(l.chain, r.chain);
        assert_eq!(l.base, r.base);
        assert_ne!(l.stance, r.stance);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut exo = ExoParams::default();
        exo.back.length = 0.0;
        assert!(build_grounded_chain(&exo, Side::Left, &Environment::flat()).is_err());
    }

    #[test]
    fn zero_posture_is_collinear() {
        let exo = ExoParams::default();
        let g = default_chain(Side::Left, Environment::flat());
        let f = g.forward_kinematics(&[0.0; 6]);
        for p in f.joints.iter().chain(&f.coms) {
            assert!(p.x.abs() < 1e-12);
        }
        assert!((f.joints[2].y - (exo.shank.length + exo.thigh.length)).abs() < 1e-12);
        assert!(f.joints[5].y.abs() < 1e-12, "swing ankle at ground height");
        let reach: f64 = f.joints.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let segs = 2.0 * (exo.shank.length + exo.thigh.length) + exo.foot.length;
        assert!((reach - segs).abs() < 1e-12);
    }

    #[test]
    fn upright_posture_needs_no_torque() {
        let g = default_chain(Side::Right, Environment::flat());
        assert!(g.gravity_torques(&[0.0; 6]).max_abs() < 1e-12);
    }

    #[test]
    fn dorsiflexion_tilts_body_forward() {
        let g = default_chain(Side::Left, Environment::flat());
        let mut q = [0.0; 6];
        q[L_ANKLE] = 0.2;
        let f = g.forward_kinematics(&q);
        assert!(f.joints[2].x > 0.0);
        // holding a forward lean takes a plantarflexion moment
        assert!(g.gravity_torques(&q).0[L_ANKLE] < 0.0);
    }

    #[test]
    fn mirrored_state_permutes_torques() {
        let l = default_chain(Side::Left, Environment::flat().with_load(5.0));
        let r = default_chain(Side::Right, Environment::flat().with_load(5.0));
        let s = JointState {
            q: [0.3, 0.4, 0.1, -0.2, 0.9, -0.3],
            qd: [1.0, -0.5, 0.2, 0.3, 2.0, -1.0],
            qdd: [3.0, 1.0, -4.0, 0.5, -2.0, 6.0],
        };
        let tl = l.compensation_torques(&s);
        let tr = r.compensation_torques(&s.mirrored());
        let expected = mirror_device(&tl.0);
        for i in 0..6 {
            assert!((tr.0[i] - expected[i]).abs() < 1e-9);
        }
        assert!(tl.0[R_ANKLE].abs() < tl.0[L_ANKLE].abs());
    }

    #[test]
    fn static_compensation_equals_gravity() {
        let g = default_chain(Side::Left, Environment::flat().with_slope(0.1));
        let s = JointState::at_rest([0.2, 0.3, 0.05, -0.1, 0.6, 0.0]);
        assert_eq!(g.compensation_torques(&s), g.gravity_torques(&s.q));
    }

    #[test]
    fn zero_gravity_compensation_equals_inertia() {
        let mut env = Environment::flat();
        env.gravity = 0.0;
        let g = default_chain(Side::Left, env);
        let s = JointState {
            q: [0.2, 0.3, 0.05, -0.1, 0.6, 0.0],
            qd: [1.0; 6],
            qdd: [-2.0; 6],
        };
        let a = g.compensation_torques(&s);
        let b = g.inertia_torques(&s);
        for i in 0..6 {
            assert!((a.0[i] - b.0[i]).abs() < 1e-12);
        }
        assert!(g.inertia_torques(&JointState::at_rest(s.q)).max_abs() == 0.0);
    }
}
