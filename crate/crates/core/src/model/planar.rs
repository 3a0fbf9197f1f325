//! Planar (sagittal) serial chains of rigid links.
//!
//! Each row of the table describes one revolute joint and the link it drives.
//! The absolute angle of link `i` is the sum over `j <= i` of
//! `offset_j + sign_j * q_j`; the link's x-axis points towards the next joint.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

pub type Vec2 = Vector2<f64>;

#[inline]
fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// `w × r` for a scalar (out-of-plane) angular quantity `w`.
#[inline]
fn spin(w: f64, r: &Vec2) -> Vec2 {
    Vec2::new(-w * r.y, w * r.x)
}

#[inline]
fn rotate(angle: f64, v: &Vec2) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// One row of a planar DH-style table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkRow {
    /// Constant rotation added at this joint (rad).
    pub offset: f64,
    /// Maps the joint coordinate onto the relative rotation (±1).
    pub sign: f64,
    /// Distance along the link x-axis from this joint to the next (m).
    pub length: f64,
    pub mass: f64,
    /// COM in link coordinates (m).
    pub com: Vec2,
    /// Rotational inertia about the COM (kg·m²).
    pub inertia: f64,
}

/// Positions of a posed chain, all in the base frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames {
    /// Absolute link angles (rad).
    pub angles: Vec<f64>,
    /// Joint origins followed by the distal end of the last link (`n + 1` points).
    pub joints: Vec<Vec2>,
    pub coms: Vec<Vec2>,
}

/// A planar serial chain with a fixed base and a uniform gravity field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarChain {
    pub rows: Vec<LinkRow>,
    /// Gravitational acceleration expressed in the base frame (m/s²).
    pub gravity: Vec2,
}

impl PlanarChain {
    pub fn new(rows: Vec<LinkRow>, gravity: Vec2) -> Self {
        Self { rows, gravity }
    }

    pub fn dof(&self) -> usize {
        self.rows.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.rows.iter().map(|r| r.mass).sum()
    }

    pub fn angles(&self, q: &[f64]) -> Vec<f64> {
        debug_assert_eq!(q.len(), self.dof());
        let mut phi = 0.0;
        self.rows
            .iter()
            .zip(q)
            .map(|(row, &qi)| {
                phi += row.offset + row.sign * qi;
                phi
            })
            .collect()
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Frames {
        let angles = self.angles(q);
        let mut joints = Vec::with_capacity(self.dof() + 1);
        let mut coms = Vec::with_capacity(self.dof());
        let mut p = Vec2::zeros();
        joints.push(p);
        for (row, &phi) in self.rows.iter().zip(&angles) {
            coms.push(p + rotate(phi, &row.com));
            p += rotate(phi, &Vec2::new(row.length, 0.0));
            joints.push(p);
        }
        Frames {
            angles,
            joints,
            coms,
        }
    }

    /// Gravitational potential energy (J), zero at the base origin.
    pub fn potential_energy(&self, q: &[f64]) -> f64 {
        let frames = self.forward_kinematics(q);
        self.rows
            .iter()
            .zip(&frames.coms)
            .map(|(row, c)| -row.mass * self.gravity.dot(c))
            .sum()
    }

    pub fn kinetic_energy(&self, q: &[f64], qd: &[f64]) -> f64 {
        let frames = self.forward_kinematics(q);
        let mut v = Vec2::zeros();
        let mut w = 0.0;
        let mut t = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            w += row.sign * qd[i];
            let rc = frames.coms[i] - frames.joints[i];
            let r = frames.joints[i + 1] - frames.joints[i];
            let vc = v + spin(w, &rc);
            t += 0.5 * row.mass * vc.norm_squared() + 0.5 * row.inertia * w * w;
            v += spin(w, &r);
        }
        t
    }

    /// Recursive Newton-Euler inverse dynamics.
    ///
    /// Returns the joint torques that produce `qdd` from `(q, qd)`; gravity is
    /// included through a fictitious base acceleration when `with_gravity`.
    pub fn inverse_dynamics(
        &self,
        q: &[f64],
        qd: &[f64],
        qdd: &[f64],
        with_gravity: bool,
    ) -> Vec<f64> {
        let n = self.dof();
        debug_assert!(qd.len() == n && qdd.len() == n);
        let frames = self.forward_kinematics(q);

        let mut acc_com = Vec::with_capacity(n);
        let mut alphas = Vec::with_capacity(n);
        let mut a = if with_gravity {
            -self.gravity
        } else {
            Vec2::zeros()
        };
        let mut w = 0.0;
        let mut alpha = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            w += row.sign * qd[i];
            alpha += row.sign * qdd[i];
            let rc = frames.coms[i] - frames.joints[i];
            let r = frames.joints[i + 1] - frames.joints[i];
            acc_com.push(a + spin(alpha, &rc) - w * w * rc);
            alphas.push(alpha);
            a += spin(alpha, &r) - w * w * r;
        }

        let mut tau = vec![0.0; n];
        let mut f_next = Vec2::zeros();
        let mut n_next = 0.0;
        for i in (0..n).rev() {
            let row = &self.rows[i];
            let rc = frames.coms[i] - frames.joints[i];
            let r = frames.joints[i + 1] - frames.joints[i];
            let inertial = row.mass * acc_com[i];
            let f = inertial + f_next;
            let moment =
                row.inertia * alphas[i] + n_next + cross(&rc, &inertial) + cross(&r, &f_next);
            tau[i] = row.sign * moment;
            f_next = f;
            n_next = moment;
        }
        tau
    }

    /// Torques that statically balance gravity, i.e. `∂V/∂q`.
    pub fn gravity_torques(&self, q: &[f64]) -> Vec<f64> {
        let zero = vec![0.0; self.dof()];
        self.inverse_dynamics(q, &zero, &zero, true)
    }

    /// `M(q) q̈ + C(q, q̇) q̇`, without gravity.
    pub fn inertia_torques(&self, q: &[f64], qd: &[f64], qdd: &[f64]) -> Vec<f64> {
        self.inverse_dynamics(q, qd, qdd, false)
    }

    /// Joint torques generated by a force `force` (base frame) acting at
    /// `point` (link coordinates) of link `link`. Only joints proximal to the
    /// link are affected.
    pub fn point_force_torques(
        &self,
        q: &[f64],
        link: usize,
        point: &Vec2,
        force: &Vec2,
    ) -> Vec<f64> {
        let frames = self.forward_kinematics(q);
        let p = frames.joints[link] + rotate(frames.angles[link], point);
        let mut tau = vec![0.0; self.dof()];
        for j in 0..=link {
            tau[j] = self.rows[j].sign * cross(&(p - frames.joints[j]), force);
        }
        tau
    }

    /// Unit vector normal to link `link`'s x-axis (towards its local +y).
    pub fn link_normal(&self, q: &[f64], link: usize) -> Vec2 {
        let phi = self.angles(q)[link];
        rotate(phi, &Vec2::new(0.0, 1.0))
    }
}
