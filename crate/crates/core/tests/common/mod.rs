//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use gaitblend_core::model::{GroundedChain, JOINT_COUNT};
use nalgebra::{Matrix3, Vector3};
use rand::Rng;

/// Planar homogeneous transform: rotate by `angle`, then translate along the new x by `dx`.
fn joint_transform(angle: f64, dx: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, c * dx, s, c, s * dx, 0.0, 0.0, 1.0)
}

/// Joint origins (n + 1) and link COMs in the base frame, by composing transforms.
pub fn fk_oracle(chain: &GroundedChain, q: &[f64; JOINT_COUNT]) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let qc = chain.chain_q(q);
    let mut t = Matrix3::identity();
    let mut joints = vec![[0.0, 0.0]];
    let mut coms = Vec::new();
    for (row, qi) in chain.chain.rows.iter().zip(qc) {
        let at_joint: Matrix3<f64> = t * joint_transform(row.offset + row.sign * qi, 0.0);
        let c: Vector3<f64> = at_joint * Vector3::new(row.com.x, row.com.y, 1.0);
        coms.push([c.x, c.y]);
        t = at_joint * joint_transform(0.0, row.length);
        let p: Vector3<f64> = t * Vector3::new(0.0, 0.0, 1.0);
        joints.push([p.x, p.y]);
    }
    (joints, coms)
}

/// Potential energy with gravity `g` pointing down in a world frame rotated by
/// `slope` from the base frame.
pub fn potential_oracle(chain: &GroundedChain, q: &[f64; JOINT_COUNT], g: f64, slope: f64) -> f64 {
    let (_, coms) = fk_oracle(chain, q);
    let (s, c) = slope.sin_cos();
    chain
        .chain
        .rows
        .iter()
        .zip(coms)
        .map(|(row, p)| {
            // world height of a base-frame point
            let height = s * p[0] + c * p[1];
            row.mass * g * height
        })
        .sum()
}

/// Central-difference gradient of `f` over the six device joints.
pub fn gradient(
    f: impl Fn(&[f64; JOINT_COUNT]) -> f64,
    q: &[f64; JOINT_COUNT],
    h: f64,
) -> [f64; JOINT_COUNT] {
    std::array::from_fn(|i| {
        let (mut a, mut b) = (*q, *q);
        a[i] += h;
        b[i] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    })
}

pub fn random_posture(rng: &mut impl Rng) -> [f64; JOINT_COUNT] {
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(1e-9)
}
