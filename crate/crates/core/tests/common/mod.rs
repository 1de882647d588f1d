//! Reference computations shared by the integration tests. Nothing here calls
//! into the library's Jacobian or dynamics code.
#![allow(dead_code)]

use manipkd::kinematics::frame_transforms;
use manipkd::model::{DhRow, JointSpec, LinkInertia};
use manipkd::{Pose, RobotModel};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::Rng;

pub const GRAVITY: f64 = 9.81;

pub fn uniform_q<R: Rng>(model: &RobotModel, rng: &mut R) -> Vec<f64> {
    model
        .joints()
        .iter()
        .map(|j| rng.random_range(j.limit_lo..j.limit_hi))
        .collect()
}

pub fn uniform_vec<R: Rng>(n: usize, half_width: f64, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(-half_width..half_width))
        .collect()
}

fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    ) * 0.5
}

/// Central-difference geometric Jacobian of the end-effector pose.
pub fn jacobian_fd(model: &RobotModel, q: &[f64], h: f64) -> DMatrix<f64> {
    let n = q.len();
    let tip = |q: &[f64]| frame_transforms(model, q).unwrap()[n] * *model.tool();
    let r0 = tip(q).rotation;
    let mut j = DMatrix::zeros(6, n);
    for k in 0..n {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[k] += h;
        qm[k] -= h;
        let (tp, tm) = (tip(&qp), tip(&qm));
        let v = (tp.translation - tm.translation) / (2.0 * h);
        let w = vee(&((tp.rotation - tm.rotation) / (2.0 * h) * r0.transpose()));
        for r in 0..3 {
            j[(r, k)] = v[r];
            j[(r + 3, k)] = w[r];
        }
    }
    j
}

/// World-frame COM positions of every link.
pub fn com_positions(model: &RobotModel, q: &[f64]) -> Vec<Vector3<f64>> {
    let frames = frame_transforms(model, q).unwrap();
    model
        .inertias()
        .iter()
        .zip(&frames[1..])
        .map(|(link, f)| f.transform_point(&link.com))
        .collect()
}

/// Potential energy `Σ m g z_c` with gravity along −z.
pub fn potential(model: &RobotModel, q: &[f64]) -> f64 {
    com_positions(model, q)
        .iter()
        .zip(model.inertias())
        .map(|(c, link)| link.mass * GRAVITY * c.z)
        .sum()
}

/// Kinetic energy from per-link COM velocities and angular velocities:
/// `Σ ½ m |v_c|² + ½ ωᵀ R I_c Rᵀ ω`, with the tensor moved from the link
/// origin to the COM.
pub fn kinetic(model: &RobotModel, q: &[f64], qdot: &[f64]) -> f64 {
    let frames = frame_transforms(model, q).unwrap();
    let mut total = 0.0;
    for (i, link) in model.inertias().iter().enumerate() {
        let f = &frames[i + 1];
        let c = f.transform_point(&link.com);
        let mut v = Vector3::zeros();
        let mut w = Vector3::zeros();
        for k in 0..=i {
            let z = frames[k].rotation.column(2).into_owned();
            v += z.cross(&(c - frames[k].translation)) * qdot[k];
            w += z * qdot[k];
        }
        let r = link.com;
        let i_c =
            link.inertia - link.mass * (Matrix3::identity() * r.norm_squared() - r * r.transpose());
        let i_world = f.rotation * i_c * f.rotation.transpose();
        total += 0.5 * link.mass * v.norm_squared() + 0.5 * w.dot(&(i_world * w));
    }
    total
}

/// Joint torques from `d/dt ∂L/∂q̇ − ∂L/∂q`, every derivative by finite differences
/// of [`kinetic`] and [`potential`].
pub fn lagrange_torque(model: &RobotModel, q: &[f64], qdot: &[f64], qddot: &[f64]) -> DVector<f64> {
    let n = q.len();
    let shift = |x: &[f64], k: usize, h: f64| {
        let mut y = x.to_vec();
        y[k] += h;
        y
    };
    // K is quadratic in q̇, so a wide step has no truncation error.
    let dk_dqdot = |q: &[f64], qd: &[f64], k: usize| {
        let h = 1e-2;
        (kinetic(model, q, &shift(qd, k, h)) - kinetic(model, q, &shift(qd, k, -h))) / (2.0 * h)
    };
    let at = |t: f64| -> (Vec<f64>, Vec<f64>) {
        let qt = (0..n)
            .map(|i| q[i] + qdot[i] * t + 0.5 * qddot[i] * t * t)
            .collect();
        let qdt = (0..n).map(|i| qdot[i] + qddot[i] * t).collect();
        (qt, qdt)
    };
    let dt = 1e-5;
    let (qp, qdp) = at(dt);
    let (qm, qdm) = at(-dt);
    DVector::from_fn(n, |k, _| {
        let ddt = (dk_dqdot(&qp, &qdp, k) - dk_dqdot(&qm, &qdm, k)) / (2.0 * dt);
        let h = 1e-6;
        let dk_dq = (kinetic(model, &shift(q, k, h), qdot)
            - kinetic(model, &shift(q, k, -h), qdot))
            / (2.0 * h);
        let dp_dq =
            (potential(model, &shift(q, k, h)) - potential(model, &shift(q, k, -h))) / (2.0 * h);
        ddt - dk_dq + dp_dq
    })
}

/// Planar two-link arm in the x-y plane, point masses at `lc1`, `lc2` from each joint.
pub fn planar_two_link(a1: f64, a2: f64, m1: f64, m2: f64, lc1: f64, lc2: f64) -> RobotModel {
    let lim = std::f64::consts::PI;
    RobotModel::new(
        "two-link",
        vec![
            JointSpec::revolute("j1", DhRow::new(0.0, 0.0, a1, 0.0), -lim, lim),
            JointSpec::revolute("j2", DhRow::new(0.0, 0.0, a2, 0.0), -lim, lim),
        ],
        vec![
            LinkInertia::point_mass(m1, Vector3::new(lc1 - a1, 0.0, 0.0)),
            LinkInertia::point_mass(m2, Vector3::new(lc2 - a2, 0.0, 0.0)),
        ],
        Pose::identity(),
    )
    .unwrap()
}

/// Textbook two-link point-mass dynamics with gravity `g` along −y of the plane.
pub struct TwoLink {
    pub a1: f64,
    pub m1: f64,
    pub m2: f64,
    pub lc1: f64,
    pub lc2: f64,
    pub g: f64,
}

impl TwoLink {
    pub fn mass(&self, q: [f64; 2]) -> [[f64; 2]; 2] {
        let c2 = q[1].cos();
        let m11 = self.m1 * self.lc1.powi(2)
            + self.m2 * (self.a1.powi(2) + self.lc2.powi(2) + 2.0 * self.a1 * self.lc2 * c2);
        let m12 = self.m2 * (self.lc2.powi(2) + self.a1 * self.lc2 * c2);
        let m22 = self.m2 * self.lc2.powi(2);
        [[m11, m12], [m12, m22]]
    }

    pub fn coriolis(&self, q: [f64; 2], qd: [f64; 2]) -> [f64; 2] {
        let h = self.m2 * self.a1 * self.lc2 * q[1].sin();
        [
            -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]),
            h * qd[0] * qd[0],
        ]
    }

    pub fn gravity(&self, q: [f64; 2]) -> [f64; 2] {
        let c1 = q[0].cos();
        let c12 = (q[0] + q[1]).cos();
        [
            (self.m1 * self.lc1 + self.m2 * self.a1) * self.g * c1
                + self.m2 * self.lc2 * self.g * c12,
            self.m2 * self.lc2 * self.g * c12,
        ]
    }
}
