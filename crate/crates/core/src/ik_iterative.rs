//! Iterative inverse kinematics: pseudoinverse stepping, the same with random
//! restarts, and cyclic coordinate descent (position only).

use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::kinematics::{fpk, frame_transforms, jacobian, pose_error, pseudoinverse};
use crate::model::{JointKind, RobotModel};
use crate::pose::Pose;

/// Consecutive clamped, non-improving iterations before giving up.
pub const STUCK_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitPolicy {
    /// Project each iterate back onto the joint-limit box.
    Clamp,
    /// Abort the attempt as soon as an iterate leaves the box.
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IKParams {
    /// Task-space step per iteration (m, with 1 rad counted as 1 m).
    pub step: f64,
    pub tol_pos: f64,
    pub tol_rot: f64,
    pub max_iters: usize,
    pub max_restarts: usize,
    pub rng_seed: u64,
    pub limit_policy: LimitPolicy,
    /// Diagonal weights on the stacked `(linear, angular)` pose error.
    /// Zero angular weights give position-only IK; `tol_rot` is then ignored.
    pub weights: [f64; 6],
    /// Record the weighted error norm of every iteration.
    pub record_trace: bool,
}

impl Default for IKParams {
    fn default() -> Self {
        Self {
            step: 0.01,
            tol_pos: 1e-3,
            tol_rot: 1e-2,
            max_iters: 500,
            max_restarts: 50,
            rng_seed: 0,
            limit_policy: LimitPolicy::Clamp,
            weights: [1.0; 6],
            record_trace: false,
        }
    }
}

impl IKParams {
    pub fn position_only(mut self) -> Self {
        self.weights[3..].fill(0.0);
        self
    }

    fn checks_rotation(&self) -> bool {
        self.weights[3..].iter().any(|&w| w != 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.tol_pos > 0.0 && self.tol_rot > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || self.weights[..3].iter().all(|&w| w == 0.0)
        {
            return bad("weights must be non-negative with a nonzero linear part");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IKStatus {
    Solved,
    MaxIters,
    JointLimitStuck,
    Unreachable,
}

impl IKStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            IKStatus::Solved => "solved",
            IKStatus::MaxIters => "max-iters",
            IKStatus::JointLimitStuck => "joint-limit-stuck",
            IKStatus::Unreachable => "unreachable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IKResult {
    /// Final iterate; absent when the target was rejected up front.
    pub q: Option<Vec<f64>>,
    pub status: IKStatus,
    /// Iterations (sweeps for CCD) of the returned attempt.
    pub iterations: usize,
    pub restarts: usize,
    pub final_pos_err: f64,
    /// Zero for position-only solves.
    pub final_rot_err: f64,
    pub trace: Option<Vec<f64>>,
}

impl IKResult {
    pub fn solved(&self) -> bool {
        self.status == IKStatus::Solved
    }

    fn unreachable(model: &RobotModel, target: &Vector3<f64>, params: &IKParams) -> Self {
        Self {
            q: None,
            status: IKStatus::Unreachable,
            iterations: 0,
            restarts: 0,
            final_pos_err: (target.norm() - model.reach_bound()).max(0.0),
            final_rot_err: 0.0,
            trace: params.record_trace.then(Vec::new),
        }
    }
}

fn check_seed(model: &RobotModel, q_seed: &[f64]) -> Result<()> {
    check_len(model.dof(), q_seed.len())?;
    if q_seed.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "seed contains non-finite values".into(),
        ));
    }
    Ok(())
}

fn beyond_reach(model: &RobotModel, p: &Vector3<f64>) -> bool {
    p.norm() > model.reach_bound()
}

/// Jacobian pseudoinverse iteration `q ← q + J†ẋ`, `ẋ = Δx/‖Δx‖·step`.
///
/// The step shrinks to `‖Δx‖` once the error is smaller than `step`.
pub fn solve_pinv(
    model: &RobotModel,
    x_des: &Pose,
    q_seed: &[f64],
    params: &IKParams,
) -> Result<IKResult> {
    check_seed(model, q_seed)?;
    params.validate()?;
    if !model.within_limits(q_seed) {
        return Err(Error::InvalidArgument(
            "seed is outside joint limits".into(),
        ));
    }
    if beyond_reach(model, &x_des.translation) {
        return Ok(IKResult::unreachable(model, &x_des.translation, params));
    }
    Ok(pinv_attempt(model, x_des, q_seed.to_vec(), params))
}

fn pinv_attempt(model: &RobotModel, x_des: &Pose, mut q: Vec<f64>, params: &IKParams) -> IKResult {
    let n = model.dof();
    let w = Vector6::from_column_slice(&params.weights);
    let check_rot = params.checks_rotation();
    let lo = model.lower_limits();
    let hi = model.upper_limits();
    let mut trace = params.record_trace.then(Vec::new);
    let mut stuck = 0;
    let mut prev_norm = f64::INFINITY;
    let mut iterations = 0;

    let status = loop {
        let err = pose_error(&fpk(model, &q).expect("length checked"), x_des);
        let pos = err.fixed_rows::<3>(0).norm();
        let rot = err.fixed_rows::<3>(3).norm();
        let dx = err.component_mul(&w);
        let norm = dx.norm();
        if let Some(t) = trace.as_mut() {
            t.push(norm);
        }
        if pos <= params.tol_pos && (!check_rot || rot <= params.tol_rot) {
            break IKStatus::Solved;
        }
        if iterations > 0 && stuck > 0 && norm < prev_norm {
            stuck = 0;
        }
        if stuck >= STUCK_WINDOW {
            break IKStatus::JointLimitStuck;
        }
        if iterations == params.max_iters {
            break IKStatus::MaxIters;
        }
        prev_norm = norm;

        let xdot = dx * (params.step.min(norm) / norm);
        let j = jacobian(model, &q).expect("length checked").into_matrix();
        let jw = DMatrix::from_fn(6, n, |r, c| j[(r, c)] * w[r]);
        let dq = pseudoinverse(&jw).matrix * DVector::from_column_slice(xdot.as_slice());
        let mut clamped = false;
        for i in 0..n {
            let v = q[i] + dq[i];
            q[i] = v.clamp(lo[i], hi[i]);
            clamped |= q[i] != v;
        }
        iterations += 1;
        if clamped && params.limit_policy == LimitPolicy::Reject {
            break IKStatus::JointLimitStuck;
        }
        // A clamped step is judged at the next evaluation; a clean step resets the count.
        stuck = if clamped { stuck + 1 } else { 0 };
    };

    let (pos, rot) = residuals(model, &q, x_des, check_rot);
    IKResult {
        q: Some(q),
        status,
        iterations,
        restarts: 0,
        final_pos_err: pos,
        final_rot_err: rot,
        trace,
    }
}

fn residuals(model: &RobotModel, q: &[f64], x_des: &Pose, with_rot: bool) -> (f64, f64) {
    let err = pose_error(&fpk(model, q).expect("length checked"), x_des);
    let rot = if with_rot {
        err.fixed_rows::<3>(3).norm()
    } else {
        0.0
    };
    (err.fixed_rows::<3>(0).norm(), rot)
}

/// Uniform draw inside the joint-limit box.
pub fn sample_within_limits<R: Rng>(model: &RobotModel, rng: &mut R) -> Vec<f64> {
    model
        .joints()
        .iter()
        .map(|j| rng.random_range(j.limit_lo..j.limit_hi))
        .collect()
}

/// [`solve_pinv`] with up to `max_restarts` retries from seeded random joint vectors.
///
/// When every attempt fails the attempt with the smallest position error is
/// returned with status max-iters.
pub fn solve_pinv_rr(
    model: &RobotModel,
    x_des: &Pose,
    q_seed: &[f64],
    params: &IKParams,
) -> Result<IKResult> {
    let first = solve_pinv(model, x_des, q_seed, params)?;
    if first.solved() || first.status == IKStatus::Unreachable {
        return Ok(first);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut best = first;
    for restart in 1..=params.max_restarts {
        let q0 = sample_within_limits(model, &mut rng);
        let mut attempt = pinv_attempt(model, x_des, q0, params);
        attempt.restarts = restart;
        if attempt.solved() {
            return Ok(attempt);
        }
        if attempt.final_pos_err < best.final_pos_err {
            best = attempt;
        }
    }
    best.restarts = params.max_restarts;
    best.status = IKStatus::MaxIters;
    Ok(best)
}

/// Rotation about `axis` (unit) that best carries `from` onto `to`, or `None`
/// when either projection onto the rotation plane vanishes or they are antipodal.
fn plane_angle(axis: &Vector3<f64>, from: &Vector3<f64>, to: &Vector3<f64>) -> Option<f64> {
    let u = from - axis * axis.dot(from);
    let v = to - axis * axis.dot(to);
    let scale = u.norm() * v.norm();
    if scale < 1e-18 {
        return None;
    }
    let sin = axis.dot(&u.cross(&v));
    let cos = u.dot(&v);
    if sin.abs() <= 1e-12 * scale && cos < 0.0 {
        return None;
    }
    Some(sin.atan2(cos))
}

/// Minimizer of `−cos(θ − optimum)` over `[lo, hi]`: a representative of the
/// optimum modulo 2π inside the interval, otherwise the circularly nearer limit.
fn best_angle_in_limits(optimum: f64, lo: f64, hi: f64) -> f64 {
    use std::f64::consts::TAU;
    let shifted = lo + (optimum - lo).rem_euclid(TAU);
    if shifted <= hi {
        return shifted;
    }
    let gap = |limit: f64| {
        (optimum - limit)
            .rem_euclid(TAU)
            .min((limit - optimum).rem_euclid(TAU))
    };
    if gap(lo) <= gap(hi) {
        lo
    } else {
        hi
    }
}

/// One tip-to-base sweep. Returns the updated end-effector position.
fn ccd_sweep(model: &RobotModel, q: &mut [f64], target: &Vector3<f64>) -> Vector3<f64> {
    let n = model.dof();
    for k in (0..n).rev() {
        let frames = frame_transforms(model, q).expect("length checked");
        let p_e = (frames[n] * *model.tool()).translation;
        let axis = frames[k].rotation.column(2).into_owned();
        let joint = &model.joints()[k];
        let delta = match joint.kind {
            JointKind::Revolute => {
                let origin = frames[k].translation;
                plane_angle(&axis, &(p_e - origin), &(target - origin))
            }
            JointKind::Prismatic => Some(axis.dot(&(target - p_e))),
        };
        if let Some(d) = delta {
            q[k] = match joint.kind {
                JointKind::Revolute => {
                    best_angle_in_limits(q[k] + d, joint.limit_lo, joint.limit_hi)
                }
                JointKind::Prismatic => joint.clamp(q[k] + d),
            };
        }
    }
    fpk(model, q).expect("length checked").translation
}

/// Cyclic coordinate descent toward a position, sweeping joints tip to base.
///
/// Uses no Jacobian. Each joint is rotated to align the joint-to-tip vector
/// with the joint-to-target vector in its rotation plane, then clamped. An
/// attempt that stops improving (a limit-induced fixed point) is restarted
/// from a seeded random joint vector, at most `max_restarts` times.
pub fn solve_ccd(
    model: &RobotModel,
    target_pos: &Vector3<f64>,
    q_seed: &[f64],
    params: &IKParams,
) -> Result<IKResult> {
    check_seed(model, q_seed)?;
    params.validate()?;
    if beyond_reach(model, target_pos) {
        return Ok(IKResult::unreachable(model, target_pos, params));
    }
    let q0: Vec<f64> = model
        .joints()
        .iter()
        .zip(q_seed)
        .map(|(j, &v)| j.clamp(v))
        .collect();
    let mut best = ccd_attempt(model, target_pos, q0, params);
    if best.solved() {
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    for restart in 1..=params.max_restarts {
        let mut attempt = ccd_attempt(
            model,
            target_pos,
            sample_within_limits(model, &mut rng),
            params,
        );
        attempt.restarts = restart;
        if attempt.solved() {
            return Ok(attempt);
        }
        if attempt.final_pos_err < best.final_pos_err {
            best = attempt;
        }
    }
    best.restarts = params.max_restarts;
    Ok(best)
}

/// Sweeps without a 0.1 % improvement on the best distance before an attempt is abandoned.
pub const CCD_STALL_SWEEPS: usize = 25;

fn ccd_attempt(
    model: &RobotModel,
    target: &Vector3<f64>,
    mut q: Vec<f64>,
    params: &IKParams,
) -> IKResult {
    let mut trace = params.record_trace.then(Vec::new);
    let mut p = fpk(model, &q).expect("length checked").translation;
    let mut iterations = 0;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let status = loop {
        let dist = (target - p).norm();
        if let Some(t) = trace.as_mut() {
            t.push(dist);
        }
        if dist <= params.tol_pos {
            break IKStatus::Solved;
        }
        if dist < best * (1.0 - 1e-3) {
            best = dist;
            stalled = 0;
        } else {
            stalled += 1;
        }
        if iterations == params.max_iters || stalled >= CCD_STALL_SWEEPS {
            break IKStatus::MaxIters;
        }
        p = ccd_sweep(model, &mut q, target);
        iterations += 1;
    };
    IKResult {
        final_pos_err: (target - p).norm(),
        q: Some(q),
        status,
        iterations,
        restarts: 0,
        final_rot_err: 0.0,
        trace,
    }
}
