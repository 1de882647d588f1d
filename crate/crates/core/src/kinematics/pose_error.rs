use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3, Vector6};

use crate::pose::Pose;

/// Axis-angle vector of a rotation matrix (matrix logarithm).
///
/// At an angle of exactly π the axis sign is ambiguous; the component of
/// largest magnitude is then made positive.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let skew = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let angle = (skew.norm() / 2.0).atan2(cos);
    if angle < 1e-6 {
        // θ/(2 sin θ) → 1/2 + θ²/12
        return skew * (0.5 + angle * angle / 12.0);
    }
    if PI - angle > 1e-6 {
        return skew * (angle / (2.0 * angle.sin()));
    }
    // Near π the skew part vanishes; use sym(R) = cos θ·I + (1 − cos θ)·n·nᵀ.
    let b = ((r + r.transpose()) / 2.0 - Matrix3::identity() * cos) / (1.0 - cos);
    let i = (0..3)
        .max_by(|&a, &c| b[(a, a)].total_cmp(&b[(c, c)]))
        .unwrap_or(0);
    let ni = b[(i, i)].max(0.0).sqrt();
    let mut axis = Vector3::zeros();
    axis[i] = ni;
    for j in (0..3).filter(|&j| j != i) {
        axis[j] = if ni > 0.0 { b[(i, j)] / ni } else { 0.0 };
    }
    axis.normalize_mut();
    if skew.norm() > 1e-12 && skew.dot(&axis) < 0.0 {
        axis = -axis;
    }
    axis * angle
}

/// Six-vector `(Δp, Δω)`: `target.position − current.position` stacked over the
/// axis-angle vector of `target.rotation · current.rotationᵀ`.
pub fn pose_error(current: &Pose, target: &Pose) -> Vector6<f64> {
    let dp = target.translation - current.translation;
    let dw = rotation_log(&(target.rotation * current.rotation.transpose()));
    Vector6::new(dp.x, dp.y, dp.z, dw.x, dw.y, dw.z)
}

/// Position error (m) and rotation angle error (rad) between two poses.
pub fn pose_error_norms(current: &Pose, target: &Pose) -> (f64, f64) {
    let e = pose_error(current, target);
    (e.fixed_rows::<3>(0).norm(), e.fixed_rows::<3>(3).norm())
}
