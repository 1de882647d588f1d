//! Forward pose kinematics over DH transform chains, the geometric Jacobian
//! and the velocity-level operations built on its pseudoinverse.

mod closed_form;
mod pose_error;
mod velocity;

use nalgebra::{Matrix3, Vector3};

use crate::error::{check_len, Result};
use crate::model::{DhRow, JointKind, RobotModel};
use crate::pose::Pose;

pub use closed_form::{fpk_position_closed_form_baxter, BaxterClosedFormConstants};
pub use pose_error::{pose_error, pose_error_norms, rotation_log};
pub use velocity::{
    fvk, ivk, jacobian, null_projector, pseudoinverse, redundancy_resolve, yoshikawa, Ivk,
    Jacobian, PseudoInverse, Twist, PINV_RELATIVE_CUTOFF,
};

/// Single-link transform `T_i^{i-1}` for joint value `qi`.
///
/// Revolute joints add `qi` to the row's θ offset; prismatic joints add it to `d`.
pub fn dh_transform(row: &DhRow, kind: JointKind, qi: f64) -> Pose {
    let (theta, d) = match kind {
        JointKind::Revolute => (qi + row.theta_offset, row.d),
        JointKind::Prismatic => (row.theta_offset, qi + row.d),
    };
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    Pose::new(
        Matrix3::new(ct, -st * ca, st * sa, st, ct * ca, -ct * sa, 0.0, sa, ca),
        Vector3::new(row.a * ct, row.a * st, d),
    )
}

/// Base-frame transforms `T_0^0 = I, T_1^0, …, T_n^0` of every DH frame (tool excluded).
pub fn frame_transforms(model: &RobotModel, q: &[f64]) -> Result<Vec<Pose>> {
    check_len(model.dof(), q.len())?;
    let mut frames = Vec::with_capacity(q.len() + 1);
    let mut t = Pose::identity();
    frames.push(t);
    for (joint, &qi) in model.joints().iter().zip(q) {
        t = t * dh_transform(&joint.dh, joint.kind, qi);
        frames.push(t);
    }
    Ok(frames)
}

/// End-effector pose `T_n^0 · tool`.
pub fn fpk(model: &RobotModel, q: &[f64]) -> Result<Pose> {
    let frames = frame_transforms(model, q)?;
    Ok(frames[frames.len() - 1] * *model.tool())
}

/// Skeleton polyline: base origin followed by the origins of frames `1..=n`.
pub fn frame_origins(model: &RobotModel, q: &[f64]) -> Result<Vec<Vector3<f64>>> {
    Ok(frame_transforms(model, q)?
        .iter()
        .map(|t| t.translation)
        .collect())
}
