use nalgebra::{DMatrix, DVector, Vector3, Vector6};

use super::frame_transforms;
use crate::error::{check_len, Result};
use crate::model::{JointKind, RobotModel};

/// Singular values below `PINV_RELATIVE_CUTOFF · σ_max` are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-8;

/// End-effector twist, stacked linear-above-angular.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub linear: Vector3<f64>,
    pub angular: Vector3<f64>,
}

impl Twist {
    pub fn new(linear: Vector3<f64>, angular: Vector3<f64>) -> Self {
        Self { linear, angular }
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self::new(
            v.fixed_rows::<3>(0).into_owned(),
            v.fixed_rows::<3>(3).into_owned(),
        )
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let (l, a) = (&self.linear, &self.angular);
        Vector6::new(l.x, l.y, l.z, a.x, a.y, a.z)
    }
}

/// Geometric Jacobian (6×n): linear block rows 0..3, angular block rows 3..6.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian(DMatrix<f64>);

impl Jacobian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn linear(&self) -> DMatrix<f64> {
        self.0.rows(0, 3).into_owned()
    }

    pub fn angular(&self) -> DMatrix<f64> {
        self.0.rows(3, 3).into_owned()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }
}

/// Column `k` is `(z × (p_e − p), z)` for a revolute joint and `(z, 0)` for a
/// prismatic one, with `z`, `p` the axis and origin of frame `k − 1`.
pub fn jacobian(model: &RobotModel, q: &[f64]) -> Result<Jacobian> {
    let frames = frame_transforms(model, q)?;
    let p_e = (frames[frames.len() - 1] * *model.tool()).translation;
    let mut j = DMatrix::zeros(6, model.dof());
    for (k, joint) in model.joints().iter().enumerate() {
        let z = frames[k].rotation.column(2).into_owned();
        let (lin, ang) = match joint.kind {
            JointKind::Revolute => (z.cross(&(p_e - frames[k].translation)), z),
            JointKind::Prismatic => (z, Vector3::zeros()),
        };
        j.fixed_view_mut::<3, 1>(0, k).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, k).copy_from(&ang);
    }
    Ok(Jacobian(j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    pub matrix: DMatrix<f64>,
    /// Number of singular values kept.
    pub rank: usize,
    /// True when the input was rank deficient and small singular values were dropped.
    pub truncated: bool,
}

/// Moore-Penrose pseudoinverse by SVD with relative cutoff [`PINV_RELATIVE_CUTOFF`].
pub fn pseudoinverse(m: &DMatrix<f64>) -> PseudoInverse {
    let (rows, cols) = m.shape();
    let full = rows.min(cols);
    if full == 0 {
        return PseudoInverse {
            matrix: DMatrix::zeros(cols, rows),
            rank: 0,
            truncated: false,
        };
    }
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let sigma_max = svd.singular_values.max();
    let cutoff = sigma_max * PINV_RELATIVE_CUTOFF;
    let mut pinv = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            pinv += v_t.row(i).transpose() * (u.column(i).transpose() / s);
        }
    }
    PseudoInverse {
        matrix: pinv,
        rank,
        truncated: rank < full,
    }
}

/// Yoshikawa manipulability `√det(J Jᵀ)`; round-off negatives clamp to 0.
pub fn yoshikawa(j: &DMatrix<f64>) -> f64 {
    let gram = j * j.transpose();
    gram.determinant().max(0.0).sqrt()
}

/// Null-space projector `I − J†J`.
pub fn null_projector(j: &DMatrix<f64>) -> DMatrix<f64> {
    let pinv = pseudoinverse(j);
    DMatrix::identity(j.ncols(), j.ncols()) - pinv.matrix * j
}

/// Forward velocity kinematics `ẋ = J q̇`.
pub fn fvk(model: &RobotModel, q: &[f64], qdot: &[f64]) -> Result<Twist> {
    check_len(model.dof(), qdot.len())?;
    let j = jacobian(model, q)?;
    let v = j.matrix() * DVector::from_column_slice(qdot);
    Ok(Twist::new(
        Vector3::new(v[0], v[1], v[2]),
        Vector3::new(v[3], v[4], v[5]),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ivk {
    pub qdot: DVector<f64>,
    /// Set when the Jacobian was rank deficient at `q`.
    pub truncated: bool,
}

/// Inverse velocity kinematics `q̇ = J† ẋ` (minimum-norm joint rates).
pub fn ivk(model: &RobotModel, q: &[f64], xdot: &Twist) -> Result<Ivk> {
    let j = jacobian(model, q)?;
    let pinv = pseudoinverse(j.matrix());
    Ok(Ivk {
        qdot: &pinv.matrix * DVector::from_column_slice(xdot.to_vector().as_slice()),
        truncated: pinv.truncated,
    })
}

/// Redundancy resolution `q̇ = J†ẋ + (I − J†J) q̇_r`.
pub fn redundancy_resolve(
    model: &RobotModel,
    q: &[f64],
    xdot: &Twist,
    qdot_r: &[f64],
) -> Result<DVector<f64>> {
    check_len(model.dof(), qdot_r.len())?;
    let j = jacobian(model, q)?;
    let pinv = pseudoinverse(j.matrix()).matrix;
    let n = model.dof();
    let projector = DMatrix::identity(n, n) - &pinv * j.matrix();
    Ok(
        &pinv * DVector::from_column_slice(xdot.to_vector().as_slice())
            + projector * DVector::from_column_slice(qdot_r),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_baxter_left, builtin_planar_2r};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn planar_jacobian_at_zero() {
        let m = builtin_planar_2r(1.0, 1.0).unwrap();
        let j = jacobian(&m, &[0.0, 0.0]).unwrap();
        let expected = DMatrix::from_row_slice(
            6,
            2,
            &[0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        );
        assert_relative_eq!(*j.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn planar_position_block_determinant() {
        let m = builtin_planar_2r(1.0, 1.0).unwrap();
        let j = jacobian(&m, &[0.0, FRAC_PI_2]).unwrap();
        let block = j.matrix().view((0, 0), (2, 2)).into_owned();
        assert_relative_eq!(block.determinant().abs(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(yoshikawa(&block), 1.0, epsilon = 1e-14);
        let stretched = jacobian(&m, &[0.4, 0.0]).unwrap();
        // √ of a round-off sized determinant
        assert!(yoshikawa(&stretched.matrix().view((0, 0), (2, 2)).into_owned()) < 1e-7);
    }

    #[test]
    fn pinv_of_identity() {
        let p = pseudoinverse(&DMatrix::identity(6, 6));
        assert_relative_eq!(p.matrix, DMatrix::identity(6, 6), epsilon = 1e-14);
        assert_eq!(p.rank, 6);
        assert!(!p.truncated);
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let mut j = DMatrix::from_fn(6, 7, |r, c| {
            (((r * 7 + c) as f64).powi(2) * 0.618_034).fract() - 0.5
        });
        j.row_mut(4).fill(0.0);
        let p = pseudoinverse(&j);
        assert!(p.truncated);
        assert_eq!(p.rank, 5);
        assert!(p.matrix.iter().all(|v| v.is_finite()));
        assert!((&j * &p.matrix * &j - &j).norm() < 1e-10);
    }

    #[test]
    fn pinv_matches_normal_equations_for_full_row_rank() {
        let j = DMatrix::from_fn(6, 7, |r, c| {
            ((r * 7 + c) as f64 * 0.37).cos() + if r == c { 2.0 } else { 0.0 }
        });
        let literal = j.transpose() * (&j * j.transpose()).try_inverse().unwrap();
        assert!((pseudoinverse(&j).matrix - literal).norm() < 1e-10);
    }

    #[test]
    fn projector_of_square_full_rank_is_zero() {
        let j = DMatrix::from_fn(6, 6, |r, c| {
            if r == c {
                1.0 + r as f64
            } else {
                0.1 * (r + c) as f64
            }
        });
        assert!(null_projector(&j).amax() < 1e-9);
    }

    #[test]
    fn planar_fvk() {
        let m = builtin_planar_2r(1.0, 1.0).unwrap();
        assert_eq!(fvk(&m, &[0.2, 0.3], &[0.0, 0.0]).unwrap(), Twist::default());
        let t = fvk(&m, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(t.linear, Vector3::new(0.0, 2.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(t.angular, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
        assert!(fvk(&m, &[0.0, 0.0], &[1.0]).is_err());
    }

    #[test]
    fn ivk_of_zero_twist() {
        let m = builtin_baxter_left();
        let r = ivk(&m, &[0.1, -0.5, 0.2, 1.0, 0.3, 0.4, 0.0], &Twist::default()).unwrap();
        assert_eq!(r.qdot.norm(), 0.0);
        assert!(!r.truncated);
    }

    #[test]
    fn redundancy_with_zero_bias_is_ivk() {
        let m = builtin_baxter_left();
        let q = [0.1, -0.5, 0.2, 1.0, 0.3, 0.4, 0.0];
        let xdot = Twist::new(Vector3::new(0.1, -0.05, 0.02), Vector3::new(0.0, 0.1, -0.2));
        let a = redundancy_resolve(&m, &q, &xdot, &[0.0; 7]).unwrap();
        let b = ivk(&m, &q, &xdot).unwrap().qdot;
        assert!((a - b).norm() < 1e-14);
        assert!(redundancy_resolve(&m, &q, &xdot, &[0.0; 6]).is_err());
    }
}
