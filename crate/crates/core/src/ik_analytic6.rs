//! Closed-form inverse kinematics for the Baxter arm with E0 locked at zero.
//!
//! With E0 fixed the shoulder pitch S1, the elbow pitch E1 and the wrist
//! center move in one vertical plane through the base axis, so S0, S1 and E1
//! follow from a planar two-link problem with links `Lh = √(L2² + L3²)` and
//! `L4`. The wrist angles W0, W1, W2 are read from `R_6^3 = (R_3^0)ᵀ R_6^0`.
//!
//! The closed form drops the 0.01 m W0-W1 offset (`L5 ≈ 0`). Each branch is
//! therefore finished by a few Newton steps on the exact six-joint chain, so
//! the returned joint vectors reproduce the target to round-off.
//!
//! Angle conventions: the planar solution uses `θ2` measured from the
//! horizontal to the combined upper-arm segment and `θ4` for the forearm
//! relative to it. With `γ = atan2(L3, L2)` the model joints are
//! `S1 = θ2 − γ` and `E1 = θ4 + γ`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::kinematics::{dh_transform, fpk, jacobian, pose_error, pose_error_norms, pseudoinverse};
use crate::model::{wrap_angle, JointKind, RobotModel};
use crate::pose::Pose;

/// Index of the locked E0 joint.
pub const LOCKED_JOINT: usize = 2;
/// Round-trip tolerance for returned branches (m and rad).
pub const ROUND_TRIP_TOL: f64 = 1e-6;
/// Below this `|sin θ6|` the W0 and W2 axes align.
pub const WRIST_SINGULAR_TOL: f64 = 1e-7;

const REFINE_MAX_STEPS: usize = 30;
const REFINE_TOL: f64 = 1e-12;

/// Link constants of the E0-locked arm, read from the DH rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced6Constants {
    /// Height of the shoulder pitch axis above the base (row S0-S1, `d`).
    pub shoulder_height: f64,
    /// Radial shoulder offset (row S0-S1, `a`).
    pub l1: f64,
    /// Upper arm length along the E0 axis (row E0-E1, `d`).
    pub l2: f64,
    /// Elbow offset (row E0-E1, `a`).
    pub l3: f64,
    pub lh: f64,
    /// Forearm length (row W0-W1, `d`).
    pub l4: f64,
    /// Wrist offset (row W0-W1, `a`); ignored by the closed form.
    pub l5: f64,
    /// Tool length along the last axis (row W2-EE, `d`).
    pub tool_length: f64,
}

impl Reduced6Constants {
    /// Reads the constants from a 7-joint chain laid out like the Baxter arm.
    pub fn from_model(model: &RobotModel) -> Result<Self> {
        const ALPHAS: [f64; 7] = [
            -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, 0.0,
        ];
        const OFFSETS: [f64; 7] = [0.0, FRAC_PI_2, 0.0, 0.0, 0.0, 0.0, 0.0];
        let incompatible = |why: &str| {
            Err(Error::UnsupportedModel(format!(
                "analytic 6-DOF IK needs a Baxter-like 7-joint chain: {why}"
            )))
        };
        if model.dof() != 7 || !model.all_revolute() {
            return incompatible("expected 7 revolute joints");
        }
        if *model.tool() != Pose::identity() {
            return incompatible("tool transform must be identity");
        }
        let rows: Vec<_> = model.joints().iter().map(|j| j.dh).collect();
        for (i, row) in rows.iter().enumerate() {
            if (row.alpha - ALPHAS[i]).abs() > 1e-12
                || (row.theta_offset - OFFSETS[i]).abs() > 1e-12
            {
                return incompatible("twist angles or joint offsets differ");
            }
        }
        let zero = |v: f64| v.abs() <= 1e-12;
        if !(zero(rows[1].d) && zero(rows[1].a) && zero(rows[3].d) && zero(rows[3].a))
            || !(zero(rows[5].d) && zero(rows[5].a) && zero(rows[6].a))
        {
            return incompatible("unexpected offsets on S1, E1, W1 or W2 rows");
        }
        let (l2, l3) = (rows[2].d, rows[2].a);
        Ok(Self {
            shoulder_height: rows[0].d,
            l1: rows[0].a,
            l2,
            l3,
            lh: l2.hypot(l3),
            l4: rows[4].d,
            l5: rows[4].a,
            tool_length: rows[6].d,
        })
    }

    /// Angle `γ` between the E0 axis and the combined upper-arm segment.
    pub fn elbow_offset_angle(&self) -> f64 {
        self.l3.atan2(self.l2)
    }

    /// Wrist center of the reduced (`L5 = 0`) arm for planar angles `θ1, θ2, θ4`.
    pub fn wrist_center(&self, theta1: f64, theta2: f64, theta4: f64) -> Vector3<f64> {
        let reach = self.l1 + self.lh * theta2.cos() + self.l4 * (theta2 + theta4).cos();
        Vector3::new(
            theta1.cos() * reach,
            theta1.sin() * reach,
            self.shoulder_height - self.lh * theta2.sin() - self.l4 * (theta2 + theta4).sin(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    ElbowUp,
    ElbowDown,
}

impl BranchLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchLabel::ElbowUp => "elbow-up",
            BranchLabel::ElbowDown => "elbow-down",
        }
    }
}

/// One solution of the planar position problem, in the planar angle convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionBranch {
    pub label: BranchLabel,
    pub theta1: f64,
    pub theta2: f64,
    pub theta4: f64,
}

impl PositionBranch {
    /// Model joint values `(S0, S1, E1)`.
    pub fn joints(&self, k: &Reduced6Constants) -> (f64, f64, f64) {
        let gamma = k.elbow_offset_angle();
        (
            self.theta1,
            wrap_angle(self.theta2 - gamma),
            wrap_angle(self.theta4 + gamma),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositionStatus {
    Reachable,
    /// Distance (m) by which the wrist center misses the reachable annulus.
    Unreachable {
        excess: f64,
    },
    /// Wrist center on the base axis: S0 is undetermined.
    ShoulderSingular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionSolve {
    pub branches: Vec<PositionBranch>,
    pub status: PositionStatus,
}

/// Solves S0 and the planar elbow problem for the wrist-center pose `T_6^0`.
///
/// Only the position of `wrist_center` is used.
pub fn solve_position_joints(wrist_center: &Pose, k: &Reduced6Constants) -> PositionSolve {
    position_joints_with_slack(wrist_center, k, 0.0)
}

/// As [`solve_position_joints`], but a wrist center within `slack` metres
/// outside the reachable annulus is treated as on its boundary.
fn position_joints_with_slack(
    wrist_center: &Pose,
    k: &Reduced6Constants,
    slack: f64,
) -> PositionSolve {
    let p = wrist_center.translation;
    let (x, y) = (p.x, p.y);
    let z = p.z - k.shoulder_height;
    if x.hypot(y) < 1e-12 {
        return PositionSolve {
            branches: vec![],
            status: PositionStatus::ShoulderSingular,
        };
    }
    let theta1 = y.atan2(x);
    let (s1, c1) = theta1.sin_cos();
    // x/c1 is the radial distance; switch to y/s1 where c1 is small.
    let r = if c1.abs() >= s1.abs() { x / c1 } else { y / s1 };

    let e = 2.0 * k.lh * (k.l1 - r);
    let f = 2.0 * k.lh * z;
    let g = r * r + k.lh * k.lh + k.l1 * k.l1 - k.l4 * k.l4 + z * z - 2.0 * k.l1 * r;
    let disc = e * e + f * f - g * g;
    if disc < 0.0 {
        let rho = (r - k.l1).hypot(z);
        let excess = (rho - (k.lh + k.l4))
            .max((k.lh - k.l4).abs() - rho)
            .max(0.0);
        if excess > slack {
            return PositionSolve {
                branches: vec![],
                status: PositionStatus::Unreachable { excess },
            };
        }
    }
    let root = disc.max(0.0).sqrt();

    // G + E cos θ2 + F sin θ2 = 0 with t = tan(θ2/2): (G − E)t² + 2Ft + (G + E) = 0.
    let mut theta2s = Vec::with_capacity(2);
    if (g - e).abs() > 1e-12 * (e.abs() + f.abs() + g.abs()) {
        for sign in [1.0, -1.0] {
            theta2s.push(2.0 * ((-f + sign * root) / (g - e)).atan());
        }
    } else {
        // Leading coefficient vanishes: one root sits at t = ∞ (θ2 = π).
        theta2s.push(PI);
        if f.abs() > 0.0 {
            theta2s.push(2.0 * (-(g + e) / (2.0 * f)).atan());
        }
    }
    if theta2s.len() == 2 && (theta2s[0] - theta2s[1]).abs() < 1e-12 {
        theta2s.pop();
    }

    let mut branches: Vec<PositionBranch> = theta2s
        .into_iter()
        .map(|theta2| {
            let (s2, c2) = theta2.sin_cos();
            let theta4 = wrap_angle((-z - k.lh * s2).atan2(r - k.l1 - k.lh * c2) - theta2);
            PositionBranch {
                label: BranchLabel::ElbowUp,
                theta1,
                theta2,
                theta4,
            }
        })
        .collect();
    // The elbow sits at height −Lh·sin θ2 above the shoulder; the higher one is "up".
    branches.sort_by(|a, b| a.theta2.sin().total_cmp(&b.theta2.sin()));
    if branches.len() == 2 {
        branches[1].label = BranchLabel::ElbowDown;
    }
    PositionSolve {
        branches,
        status: PositionStatus::Reachable,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristSolution {
    /// `(W0, W1, W2)`.
    pub angles: [f64; 3],
    /// `|sin W1| < WRIST_SINGULAR_TOL`: W0 is pinned to 0 and W2 carries the sum.
    pub singular: bool,
}

impl WristSolution {
    /// The other wrist solution `(W0 + π, −W1, W2 + π)`, which yields the same rotation.
    pub fn flipped(&self) -> Self {
        let [a, b, c] = self.angles;
        Self {
            angles: [wrap_angle(a + PI), -b, wrap_angle(c + PI)],
            singular: self.singular,
        }
    }
}

/// Extracts `(W0, W1, W2)` from `R_6^3`, taking the solution with `sin W1 ≥ 0`.
///
/// W1 is computed as `atan2(√(R21² + R22²), −R23)` so no division by `cos W2`
/// is needed.
pub fn wrist_angles_from_r36(r: &Matrix3<f64>) -> WristSolution {
    let s6 = r[(1, 0)].hypot(r[(1, 1)]);
    let theta6 = s6.atan2(-r[(1, 2)]);
    if s6 < WRIST_SINGULAR_TOL {
        // sin θ6 = 0: with θ5 = 0, R31 = sin θ7 and R32 = cos θ7 for either sign of cos θ6.
        return WristSolution {
            angles: [0.0, theta6, r[(2, 0)].atan2(r[(2, 1)])],
            singular: true,
        };
    }
    WristSolution {
        angles: [
            r[(2, 2)].atan2(r[(0, 2)]),
            theta6,
            (-r[(1, 1)]).atan2(r[(1, 0)]),
        ],
        singular: false,
    }
}

/// Rotation of the E1 frame before its twist, `R_3^0(S0, S1, E1)` with E0 = 0.
fn elbow_rotation(model: &RobotModel, s0: f64, s1: f64, e1: f64) -> Matrix3<f64> {
    let joints = model.joints();
    let mut r = Matrix3::identity();
    for (joint, q) in joints.iter().zip([s0, s1, 0.0]) {
        r *= dh_transform(&joint.dh, joint.kind, q).rotation;
    }
    let theta = e1 + joints[3].dh.theta_offset;
    r * nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), theta).matrix()
}

/// Wrist angles from the target rotation `R_6^0` and the solved position joints.
pub fn solve_wrist(
    model: &RobotModel,
    r06: &Matrix3<f64>,
    s0: f64,
    s1: f64,
    e1: f64,
) -> WristSolution {
    let r36 = elbow_rotation(model, s0, s1, e1).transpose() * r06;
    wrist_angles_from_r36(&r36)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analytic6Branch {
    pub label: BranchLabel,
    /// Full 7-vector with the E0 entry exactly 0.
    pub q: Vec<f64>,
    pub within_limits: bool,
    pub wrist_singular: bool,
    pub pos_err: f64,
    pub rot_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analytic6Status {
    /// At least one branch is within joint limits.
    Solved,
    /// Branches exist but all violate joint limits.
    OutsideLimits,
    Unreachable {
        excess: f64,
    },
    ShoulderSingular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analytic6Solution {
    pub branches: Vec<Analytic6Branch>,
    pub status: Analytic6Status,
}

/// Inverse kinematics of the E0-locked arm for an end-effector target.
///
/// Returns up to two branches (elbow up and down). On the exact arm the
/// W0-W1 offset moves the two S0 values apart slightly. Branches that violate
/// joint limits are kept and flagged.
pub fn solve_6dof(model: &RobotModel, target: &Pose) -> Result<Analytic6Solution> {
    let k = Reduced6Constants::from_model(model)?;
    let approach = target.rotation.column(2).into_owned();
    let wrist = Pose::new(
        target.rotation,
        target.translation - approach * k.tool_length,
    );
    // The neglected W0-W1 offset can put reachable targets just outside the reduced arm's annulus.
    let position = position_joints_with_slack(&wrist, &k, k.l5.abs() + 1e-9);
    match position.status {
        PositionStatus::Reachable => {}
        PositionStatus::Unreachable { excess } => {
            return Ok(Analytic6Solution {
                branches: vec![],
                status: Analytic6Status::Unreachable { excess },
            })
        }
        PositionStatus::ShoulderSingular => {
            return Ok(Analytic6Solution {
                branches: vec![],
                status: Analytic6Status::ShoulderSingular,
            })
        }
    }

    let mut branches: Vec<Analytic6Branch> = Vec::new();
    for pb in &position.branches {
        let (s0, s1, e1) = pb.joints(&k);
        let wrist_sol = solve_wrist(model, &target.rotation, s0, s1, e1);
        let candidates = [wrist_sol, wrist_sol.flipped()];
        // Prefer the sin W1 ≥ 0 wrist unless only the flipped one respects limits.
        let mut chosen = None;
        for w in candidates {
            let q = assemble(s0, s1, e1, &w);
            if let Some(refined) = refine(model, target, q) {
                let fits = model.within_limits(&refined);
                if chosen.is_none() || fits {
                    let keep = chosen
                        .as_ref()
                        .map(|(_, _, f): &(Vec<f64>, WristSolution, bool)| !f)
                        .unwrap_or(true);
                    if keep {
                        chosen = Some((refined, w, fits));
                    }
                }
                if fits {
                    break;
                }
            }
        }
        let Some((q, w, within_limits)) = chosen else {
            continue;
        };
        let reached = fpk(model, &q)?;
        let (pos_err, rot_err) = pose_error_norms(&reached, target);
        if pos_err > ROUND_TRIP_TOL || rot_err > ROUND_TRIP_TOL {
            continue;
        }
        let duplicate = branches
            .iter()
            .any(|b| b.q.iter().zip(&q).all(|(a, c)| (a - c).abs() < 1e-9));
        if duplicate {
            continue;
        }
        branches.push(Analytic6Branch {
            label: pb.label,
            q,
            within_limits,
            wrist_singular: w.singular,
            pos_err,
            rot_err,
        });
    }

    let status = if branches.is_empty() {
        // The closed form found a solution of the reduced arm but the exact arm misses it.
        Analytic6Status::Unreachable { excess: 0.0 }
    } else if branches.iter().any(|b| b.within_limits) {
        Analytic6Status::Solved
    } else {
        Analytic6Status::OutsideLimits
    };
    Ok(Analytic6Solution { branches, status })
}

fn assemble(s0: f64, s1: f64, e1: f64, w: &WristSolution) -> Vec<f64> {
    vec![s0, s1, 0.0, e1, w.angles[0], w.angles[1], w.angles[2]]
}

/// Newton iteration on the six free joints of the exact chain, E0 held at 0.
fn refine(model: &RobotModel, target: &Pose, mut q: Vec<f64>) -> Option<Vec<f64>> {
    debug_assert!(model.joints().iter().all(|j| j.kind == JointKind::Revolute));
    let free: Vec<usize> = (0..model.dof()).filter(|&i| i != LOCKED_JOINT).collect();
    for _ in 0..REFINE_MAX_STEPS {
        let err = pose_error(&fpk(model, &q).ok()?, target);
        if err.amax() < REFINE_TOL {
            break;
        }
        let full = jacobian(model, &q).ok()?;
        let j = DMatrix::from_fn(6, free.len(), |r, c| full.matrix()[(r, free[c])]);
        let step = pseudoinverse(&j).matrix * DVector::from_column_slice(err.as_slice());
        for (c, &i) in free.iter().enumerate() {
            q[i] += step[c];
        }
    }
    for v in q.iter_mut() {
        *v = wrap_angle(*v);
    }
    let (pos, rot) = pose_error_norms(&fpk(model, &q).ok()?, target);
    (pos <= ROUND_TRIP_TOL && rot <= ROUND_TRIP_TOL).then_some(q)
}
