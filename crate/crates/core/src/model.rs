//! Robot models: Denavit-Hartenberg rows, joint limits and link inertial data.
//!
//! A [`RobotModel`] is validated once at construction and is immutable
//! afterwards. Models are read from and written to a JSON document:
//!
//! ```json
//! {
//!   "name": "planar",
//!   "joints": [
//!     { "name": "J1", "kind": "revolute", "d": 0.0, "theta_offset": 0.0,
//!       "a": 0.5, "alpha": 0.0, "limit_lo": -3.14, "limit_hi": 3.14 }
//!   ],
//!   "inertias": [
//!     { "mass": 1.0, "com": [-0.25, 0.0, 0.0],
//!       "inertia": [0.0, 0.0625, 0.0625, 0.0, 0.0, 0.0] }
//!   ]
//! }
//! ```
//!
//! Angles are radians and lengths meters. `inertia` lists the tensor about the
//! link-frame origin as `[Ixx, Iyy, Izz, Ixy, Ixz, Iyz]` using tensor sign
//! convention (off-diagonals are `-∫xy dm` etc., as in URDF). An optional
//! `source` string records where the numbers came from.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::Pose;

const BAXTER_LEFT_JSON: &str = include_str!("../models/baxter_left.json");

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// Standard DH row, composed as `Rot_z(θ)·Trans_z(d)·Trans_x(a)·Rot_x(α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub d: f64,
    pub theta_offset: f64,
    pub a: f64,
    pub alpha: f64,
}

impl DhRow {
    /// `alpha` is wrapped into `(-π, π]`.
    pub fn new(d: f64, theta_offset: f64, a: f64, alpha: f64) -> Self {
        let alpha = if alpha.is_finite() {
            wrap_angle(alpha)
        } else {
            alpha
        };
        Self {
            d,
            theta_offset,
            a,
            alpha,
        }
    }

    fn is_finite(&self) -> bool {
        self.d.is_finite()
            && self.theta_offset.is_finite()
            && self.a.is_finite()
            && self.alpha.is_finite()
    }

    /// Distance between consecutive frame origins, independent of the joint value.
    pub fn link_offset(&self) -> f64 {
        self.a.hypot(self.d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub kind: JointKind,
    pub dh: DhRow,
    pub limit_lo: f64,
    pub limit_hi: f64,
}

impl JointSpec {
    pub fn revolute(name: impl Into<String>, dh: DhRow, limit_lo: f64, limit_hi: f64) -> Self {
        Self {
            name: name.into(),
            kind: JointKind::Revolute,
            dh,
            limit_lo,
            limit_hi,
        }
    }

    pub fn within_limits(&self, value: f64) -> bool {
        value >= self.limit_lo && value <= self.limit_hi
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.limit_lo, self.limit_hi)
    }
}

/// Mass, center of mass (link frame) and inertia tensor about the link-frame origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkInertia {
    pub mass: f64,
    pub com: Vector3<f64>,
    pub inertia: Matrix3<f64>,
}

impl LinkInertia {
    /// Builds from `[Ixx, Iyy, Izz, Ixy, Ixz, Iyz]`.
    pub fn from_components(mass: f64, com: Vector3<f64>, c: [f64; 6]) -> Self {
        let inertia = Matrix3::new(c[0], c[3], c[4], c[3], c[1], c[5], c[4], c[5], c[2]);
        Self { mass, com, inertia }
    }

    /// A point mass located at `com`; the tensor is the parallel-axis term only.
    pub fn point_mass(mass: f64, com: Vector3<f64>) -> Self {
        let inertia = mass * (Matrix3::identity() * com.norm_squared() - com * com.transpose());
        Self { mass, com, inertia }
    }

    pub fn components(&self) -> [f64; 6] {
        let i = &self.inertia;
        [
            i[(0, 0)],
            i[(1, 1)],
            i[(2, 2)],
            i[(0, 1)],
            i[(0, 2)],
            i[(1, 2)],
        ]
    }

    /// Homogeneous center of mass `(x̄, ȳ, z̄, 1)`.
    pub fn com_homogeneous(&self) -> Vector4<f64> {
        self.com.push(1.0)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(format!("mass must be positive, got {}", self.mass));
        }
        if !self
            .com
            .iter()
            .chain(self.inertia.iter())
            .all(|v| v.is_finite())
        {
            return Err("non-finite inertial value".into());
        }
        let i = &self.inertia;
        let scale = i.trace().abs().max(f64::MIN_POSITIVE);
        if (i - i.transpose()).amax() > 1e-12 * scale {
            return Err("inertia tensor is not symmetric".into());
        }
        let (xx, yy, zz) = (i[(0, 0)], i[(1, 1)], i[(2, 2)]);
        if xx < 0.0 || yy < 0.0 || zz < 0.0 {
            return Err("inertia tensor has a negative diagonal entry".into());
        }
        let slack = 1e-12 * scale;
        if xx > yy + zz + slack || yy > xx + zz + slack || zz > xx + yy + slack {
            return Err("inertia tensor violates the triangle inequality".into());
        }
        Ok(())
    }
}

/// An ordered serial chain of joints with one inertia record per moving link.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    name: String,
    joints: Vec<JointSpec>,
    inertias: Vec<LinkInertia>,
    tool: Pose,
    source: Option<String>,
}

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        joints: Vec<JointSpec>,
        inertias: Vec<LinkInertia>,
        tool: Pose,
    ) -> Result<Self> {
        let model = Self {
            name: name.into(),
            joints,
            inertias,
            tool,
            source: None,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::InvalidModel("model has no joints".into()));
        }
        if self.joints.len() != self.inertias.len() {
            return Err(Error::InvalidModel(format!(
                "{} joints but {} inertia records",
                self.joints.len(),
                self.inertias.len()
            )));
        }
        for (joint, inertia) in self.joints.iter().zip(&self.inertias) {
            let fail = |reason: String| Error::InvalidJoint {
                joint: joint.name.clone(),
                reason,
            };
            if !joint.dh.is_finite() {
                return Err(fail("non-finite DH parameter".into()));
            }
            if !(joint.limit_lo.is_finite() && joint.limit_hi.is_finite()) {
                return Err(fail("non-finite joint limit".into()));
            }
            if joint.limit_lo >= joint.limit_hi {
                return Err(fail(format!(
                    "empty limit interval [{}, {}]",
                    joint.limit_lo, joint.limit_hi
                )));
            }
            inertia.validate().map_err(fail)?;
        }
        let (ortho, det) = self.tool.orthonormality_error();
        if ortho > 1e-10 || det > 1e-10 || !self.tool.translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidModel(
                "tool transform is not a rigid motion".into(),
            ));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn inertias(&self) -> &[LinkInertia] {
        &self.inertias
    }

    pub fn tool(&self) -> &Pose {
        &self.tool
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn lower_limits(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.limit_lo).collect()
    }

    pub fn upper_limits(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.limit_hi).collect()
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.len() == self.dof() && self.joints.iter().zip(q).all(|(j, &v)| j.within_limits(v))
    }

    /// Upper bound on the distance from the base origin to the end effector,
    /// from the triangle inequality over the per-row offsets `√(a² + d²)`.
    ///
    /// Prismatic joints make the reach unbounded; their `d` is taken as the
    /// largest magnitude the limits allow.
    pub fn reach_bound(&self) -> f64 {
        self.joints
            .iter()
            .map(|j| match j.kind {
                JointKind::Revolute => j.dh.link_offset(),
                JointKind::Prismatic => {
                    let d = (j.dh.d + j.limit_lo).abs().max((j.dh.d + j.limit_hi).abs());
                    j.dh.a.hypot(d)
                }
            })
            .sum::<f64>()
            + self.tool.translation.norm()
    }

    pub fn all_revolute(&self) -> bool {
        self.joints.iter().all(|j| j.kind == JointKind::Revolute)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    joints: Vec<JointRecord>,
    inertias: Vec<InertiaRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointRecord {
    name: String,
    kind: JointKind,
    d: f64,
    theta_offset: f64,
    a: f64,
    alpha: f64,
    limit_lo: f64,
    limit_hi: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InertiaRecord {
    mass: f64,
    com: [f64; 3],
    inertia: [f64; 6],
}

/// Parses and validates a JSON model document.
pub fn load_model(document: &str) -> Result<RobotModel> {
    let doc: ModelDocument =
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    let joints = doc
        .joints
        .into_iter()
        .map(|r| JointSpec {
            name: r.name,
            kind: r.kind,
            dh: DhRow::new(r.d, r.theta_offset, r.a, r.alpha),
            limit_lo: r.limit_lo,
            limit_hi: r.limit_hi,
        })
        .collect();
    let inertias = doc
        .inertias
        .into_iter()
        .map(|r| LinkInertia::from_components(r.mass, Vector3::from(r.com), r.inertia))
        .collect();
    let mut model = RobotModel::new(doc.name, joints, inertias, Pose::identity())?;
    model.source = doc.source;
    Ok(model)
}

pub fn load_model_file(path: impl AsRef<Path>) -> Result<RobotModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    load_model(&text)
}

/// Serializes a model to the JSON document format. The tool transform is not
/// part of the format and must be identity.
pub fn serialize_model(model: &RobotModel) -> Result<String> {
    if model.tool != Pose::identity() {
        return Err(Error::InvalidArgument(
            "models with a non-identity tool transform cannot be serialized".into(),
        ));
    }
    let doc = ModelDocument {
        name: model.name.clone(),
        source: model.source.clone(),
        joints: model
            .joints
            .iter()
            .map(|j| JointRecord {
                name: j.name.clone(),
                kind: j.kind,
                d: j.dh.d,
                theta_offset: j.dh.theta_offset,
                a: j.dh.a,
                alpha: j.dh.alpha,
                limit_lo: j.limit_lo,
                limit_hi: j.limit_hi,
            })
            .collect(),
        inertias: model
            .inertias
            .iter()
            .map(|i| InertiaRecord {
                mass: i.mass,
                com: i.com.into(),
                inertia: i.components(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
}

/// The Baxter left arm: seven revolute joints S0, S1, E0, E1, W0, W1, W2.
///
/// The 0.229525 m tool offset is the last DH row, so the tool transform is
/// identity. Joint limits and inertial data come from the bundled model file.
pub fn builtin_baxter_left() -> RobotModel {
    load_model(BAXTER_LEFT_JSON).expect("bundled Baxter model is valid")
}

/// A two-link planar arm moving in the base xy-plane, for analytic checks.
///
/// Each link carries a unit point mass at its midpoint; joint limits are `[-π, π]`.
pub fn builtin_planar_2r(a1: f64, a2: f64) -> Result<RobotModel> {
    for (name, a) in [("a1", a1), ("a2", a2)] {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "link length {name} must be positive, got {a}"
            )));
        }
    }
    let joints = [("J1", a1), ("J2", a2)]
        .into_iter()
        .map(|(name, a)| JointSpec::revolute(name, DhRow::new(0.0, 0.0, a, 0.0), -PI, PI))
        .collect();
    let inertias = [a1, a2]
        .into_iter()
        .map(|a| LinkInertia::point_mass(1.0, Vector3::new(-a / 2.0, 0.0, 0.0)))
        .collect();
    Ok(RobotModel::new(
        format!("planar2r:{a1},{a2}"),
        joints,
        inertias,
        Pose::identity(),
    )?
    .with_source("analytic two-link planar arm"))
}
