//! Cartesian waypoint paths and their resolution into joint space with
//! warm-started pseudoinverse IK.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::format::{join, num};
use crate::ik_iterative::{solve_pinv_rr, IKParams, IKStatus};
use crate::model::RobotModel;
use crate::pose::Pose;

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPath {
    waypoints: Vec<Pose>,
    /// Generator name and parameters, e.g. `circle(center=…, radius=…)`.
    pub description: String,
}

impl CartesianPath {
    /// At least two waypoints. Repeated poses are allowed (a hold).
    pub fn new(waypoints: Vec<Pose>, description: impl Into<String>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidArgument(
                "a path needs at least 2 waypoints".into(),
            ));
        }
        let finite = waypoints.iter().all(|p| {
            p.translation
                .iter()
                .chain(p.rotation.iter())
                .all(|v| v.is_finite())
        });
        if !finite {
            return Err(Error::InvalidArgument(
                "waypoint contains non-finite values".into(),
            ));
        }
        Ok(Self {
            waypoints,
            description: description.into(),
        })
    }

    pub fn waypoints(&self) -> &[Pose] {
        &self.waypoints
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }
}

/// In-plane unit axes `(u, v)` with `u × v = normal`; `u` comes from the base
/// axis least aligned with the normal (x first).
fn plane_axes(normal: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = [Vector3::x(), Vector3::y(), Vector3::z()]
        .into_iter()
        .min_by(|a, b| normal.dot(a).abs().total_cmp(&normal.dot(b).abs()))
        .expect("three candidates");
    let u = (seed - normal * normal.dot(&seed)).normalize();
    (u, normal.cross(&u))
}

/// `count` poses evenly spaced by angle on a circle, all with `rotation`.
pub fn circle_waypoints(
    center: Vector3<f64>,
    radius: f64,
    normal: Vector3<f64>,
    count: usize,
    rotation: Matrix3<f64>,
) -> Result<CartesianPath> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    if count < 2 {
        return Err(Error::InvalidArgument("count must be at least 2".into()));
    }
    if (normal.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "normal must be a unit vector".into(),
        ));
    }
    let (u, v) = plane_axes(&normal);
    let waypoints = (0..count)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / count as f64;
            Pose::new(rotation, center + radius * (u * phi.cos() + v * phi.sin()))
        })
        .collect();
    CartesianPath::new(
        waypoints,
        format!(
            "circle(center={},{},{}; radius={}; normal={},{},{}; count={count})",
            center.x, center.y, center.z, radius, normal.x, normal.y, normal.z
        ),
    )
}

/// Reads `idx,x,y,z,qw,qx,qy,qz` rows (header required); rows are used in file order.
pub fn parse_path_csv(document: &str) -> Result<CartesianPath> {
    const HEADER: &str = "idx,x,y,z,qw,qx,qy,qz";
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>().join(",") != HEADER {
        return Err(Error::Parse(format!("expected header '{HEADER}'")));
    }
    let mut waypoints = Vec::new();
    for (line, record) in reader
        .deserialize::<(usize, f64, f64, f64, f64, f64, f64, f64)>()
        .enumerate()
    {
        let (_, x, y, z, qw, qx, qy, qz) =
            record.map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        let norm = (qw * qw + qx * qx + qy * qy + qz * qz).sqrt();
        if norm.is_nan() || norm <= 1e-9 {
            return Err(Error::Parse(format!("row {}: zero quaternion", line + 1)));
        }
        waypoints.push(Pose::from_quaternion(
            Vector3::new(x, y, z),
            [qw, qx, qy, qz],
        ));
    }
    CartesianPath::new(waypoints, "csv")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEntry {
    pub index: usize,
    /// Solver output; for failures, the best attempt if one exists.
    pub q: Option<Vec<f64>>,
    pub pos_err: f64,
    pub rot_err: f64,
    pub status: IKStatus,
}

impl TrajectoryEntry {
    pub fn solved(&self) -> bool {
        self.status == IKStatus::Solved
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    pub entries: Vec<TrajectoryEntry>,
    /// Strict mode only: index of the waypoint that stopped resolution.
    pub aborted_at: Option<usize>,
}

impl JointTrajectory {
    pub fn solved_count(&self) -> usize {
        self.entries.iter().filter(|e| e.solved()).count()
    }

    /// CSV with header `idx,status,pos_err,rot_err,q0..q{n−1}`; unsolved rows
    /// without a joint vector leave the joint columns empty.
    pub fn to_csv(&self, dof: usize) -> String {
        let mut out = String::from("idx,status,pos_err,rot_err");
        for i in 0..dof {
            out.push_str(&format!(",q{i}"));
        }
        out.push('\n');
        for e in &self.entries {
            let joints = match &e.q {
                Some(q) => join(q.iter().copied()),
                None => vec![""; dof].join(","),
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.index,
                e.status.as_str(),
                num(e.pos_err),
                num(e.rot_err),
                joints
            ));
        }
        out
    }
}

/// Solves each waypoint in order with [`solve_pinv_rr`], seeding from the most
/// recently solved joint vector (initially `q_start`).
///
/// Failures are recorded and skipped unless `strict`, which stops at the first one.
pub fn resolve_trajectory(
    model: &RobotModel,
    path: &CartesianPath,
    q_start: &[f64],
    params: &IKParams,
    strict: bool,
) -> Result<JointTrajectory> {
    crate::error::check_len(model.dof(), q_start.len())?;
    if !model.within_limits(q_start) {
        return Err(Error::InvalidArgument(
            "start configuration is outside joint limits".into(),
        ));
    }
    let mut seed = q_start.to_vec();
    let mut entries = Vec::with_capacity(path.len());
    for (index, target) in path.waypoints().iter().enumerate() {
        let r = solve_pinv_rr(model, target, &seed, params)?;
        let entry = TrajectoryEntry {
            index,
            q: r.q,
            pos_err: r.final_pos_err,
            rot_err: r.final_rot_err,
            status: r.status,
        };
        if entry.solved() {
            seed = entry.q.clone().expect("solved results carry q");
        }
        let failed = !entry.solved();
        entries.push(entry);
        if failed && strict {
            return Ok(JointTrajectory {
                entries,
                aborted_at: Some(index),
            });
        }
    }
    Ok(JointTrajectory {
        entries,
        aborted_at: None,
    })
}
