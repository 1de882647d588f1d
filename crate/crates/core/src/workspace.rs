//! Monte Carlo workspace sampling with Yoshikawa manipulability bands.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::num;
use crate::ik_iterative::sample_within_limits;
use crate::kinematics::{fpk, jacobian, yoshikawa};
use crate::model::RobotModel;

/// Manipulability tertile within one sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    Low,
    Medium,
    High,
}

impl Band {
    pub fn as_str(&self) -> &'static str {
        match self {
            Band::Low => "low",
            Band::Medium => "medium",
            Band::High => "high",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Band::Low),
            "medium" => Ok(Band::Medium),
            "high" => Ok(Band::High),
            other => Err(Error::Parse(format!("unknown band '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceSample {
    pub q: Vec<f64>,
    pub p: Vector3<f64>,
    pub w: f64,
    pub band: Band,
}

/// Draws `count` joint vectors uniformly within limits and evaluates position
/// and manipulability.
///
/// Joint vectors are drawn sequentially from one seeded generator; only the
/// evaluation runs in parallel, so the output is independent of thread count.
pub fn sample_workspace(
    model: &RobotModel,
    count: usize,
    rng_seed: u64,
) -> Result<Vec<WorkspaceSample>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let qs: Vec<Vec<f64>> = (0..count)
        .map(|_| sample_within_limits(model, &mut rng))
        .collect();
    let evaluated: Vec<(Vec<f64>, Vector3<f64>, f64)> = qs
        .into_par_iter()
        .map(|q| {
            let p = fpk(model, &q)?.translation;
            let w = yoshikawa(jacobian(model, &q)?.matrix());
            Ok((q, p, w))
        })
        .collect::<Result<_>>()?;

    let bands = tertile_bands(&evaluated.iter().map(|e| e.2).collect::<Vec<_>>());
    Ok(evaluated
        .into_iter()
        .zip(bands)
        .map(|((q, p, w), band)| WorkspaceSample { q, p, w, band })
        .collect())
}

/// Rank-based tertiles; ties are broken by position so band sizes differ by at most one.
pub fn tertile_bands(values: &[f64]) -> Vec<Band> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut bands = vec![Band::Low; n];
    for (rank, &idx) in order.iter().enumerate() {
        bands[idx] = match rank * 3 / n {
            0 => Band::Low,
            1 => Band::Medium,
            _ => Band::High,
        };
    }
    bands
}

pub const WORKSPACE_CSV_HEADER: &str = "x,y,z,yoshikawa,band";

/// CSV document with header `x,y,z,yoshikawa,band`.
pub fn export_workspace_csv(samples: &[WorkspaceSample]) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to export".into()));
    }
    let mut out = String::with_capacity(samples.len() * 96);
    out.push_str(WORKSPACE_CSV_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            num(s.p.x),
            num(s.p.y),
            num(s.p.z),
            num(s.w),
            s.band
        ));
    }
    Ok(out)
}

/// One row of an exported workspace document.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct WorkspaceRow {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yoshikawa: f64,
    #[serde(deserialize_with = "band_from_str")]
    pub band: Band,
}

fn band_from_str<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Band, D::Error> {
    let s = <std::borrow::Cow<'de, str> as serde::Deserialize>::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

pub fn parse_workspace_csv(document: &str) -> Result<Vec<WorkspaceRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>().join(",") != WORKSPACE_CSV_HEADER {
        return Err(Error::Parse(format!(
            "expected header '{WORKSPACE_CSV_HEADER}'"
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}
