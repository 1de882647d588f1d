use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Comma-separated list of numbers, e.g. `0,-0.5,1.2`.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|t| {
                let t = t.trim();
                match t.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(format!("`{t}` is not a finite number")),
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}

impl List {
    pub fn fixed<const N: usize>(&self, flag: &str) -> Result<[f64; N], String> {
        self.0
            .as_slice()
            .try_into()
            .map_err(|_| format!("{flag} expects {N} values, got {}", self.0.len()))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "manipkd",
    version,
    about = "Serial-manipulator kinematics and dynamics"
)]
pub struct Cli {
    /// Robot model: `baxter-left`, `planar2r:a1,a2`, or a path to a JSON model file.
    /// Defaults to $MANIPKD_MODEL_PATH when set, else `baxter-left`.
    #[arg(long, global = true)]
    pub model: Option<String>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print diagnostics to stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// End-effector position and unit quaternion (w,x,y,z) as one CSV line.
    Fpk(JointArgs),
    /// Frame origins, one CSV line per frame: `frame,x,y,z`.
    Skeleton(JointArgs),
    /// Geometric Jacobian (6 rows, linear first) and the Yoshikawa index.
    Jacobian(JointArgs),
    /// Closed-form IK with the elbow roll locked at zero; one line per branch.
    Ik6(Ik6Args),
    /// Iterative IK: pinv, pinv-rr or ccd.
    Ik(IkArgs),
    /// Mass matrix rows, then C, G and tau.
    Dynamics(DynamicsArgs),
    /// Monte Carlo workspace samples with manipulability bands.
    Workspace(WorkspaceArgs),
    /// Resolve a Cartesian path into joint space.
    Traj(TrajArgs),
}

#[derive(Debug, Args)]
pub struct JointArgs {
    /// Joint values (rad), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub q: List,
}

#[derive(Debug, Args)]
pub struct Ik6Args {
    /// Target position x,y,z (m).
    #[arg(long, allow_hyphen_values = true)]
    pub target_pos: List,
    /// Target orientation as a quaternion w,x,y,z.
    #[arg(long, allow_hyphen_values = true)]
    pub target_quat: List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Pinv,
    PinvRr,
    Ccd,
}

#[derive(Debug, Args)]
pub struct IkArgs {
    #[arg(long, value_enum)]
    pub solver: Solver,
    /// Target position x,y,z (m).
    #[arg(long, allow_hyphen_values = true)]
    pub target_pos: List,
    /// Target orientation w,x,y,z. Omit for a position-only solve.
    #[arg(long, allow_hyphen_values = true)]
    pub target_quat: Option<List>,
    /// Initial joint vector (rad).
    #[arg(long, allow_hyphen_values = true)]
    pub seed_q: List,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tol_pos: Option<f64>,
    #[arg(long)]
    pub tol_rot: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub max_restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q: List,
    /// Joint rates; zero when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub qdot: Option<List>,
    /// Joint accelerations; zero when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub qddot: Option<List>,
}

#[derive(Debug, Args)]
pub struct WorkspaceArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

#[derive(Debug, Args)]
pub struct TrajArgs {
    #[command(subcommand)]
    pub path: TrajPath,
}

#[derive(Debug, Subcommand)]
pub enum TrajPath {
    /// Evenly spaced waypoints on a circle, holding the seed's tip orientation.
    Circle(CircleArgs),
    /// Waypoints from a CSV file with header `idx,x,y,z,qw,qx,qy,qz`.
    Csv(CsvPathArgs),
}

#[derive(Debug, Args)]
pub struct SolveOptions {
    /// Joint vector used to seed the first waypoint.
    #[arg(long, allow_hyphen_values = true)]
    pub seed_q: List,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub max_restarts: Option<usize>,
    /// Stop at the first waypoint that does not solve.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct CircleArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub center: List,
    #[arg(long)]
    pub radius: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub normal: List,
    #[arg(long)]
    pub count: usize,
    #[command(flatten)]
    pub solve: SolveOptions,
}

#[derive(Debug, Args)]
pub struct CsvPathArgs {
    /// Input path CSV.
    #[arg(long)]
    pub path: PathBuf,
    #[command(flatten)]
    pub solve: SolveOptions,
}
