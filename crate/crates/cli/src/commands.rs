use std::fmt::Write as _;

use manipkd::dynamics::Dynamics;
use manipkd::format::{join, num};
use manipkd::ik_analytic6::{solve_6dof, Analytic6Status};
use manipkd::ik_iterative::{solve_ccd, solve_pinv, solve_pinv_rr, IKParams, IKStatus};
use manipkd::kinematics::{fpk, frame_origins, jacobian, yoshikawa};
use manipkd::model::load_model_file;
use manipkd::trajectory::{circle_waypoints, parse_path_csv, resolve_trajectory, CartesianPath};
use manipkd::workspace::{export_workspace_csv, sample_workspace};
use manipkd::{builtin_baxter_left, builtin_planar_2r, Pose, RobotModel};
use nalgebra::Vector3;

use crate::args::*;

pub const MODEL_ENV: &str = "MANIPKD_MODEL_PATH";

/// Text for the output target plus whether the solver reached its goal.
pub struct Output {
    pub text: String,
    pub solved: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, solved: true }
    }
}

pub type CmdResult = Result<Output, String>;

fn err(e: manipkd::Error) -> String {
    e.to_string()
}

pub fn resolve_model(selector: Option<&str>) -> Result<RobotModel, String> {
    let env = std::env::var(MODEL_ENV).ok().filter(|s| !s.is_empty());
    let selector = selector.map(str::to_string).or(env);
    match selector.as_deref() {
        None | Some("baxter-left") => Ok(builtin_baxter_left()),
        Some("planar2r") => builtin_planar_2r(1.0, 1.0).map_err(err),
        Some(s) if s.starts_with("planar2r:") => {
            let lengths: List = s["planar2r:".len()..]
                .parse()
                .map_err(|e| format!("--model: {e}"))?;
            let [a1, a2] = lengths.fixed::<2>("--model planar2r")?;
            builtin_planar_2r(a1, a2).map_err(err)
        }
        Some(path) => load_model_file(path).map_err(err),
    }
}

fn joints(model: &RobotModel, list: &List, flag: &str) -> Result<Vec<f64>, String> {
    if list.0.len() != model.dof() {
        return Err(format!(
            "{flag} expects {} values for model `{}`, got {}",
            model.dof(),
            model.name(),
            list.0.len()
        ));
    }
    Ok(list.0.clone())
}

fn vec3(list: &List, flag: &str) -> Result<Vector3<f64>, String> {
    list.fixed::<3>(flag).map(Vector3::from)
}

fn quat(list: &List, flag: &str) -> Result<[f64; 4], String> {
    let q = list.fixed::<4>(flag)?;
    if q.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-9 {
        return Err(format!("{flag} must be a nonzero quaternion"));
    }
    Ok(q)
}

pub fn run(model: &RobotModel, command: &Command, verbose: u8) -> CmdResult {
    match command {
        Command::Fpk(a) => fpk_cmd(model, a),
        Command::Skeleton(a) => skeleton_cmd(model, a),
        Command::Jacobian(a) => jacobian_cmd(model, a),
        Command::Ik6(a) => ik6_cmd(model, a),
        Command::Ik(a) => ik_cmd(model, a, verbose),
        Command::Dynamics(a) => dynamics_cmd(model, a),
        Command::Workspace(a) => workspace_cmd(model, a, verbose),
        Command::Traj(a) => traj_cmd(model, a, verbose),
    }
}

fn fpk_cmd(model: &RobotModel, a: &JointArgs) -> CmdResult {
    let q = joints(model, &a.q, "--q")?;
    let pose = fpk(model, &q).map_err(err)?;
    let p = pose.translation;
    let values = [p.x, p.y, p.z].into_iter().chain(pose.quaternion_wxyz());
    Ok(Output::ok(format!("{}\n", join(values))))
}

fn skeleton_cmd(model: &RobotModel, a: &JointArgs) -> CmdResult {
    let q = joints(model, &a.q, "--q")?;
    let mut out = String::from("frame,x,y,z\n");
    for (k, p) in frame_origins(model, &q).map_err(err)?.iter().enumerate() {
        writeln!(out, "{k},{}", join([p.x, p.y, p.z])).unwrap();
    }
    Ok(Output::ok(out))
}

fn jacobian_cmd(model: &RobotModel, a: &JointArgs) -> CmdResult {
    let q = joints(model, &a.q, "--q")?;
    let j = jacobian(model, &q).map_err(err)?;
    let mut out = String::new();
    for row in j.matrix().row_iter() {
        writeln!(out, "{}", join(row.iter().copied())).unwrap();
    }
    writeln!(out, "yoshikawa,{}", num(yoshikawa(j.matrix()))).unwrap();
    Ok(Output::ok(out))
}

fn ik6_cmd(model: &RobotModel, a: &Ik6Args) -> CmdResult {
    let target = Pose::from_quaternion(
        vec3(&a.target_pos, "--target-pos")?,
        quat(&a.target_quat, "--target-quat")?,
    );
    let sol = solve_6dof(model, &target).map_err(err)?;
    let mut out = String::from("branch");
    for i in 0..model.dof() {
        write!(out, ",q{i}").unwrap();
    }
    out.push_str(",within_limits,pos_err,rot_err\n");
    for b in &sol.branches {
        writeln!(
            out,
            "{},{},{},{},{}",
            b.label.as_str(),
            join(b.q.iter().copied()),
            b.within_limits,
            num(b.pos_err),
            num(b.rot_err)
        )
        .unwrap();
    }
    let note = match sol.status {
        Analytic6Status::Solved => None,
        Analytic6Status::OutsideLimits => Some("no branch within joint limits".to_string()),
        Analytic6Status::Unreachable { excess } => {
            Some(format!("target out of reach by {}", num(excess)))
        }
        Analytic6Status::ShoulderSingular => Some("wrist centre on the shoulder axis".to_string()),
    };
    if let Some(n) = &note {
        eprintln!("ik6: {n}");
    }
    Ok(Output {
        text: out,
        solved: note.is_none(),
    })
}

fn ik_params(base: IKParams, rng_seed: Option<u64>, max_restarts: Option<usize>) -> IKParams {
    IKParams {
        rng_seed: rng_seed.unwrap_or(base.rng_seed),
        max_restarts: max_restarts.unwrap_or(base.max_restarts),
        ..base
    }
}

fn ik_cmd(model: &RobotModel, a: &IkArgs, verbose: u8) -> CmdResult {
    let seed = joints(model, &a.seed_q, "--seed-q")?;
    let pos = vec3(&a.target_pos, "--target-pos")?;
    let mut params = ik_params(IKParams::default(), a.rng_seed, a.max_restarts);
    params.step = a.step.unwrap_or(params.step);
    params.tol_pos = a.tol_pos.unwrap_or(params.tol_pos);
    params.tol_rot = a.tol_rot.unwrap_or(params.tol_rot);
    params.max_iters = a.max_iters.unwrap_or(params.max_iters);
    let target = match &a.target_quat {
        Some(q) => Pose::from_quaternion(pos, quat(q, "--target-quat")?),
        None => {
            params = params.position_only();
            Pose::from_translation(pos)
        }
    };
    params.validate().map_err(err)?;
    let r = match a.solver {
        Solver::Pinv => solve_pinv(model, &target, &seed, &params),
        Solver::PinvRr => solve_pinv_rr(model, &target, &seed, &params),
        Solver::Ccd => {
            if a.target_quat.is_some() {
                return Err("--solver ccd is position-only; drop --target-quat".into());
            }
            solve_ccd(model, &pos, &seed, &params)
        }
    }
    .map_err(err)?;
    if verbose > 0 {
        eprintln!(
            "ik: {} after {} iterations, {} restarts",
            r.status.as_str(),
            r.iterations,
            r.restarts
        );
    }
    let joints = match &r.q {
        Some(q) => join(q.iter().copied()),
        None => vec![""; model.dof()].join(","),
    };
    let text = format!(
        "{},{},{},{},{},{}\n",
        r.status.as_str(),
        r.iterations,
        r.restarts,
        num(r.final_pos_err),
        num(r.final_rot_err),
        joints
    );
    Ok(Output {
        text,
        solved: r.status == IKStatus::Solved,
    })
}

fn dynamics_cmd(model: &RobotModel, a: &DynamicsArgs) -> CmdResult {
    let q = joints(model, &a.q, "--q")?;
    let zeros = List(vec![0.0; model.dof()]);
    let qdot = joints(model, a.qdot.as_ref().unwrap_or(&zeros), "--qdot")?;
    let qddot = joints(model, a.qddot.as_ref().unwrap_or(&zeros), "--qddot")?;
    let d = Dynamics::new(model).map_err(err)?;
    let triple = d.triple(&q, &qdot).map_err(err)?;
    let mut out = String::new();
    for row in triple.m.row_iter() {
        writeln!(out, "{}", join(row.iter().copied())).unwrap();
    }
    writeln!(out, "C,{}", join(triple.c.iter().copied())).unwrap();
    writeln!(out, "G,{}", join(triple.g.iter().copied())).unwrap();
    if a.qdot.is_some() || a.qddot.is_some() {
        let tau = d.inverse_dynamics(&q, &qdot, &qddot).map_err(err)?;
        writeln!(out, "tau,{}", join(tau.iter().copied())).unwrap();
    }
    Ok(Output::ok(out))
}

fn workspace_cmd(model: &RobotModel, a: &WorkspaceArgs, verbose: u8) -> CmdResult {
    let samples = sample_workspace(model, a.count, a.rng_seed).map_err(err)?;
    if verbose > 0 {
        eprintln!(
            "workspace: {} samples, reach bound {}",
            samples.len(),
            num(model.reach_bound())
        );
    }
    export_workspace_csv(&samples).map(Output::ok).map_err(err)
}

fn traj_cmd(model: &RobotModel, a: &TrajArgs, verbose: u8) -> CmdResult {
    let (path, opts) = match &a.path {
        TrajPath::Circle(c) => {
            let seed = joints(model, &c.solve.seed_q, "--seed-q")?;
            let rotation = fpk(model, &seed).map_err(err)?.rotation;
            let path = circle_waypoints(
                vec3(&c.center, "--center")?,
                c.radius,
                vec3(&c.normal, "--normal")?,
                c.count,
                rotation,
            )
            .map_err(err)?;
            (path, &c.solve)
        }
        TrajPath::Csv(c) => {
            let text = std::fs::read_to_string(&c.path)
                .map_err(|e| format!("{}: {e}", c.path.display()))?;
            let path: CartesianPath = parse_path_csv(&text).map_err(err)?;
            (path, &c.solve)
        }
    };
    let seed = joints(model, &opts.seed_q, "--seed-q")?;
    let params = ik_params(IKParams::default(), opts.rng_seed, opts.max_restarts);
    let traj = resolve_trajectory(model, &path, &seed, &params, opts.strict).map_err(err)?;
    let solved = traj.solved_count();
    if verbose > 0 || solved < path.len() {
        eprintln!("traj: {solved}/{} waypoints solved", path.len());
    }
    if let Some(k) = traj.aborted_at {
        eprintln!("traj: aborted at waypoint {k}");
    }
    Ok(Output {
        text: traj.to_csv(model.dof()),
        solved: solved == path.len(),
    })
}
