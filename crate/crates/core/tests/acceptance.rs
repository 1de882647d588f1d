//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use manipkd::dynamics::Dynamics;
use manipkd::ik_analytic6::{solve_6dof, LOCKED_JOINT};
use manipkd::ik_iterative::{solve_ccd, solve_pinv, solve_pinv_rr, IKParams};
use manipkd::kinematics::{
    fpk, fpk_position_closed_form_baxter, jacobian, null_projector, pose_error_norms, pseudoinverse,
};
use manipkd::trajectory::{circle_waypoints, resolve_trajectory};
use manipkd::workspace::{sample_workspace, Band};
use manipkd::{builtin_baxter_left, RobotModel};
use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn within_budget(start: Instant, budget: Duration) -> std::result::Result<Duration, String> {
    let t = start.elapsed();
    if t < budget {
        Ok(t)
    } else {
        Err(format!("runtime {t:.2?} exceeds {budget:?}"))
    }
}

fn check(ok: bool, msg: String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn midpoint(model: &RobotModel) -> Vec<f64> {
    model
        .joints()
        .iter()
        .map(|j| 0.5 * (j.limit_lo + j.limit_hi))
        .collect()
}

fn closed_form_agreement() -> Outcome {
    let m = builtin_baxter_left();
    let mut r = rng(101);
    let qs: Vec<Vec<f64>> = (0..1000).map(|_| uniform_q(&m, &mut r)).collect();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for q in &qs {
        let chain = fpk(&m, q).unwrap().translation;
        let closed = fpk_position_closed_form_baxter(q).unwrap();
        worst = worst.max((chain - closed).amax());
    }
    let t = within_budget(start, Duration::from_secs(1))?;
    check(
        worst <= 1e-9,
        format!("max componentwise difference {worst:.3e} m > 1e-9"),
    )?;
    Ok(format!(
        "1000 configurations, max difference {worst:.2e} m, {t:.2?}"
    ))
}

fn jacobian_vs_finite_differences() -> Outcome {
    let m = builtin_baxter_left();
    let mut r = rng(102);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let q = uniform_q(&m, &mut r);
        let j = jacobian(&m, &q).unwrap().into_matrix();
        let fd = jacobian_fd(&m, &q, 1e-6);
        worst = worst.max((&j - &fd).norm() / j.norm());
    }
    let t = within_budget(start, Duration::from_secs(5))?;
    check(worst <= 1e-5, format!("relative error {worst:.3e} > 1e-5"))?;
    Ok(format!(
        "100 configurations, max relative error {worst:.2e}, {t:.2?}"
    ))
}

fn penrose_and_projector() -> Outcome {
    let m = builtin_baxter_left();
    let mut r = rng(103);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let q = uniform_q(&m, &mut r);
        let a = jacobian(&m, &q).unwrap().into_matrix();
        let p = pseudoinverse(&a).matrix;
        let ap = &a * &p;
        let pa = &p * &a;
        let n = null_projector(&a);
        let residuals = [
            (&ap * &a - &a).amax(),
            (&pa * &p - &p).amax(),
            (&ap - ap.transpose()).amax(),
            (&pa - pa.transpose()).amax(),
            (&a * &n).amax(),
            (&n * &n - &n).amax(),
            (&n - n.transpose()).amax(),
        ];
        worst = residuals.into_iter().fold(worst, f64::max);
    }
    check(worst <= 1e-8, format!("max residual {worst:.3e} > 1e-8"))?;
    Ok(format!("100 configurations, max residual {worst:.2e}"))
}

fn analytic_round_trip() -> Outcome {
    let m = builtin_baxter_left();
    let mut r = rng(104);
    let targets: Vec<_> = (0..500)
        .map(|_| {
            let mut q = uniform_q(&m, &mut r);
            q[2] = 0.0;
            fpk(&m, &q).unwrap()
        })
        .collect();
    let start = Instant::now();
    let solutions: Vec<_> = targets.iter().map(|t| solve_6dof(&m, t).unwrap()).collect();
    let t = within_budget(start, Duration::from_secs(5))?;
    let (mut misses, mut false_positive, mut branches) = (0, 0, 0);
    for (target, sol) in targets.iter().zip(&solutions) {
        let mut good = 0;
        for b in &sol.branches {
            branches += 1;
            let (p, rot) = pose_error_norms(&fpk(&m, &b.q).unwrap(), target);
            if p <= 1e-6 && rot <= 1e-6 && b.q[LOCKED_JOINT] == 0.0 {
                good += 1;
            } else {
                false_positive += 1;
            }
        }
        if good == 0 {
            misses += 1;
        }
    }
    check(
        misses == 0 && false_positive == 0,
        format!(
            "{misses} targets without a valid branch, {false_positive} false-positive branches"
        ),
    )?;
    Ok(format!(
        "500 targets, {branches} branches, all within 1e-6 m / 1e-6 rad, {t:.2?}"
    ))
}

fn iterative_solve_rates() -> Outcome {
    let m = builtin_baxter_left();
    let mut r = rng(105);
    let targets: Vec<_> = (0..100)
        .map(|_| fpk(&m, &uniform_q(&m, &mut r)).unwrap())
        .collect();
    let params = IKParams {
        rng_seed: 7,
        ..IKParams::default()
    };
    let seed = midpoint(&m);
    let start = Instant::now();
    let verified = |q: &Option<Vec<f64>>, target, rot: bool| {
        let (p, e) = pose_error_norms(&fpk(&m, q.as_ref().unwrap()).unwrap(), target);
        m.within_limits(q.as_ref().unwrap()) && p <= params.tol_pos && (!rot || e <= params.tol_rot)
    };
    let (mut pinv, mut rr, mut ccd, mut bad) = (0, 0, 0, 0);
    for target in &targets {
        let a = solve_pinv(&m, target, &seed, &params).unwrap();
        let b = solve_pinv_rr(&m, target, &seed, &params).unwrap();
        let c = solve_ccd(&m, &target.translation, &seed, &params).unwrap();
        for (res, rot, count) in [
            (&a, true, &mut pinv),
            (&b, true, &mut rr),
            (&c, false, &mut ccd),
        ] {
            if res.solved() {
                if verified(&res.q, target, rot) {
                    *count += 1;
                } else {
                    bad += 1;
                }
            }
        }
    }
    let t = within_budget(start, Duration::from_secs(60))?;
    check(
        bad == 0,
        format!("{bad} solved results fail re-verification"),
    )?;
    check(rr >= 95, format!("pinv-rr solved {rr}/100 < 95"))?;
    check(
        pinv < rr,
        format!("pinv solved {pinv}/100, not below pinv-rr {rr}/100"),
    )?;
    check(ccd >= 90, format!("ccd solved {ccd}/100 < 90"))?;
    Ok(format!(
        "pinv {pinv}/100, pinv-rr {rr}/100, ccd {ccd}/100 (position only), {t:.2?}"
    ))
}

fn dynamics_battery() -> Outcome {
    let m = builtin_baxter_left();
    let dynamics = Dynamics::new(&m).unwrap();
    let mut r = rng(106);
    let start = Instant::now();

    let (mut asym, mut min_eig) = (0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let q = uniform_q(&m, &mut r);
        let mm = dynamics.mass_matrix(&q).unwrap();
        asym = asym.max((&mm - mm.transpose()).amax());
        min_eig = min_eig.min(mm.symmetric_eigenvalues().min());
    }
    check(asym <= 1e-9, format!("M asymmetry {asym:.3e}"))?;
    check(
        min_eig > 0.0,
        format!("M not positive definite (min eigenvalue {min_eig:.3e})"),
    )?;

    let mut g_err = 0.0f64;
    let mut c_err = 0.0f64;
    for _ in 0..20 {
        let q = uniform_q(&m, &mut r);
        let g = dynamics.gravity_vector(&q).unwrap();
        let h = 1e-6;
        let grad = DVector::from_fn(7, |k, _| {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[k] += h;
            qm[k] -= h;
            (potential(&m, &qp) - potential(&m, &qm)) / (2.0 * h)
        });
        g_err = g_err.max((&g - &grad).norm() / grad.norm());

        let qd = uniform_vec(7, 1.5, &mut r);
        let c = dynamics.coriolis_vector(&q, &qd).unwrap();
        for lambda in [-1.0, 2.0, 10.0] {
            let scaled: Vec<f64> = qd.iter().map(|v| v * lambda).collect();
            let cl = dynamics.coriolis_vector(&q, &scaled).unwrap();
            c_err = c_err.max((&cl - &c * (lambda * lambda)).norm() / (c.norm() * lambda * lambda));
        }
    }
    check(
        g_err <= 1e-6,
        format!("G vs gradient of P: relative {g_err:.3e}"),
    )?;
    check(
        c_err <= 1e-9,
        format!("C homogeneity: relative {c_err:.3e}"),
    )?;

    let mut tau_err = 0.0f64;
    for _ in 0..50 {
        let q = uniform_q(&m, &mut r);
        let qd = uniform_vec(7, 1.0, &mut r);
        let qdd = uniform_vec(7, 1.0, &mut r);
        let tau = dynamics.inverse_dynamics(&q, &qd, &qdd).unwrap();
        let oracle = lagrange_torque(&m, &q, &qd, &qdd);
        tau_err = tau_err.max((&tau - &oracle).norm() / oracle.norm());
    }
    check(
        tau_err <= 1e-4,
        format!("tau vs Lagrangian oracle: relative {tau_err:.3e}"),
    )?;

    let mut planar_err = 0.0f64;
    for (a1, a2, m1, m2, lc1, lc2) in [
        (1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
        (1.0, 1.0, 1.0, 1.0, 0.5, 0.5),
        (0.7, 0.4, 2.0, 3.0, 0.3, 0.25),
    ] {
        let model = planar_two_link(a1, a2, m1, m2, lc1, lc2);
        let d = Dynamics::new(&model)
            .unwrap()
            .with_gravity(Vector3::new(0.0, -GRAVITY, 0.0));
        let book = TwoLink {
            a1,
            m1,
            m2,
            lc1,
            lc2,
            g: GRAVITY,
        };
        for _ in 0..10 {
            let q = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
            let qd = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
            let t = d.triple(&q, &qd).unwrap();
            let mb = book.mass(q);
            let cb = book.coriolis(q, qd);
            let gb = book.gravity(q);
            for i in 0..2 {
                planar_err = planar_err
                    .max((t.c[i] - cb[i]).abs())
                    .max((t.g[i] - gb[i]).abs());
                for (k, book_mik) in mb[i].iter().enumerate() {
                    planar_err = planar_err.max((t.m[(i, k)] - book_mik).abs());
                }
            }
        }
    }
    check(
        planar_err <= 1e-8,
        format!("planar two-link vs textbook: {planar_err:.3e}"),
    )?;

    let t = within_budget(start, Duration::from_secs(30))?;
    Ok(format!(
        "M asym {asym:.1e}, min eig {min_eig:.2e}; G {g_err:.1e}; C {c_err:.1e}; tau {tau_err:.1e}; two-link {planar_err:.1e}; {t:.2?}"
    ))
}

fn power_balance() -> Outcome {
    let m = builtin_baxter_left();
    let dynamics = Dynamics::new(&m).unwrap();
    let mid = midpoint(&m);
    let amp = [0.6, 0.4, 0.8, 0.5, 0.9, 0.6, 1.0];
    let freq = [0.7, 1.1, 0.9, 1.3, 1.7, 1.5, 2.1];
    let phase = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let state = |t: f64| {
        let mut q = vec![0.0; 7];
        let mut qd = vec![0.0; 7];
        let mut qdd = vec![0.0; 7];
        for i in 0..7 {
            let s = freq[i] * t + phase[i];
            q[i] = mid[i] + amp[i] * s.sin();
            qd[i] = amp[i] * freq[i] * s.cos();
            qdd[i] = -amp[i] * freq[i] * freq[i] * s.sin();
        }
        (q, qd, qdd)
    };
    let energy = |t: f64| {
        let (q, qd, _) = state(t);
        dynamics.kinetic_energy(&q, &qd).unwrap() + dynamics.potential_energy(&q).unwrap()
    };
    let mut worst = 0.0f64;
    let mut samples = Vec::with_capacity(200);
    for k in 0..200 {
        let t = 0.05 * k as f64;
        let (q, qd, qdd) = state(t);
        let tau = dynamics.inverse_dynamics(&q, &qd, &qdd).unwrap();
        let power = DVector::from_column_slice(&qd).dot(&tau);
        let dt = 1e-5;
        let de = (energy(t + dt) - energy(t - dt)) / (2.0 * dt);
        samples.push((power, de));
    }
    // Relative to the trajectory's RMS power so zero crossings do not divide by ~0.
    let rms = (samples.iter().map(|(p, _)| p * p).sum::<f64>() / samples.len() as f64).sqrt();
    for (p, de) in &samples {
        worst = worst.max((p - de).abs() / p.abs().max(rms));
    }
    check(
        worst <= 1e-4,
        format!("relative mismatch {worst:.3e} > 1e-4"),
    )?;
    Ok(format!(
        "200 instants, max relative mismatch {worst:.2e} (RMS power {rms:.2} W)"
    ))
}

fn workspace_sampling() -> Outcome {
    let m = builtin_baxter_left();
    // Rows (d, a) of the Baxter table.
    let rows = [
        (0.27035, 0.069),
        (0.0, 0.0),
        (0.36435, 0.069),
        (0.0, 0.0),
        (0.37429, 0.01),
        (0.0, 0.0),
        (0.229525, 0.0),
    ];
    let r_max: f64 = rows.iter().map(|(d, a): &(f64, f64)| d.hypot(*a)).sum();
    let start = Instant::now();
    let a = sample_workspace(&m, 100_000, 2024).unwrap();
    let t = start.elapsed();
    let b = sample_workspace(&m, 100_000, 2024).unwrap();
    check(a == b, "two runs with the same seed differ".into())?;
    let outside = a.iter().filter(|s| s.p.norm() > r_max).count();
    check(outside == 0, format!("{outside} samples beyond {r_max} m"))?;
    let count = |band| a.iter().filter(|s| s.band == band).count() as i64;
    let sizes = [count(Band::Low), count(Band::Medium), count(Band::High)];
    let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
    check(spread <= 1, format!("band sizes {sizes:?}"))?;
    let max_r = a.iter().map(|s| s.p.norm()).fold(0.0, f64::max);
    Ok(format!(
        "100000 samples, max |p| {max_r:.4} m <= {r_max:.6} m, bands {sizes:?}, {t:.2?} per run"
    ))
}

fn circle_trajectory() -> Outcome {
    let m = builtin_baxter_left();
    // Mid-workspace pose; the whole circle around its tip is reachable with the tip orientation held.
    let q_start = vec![0.0, -0.6, 0.0, 1.6, 0.0, 0.6, 0.0];
    let start_pose = fpk(&m, &q_start).unwrap();
    let start = Instant::now();
    let path = circle_waypoints(
        start_pose.translation,
        0.1,
        Vector3::z(),
        100,
        start_pose.rotation,
    )
    .unwrap();
    let traj = resolve_trajectory(&m, &path, &q_start, &IKParams::default(), false).unwrap();
    let t = within_budget(start, Duration::from_secs(30))?;
    let mut max_err = 0.0f64;
    for (e, target) in traj.entries.iter().zip(path.waypoints()) {
        if e.solved() {
            let (p, _) = pose_error_norms(&fpk(&m, e.q.as_ref().unwrap()).unwrap(), target);
            max_err = max_err.max(p);
        }
    }
    let solved = traj.solved_count();
    check(solved >= 99, format!("{solved}/100 waypoints solved"))?;
    check(
        max_err <= 2e-3,
        format!("max position error {max_err:.3e} m"),
    )?;
    Ok(format!(
        "{solved}/100 waypoints solved, max position error {max_err:.2e} m, {t:.2?}"
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed-form vs chain FPK", closed_form_agreement),
        (
            "Jacobian vs finite differences",
            jacobian_vs_finite_differences,
        ),
        (
            "Penrose conditions and null projector",
            penrose_and_projector,
        ),
        ("analytic 6-DOF IK round trip", analytic_round_trip),
        ("iterative IK solve rates", iterative_solve_rates),
        ("dynamics oracle battery", dynamics_battery),
        ("power balance", power_balance),
        ("workspace sampling", workspace_sampling),
        ("circle trajectory", circle_trajectory),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
