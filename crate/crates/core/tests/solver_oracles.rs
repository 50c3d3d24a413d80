//! Independent oracles for the implicit stepper: a directly coded backward
//! Euler recurrence for the first-order kernel, and a plain fixed-point
//! iteration in the contractive regime.

use volterra_core::fode;
use volterra_core::mesh::Mesh;
use volterra_core::solver::{self, Problem, Signal, SolveOptions};

/// Backward Euler for `u' = f(t, u)`: `u_n = u_{n-1} + tau f(t_n, u_n)`,
/// each step solved by Newton polished to machine precision.
fn implicit_euler(f: impl Fn(f64, f64) -> f64, u0: f64, tau: f64, n: usize) -> Vec<f64> {
    let mut u = vec![u0];
    let mut t = 0.0;
    for _ in 0..n {
        t += tau;
        let prev = *u.last().unwrap();
        let mut x = prev;
        for _ in 0..100 {
            let g = x - prev - tau * f(t, x);
            let h = 1e-7 * x.abs().max(1.0);
            let slope = 1.0 - tau * (f(t, x + h) - f(t, x - h)) / (2.0 * h);
            let next = x - g / slope;
            if next == x {
                break;
            }
            x = next;
        }
        u.push(x);
    }
    u
}

#[test]
fn first_order_kernel_matches_implicit_euler_linear() {
    let n = 100;
    let mesh = Mesh::uniform(n, 1.0).unwrap();
    let kernel = fode::fode_kernel(1.0, &mesh).unwrap();
    let f = |_: f64, u: f64| -u;
    let p = Problem::new(&kernel, &mesh, Signal::Constant(1.0), &f).with_lipschitz(1.0);
    let traj = solver::solve(&p, &SolveOptions::default()).unwrap();
    let oracle = implicit_euler(f, 1.0, 1.0 / n as f64, n);
    for i in 0..=n {
        assert!(
            (traj.u[i] - oracle[i]).abs() <= 1e-13,
            "step {i}: {} vs {}",
            traj.u[i],
            oracle[i]
        );
    }
}

#[test]
fn first_order_kernel_matches_implicit_euler_nonlinear() {
    let n = 100;
    let mesh = Mesh::uniform(n, 1.0).unwrap();
    let kernel = fode::fode_kernel(1.0, &mesh).unwrap();
    let f = |_: f64, u: f64| (1.0 + u * u).sin();
    let p = Problem::new(&kernel, &mesh, Signal::Constant(0.0), &f);
    let traj = solver::solve(&p, &SolveOptions::default()).unwrap();
    let oracle = implicit_euler(f, 0.0, 1.0 / n as f64, n);
    for i in 0..=n {
        assert!(
            (traj.u[i] - oracle[i]).abs() <= 1e-13,
            "step {i}: {} vs {}",
            traj.u[i],
            oracle[i]
        );
    }
}

#[test]
fn fixed_point_iteration_agrees_in_contractive_regime() {
    // M a^n_0 <= 0.5 makes u <- c + a0 f(t, u) a contraction with the same
    // root the stepper finds
    let mesh = Mesh::uniform(20, 0.5).unwrap();
    let alpha = 0.7;
    let kernel = fode::fode_kernel(alpha, &mesh).unwrap();
    let f = |_: f64, u: f64| (1.0 + u * u).sin();
    let bound = fode::step_size_bound(alpha, &mesh, 2.0).unwrap();
    assert!(2.0 * bound.sup_diagonal <= 0.5, "test setup must be contractive");

    let p = Problem::new(&kernel, &mesh, Signal::Constant(0.1), &f);
    let traj = solver::solve(&p, &SolveOptions::default()).unwrap();

    // replay the steps with plain fixed-point iteration
    let mut u = vec![0.1];
    let mut fv = vec![0.0];
    for n in 1..=20 {
        let row = kernel.row(n);
        let mut c = 0.1;
        for j in 1..n {
            c += row[n - j] * fv[j];
        }
        let tn = mesh.t(n);
        let mut x = u[n - 1];
        for _ in 0..400 {
            let next = c + row[0] * f(tn, x);
            if (next - x).abs() <= 1e-16 * x.abs().max(1.0) {
                x = next;
                break;
            }
            x = next;
        }
        u.push(x);
        fv.push(f(tn, x));
        assert!(
            (x - traj.u[n]).abs() <= 1e-12 * x.abs().max(1.0),
            "fixed point {x} vs newton {} at step {n}",
            traj.u[n]
        );
    }
}

#[test]
fn ordered_constant_signals_never_cross_on_fode_problem() {
    let mesh = Mesh::geometric(0.01, 1.2, 30).unwrap();
    let kernel = fode::fode_kernel(0.6, &mesh).unwrap();
    let f = |_: f64, u: f64| (1.0 + u * u).sin();
    let df = |_: f64, u: f64| 2.0 * u * (1.0 + u * u).cos();
    let p = Problem::new(&kernel, &mesh, Signal::Constant(0.0), &f).with_derivative(&df);
    let (t1, t2, rep) = solver::compare_solutions(
        &p,
        &Signal::Constant(0.1),
        &Signal::Constant(0.0),
        &SolveOptions::default(),
        1e-12,
    )
    .unwrap();
    assert!(rep.hypothesis_constant_shift);
    assert!(rep.ordering.holds, "min gap {} at {}", rep.ordering.min_gap, rep.ordering.min_index);
    assert!(rep.ordering.min_gap > 0.0);
    // the higher signal stays strictly above
    assert!(t1.u.iter().zip(&t2.u).all(|(a, b)| a > b));
}

#[test]
fn autonomous_trajectories_are_monotone_on_r_cmm_kernel() {
    let mesh = Mesh::algebraic_decay(0.1, 0.5, 0.5, 40).unwrap();
    let kernel = fode::fode_kernel(0.6, &mesh).unwrap();
    let f = |_: f64, u: f64| (1.0 + u * u).sin();
    for (u0, expect_up) in [(0.0, true), (0.1, true), (1.9267560770332839, false)] {
        let p = Problem::new(&kernel, &mesh, Signal::Constant(u0), &f);
        let traj = solver::solve(&p, &SolveOptions::default()).unwrap();
        let scale = traj.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let rep = solver::monotonicity_report(&traj.u, 1e-12 * scale.max(1.0));
        assert!(rep.report.holds, "u0={u0}: {}", rep.report);
        let dir = rep.direction.unwrap();
        if expect_up {
            assert_eq!(dir, solver::Monotonicity::Nondecreasing, "u0={u0}");
        } else {
            assert_eq!(dir, solver::Monotonicity::Nonincreasing, "u0={u0}");
        }
    }
}
