//! Implication chains between the structural checks, exercised on the
//! fractional-ODE kernel over randomized meshes, plus consistency with the
//! uniform-mesh checks on row-constant kernels.

use volterra_core::kernel::{ArrayKernel, DiagonalKernel};
use volterra_core::mesh::{Mesh, SplitMix64};
use volterra_core::uniform::{is_cmm_uniform, Sequence};
use volterra_core::{fode, props};

const TOL: f64 = 1e-10;

fn random_mesh(rng: &mut SplitMix64, n: usize) -> Mesh {
    let steps: Vec<f64> = (0..n).map(|_| 0.1 * rng.next_in(1e-3, 1.0)).collect();
    Mesh::from_steps(&steps).unwrap()
}

/// Alternating step ratios 10 and 1/10.
fn alternating_mesh(tau1: f64, n: usize, start_up: bool) -> Mesh {
    let mut steps = Vec::with_capacity(n);
    let mut tau = tau1;
    let mut up = start_up;
    for _ in 0..n {
        steps.push(tau);
        tau *= if up { 10.0 } else { 0.1 };
        up = !up;
    }
    Mesh::from_steps(&steps).unwrap()
}

#[test]
fn sufficiency_chain_on_fode_instances() {
    let mut rng = SplitMix64::new(616);
    for trial in 0..25 {
        let alpha = [0.3, 0.6, 0.9][trial % 3];
        let n = 5 + (rng.next_u64() % 26) as usize;
        let mesh = match trial {
            0 => alternating_mesh(0.01, n, true),
            1 => alternating_mesh(0.05, n, false),
            _ => random_mesh(&mut rng, n),
        };
        let a = fode::fode_kernel(alpha, &mesh).unwrap();

        let sufficient = props::sufficient_r_cmm(&a, TOL);
        assert!(sufficient.holds, "sufficient-r-cmm failed: {sufficient}");
        let rcmm = props::is_r_cmm(&a, TOL).unwrap();
        assert!(rcmm.holds, "r-cmm failed: {rcmm}");
        assert!(rcmm.warning.is_none(), "conditioning warning: {rcmm}");

        let signs = props::inverse_sign_pattern(&a, TOL).unwrap();
        assert!(signs.holds, "inverse sign pattern failed: {signs}");
        let tails = props::tail_sum_monotone(&a, TOL);
        assert!(tails.holds, "tail sums failed: {tails}");
        for lambda in [0.1, 1.0, 10.0, 100.0] {
            let nn = props::resolvent_nonnegative(&a, lambda, TOL).unwrap();
            assert!(nn.holds, "resolvent nonnegativity failed at {lambda}: {nn}");
            let rs = props::resolvent_rowsum_monotone(&a, lambda, TOL).unwrap();
            assert!(rs.holds, "resolvent row sums failed at {lambda}: {rs}");
        }
    }
}

#[test]
fn shifted_kernels_stay_r_cmm() {
    // I + lambda A inherits the property
    let mut rng = SplitMix64::new(1234);
    for _ in 0..6 {
        let mesh = random_mesh(&mut rng, 15);
        let a = fode::fode_kernel(0.6, &mesh).unwrap();
        assert!(props::is_r_cmm(&a, TOL).unwrap().holds);
        for lambda in [0.1, 1.0, 10.0] {
            let shifted = a.scaled_plus_identity(lambda);
            assert!(
                props::is_r_cmm(&shifted, TOL).unwrap().holds,
                "I + {lambda} A lost r-cmm"
            );
        }
    }
}

#[test]
fn scaling_lemma_on_fode_instances() {
    let mut rng = SplitMix64::new(4321);
    for _ in 0..10 {
        let mesh = random_mesh(&mut rng, 12);
        let a = fode::fode_kernel(0.4, &mesh).unwrap();
        let mut d: Vec<f64> = (0..12).map(|_| rng.next_in(0.2, 3.0)).collect();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let scaled = a.scale_right(&DiagonalKernel::new(d).unwrap()).unwrap();
        assert!(props::is_r_cmm(&scaled, TOL).unwrap().holds);
    }
}

#[test]
fn row_constant_r_cmm_agrees_with_uniform_cmm() {
    let mut rng = SplitMix64::new(88);
    let mut agreements = 0;
    let mut disagreements = Vec::new();
    for trial in 0..40 {
        let n = 3 + (rng.next_u64() % 10) as usize;
        let vals: Vec<f64> = match trial % 4 {
            // nonincreasing log-convex: ratios sorted ascending
            0 => {
                let mut ratios: Vec<f64> = (0..n - 1).map(|_| rng.next_f64()).collect();
                ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut v = vec![rng.next_in(0.5, 2.0)];
                for r in ratios {
                    let last = *v.last().unwrap();
                    v.push(last * r);
                }
                v
            }
            // geometric
            1 => {
                let r = rng.next_in(0.1, 0.95);
                (0..n).map(|j| 1.5 * r.powi(j as i32)).collect()
            }
            // increasing somewhere: not CMM
            2 => {
                let mut v: Vec<f64> = (0..n).map(|_| rng.next_in(0.5, 1.0)).collect();
                v[n / 2] = 2.0;
                v
            }
            // log-concave bump: nonincreasing but inverse changes sign
            _ => {
                let mut v = vec![1.0, 0.5];
                for _ in 2..n {
                    let last = *v.last().unwrap();
                    v.push(last * rng.next_in(0.75, 1.0));
                }
                v.truncate(n);
                v
            }
        };
        let s = Sequence::new(vals).unwrap();
        let seq_rep = is_cmm_uniform(&s, TOL);
        let lift_rep = props::is_r_cmm(&s.to_array_kernel(), TOL).unwrap();
        if seq_rep.holds == lift_rep.holds {
            agreements += 1;
        } else {
            disagreements.push(format!("trial {trial}: seq={} lift={}", seq_rep.holds, lift_rep.holds));
        }
    }
    assert!(disagreements.is_empty(), "route disagreements: {disagreements:?} ({agreements} agreed)");
}

#[test]
fn fode_kernel_r_cmm_has_no_step_ratio_restriction() {
    // ratio-10 oscillations in both phases, all three orders
    for alpha in [0.3, 0.6, 0.9] {
        for start_up in [true, false] {
            let mesh = alternating_mesh(0.02, 20, start_up);
            let a = fode::fode_kernel(alpha, &mesh).unwrap();
            let rep = props::is_r_cmm(&a, TOL).unwrap();
            assert!(rep.holds, "alpha={alpha} start_up={start_up}: {rep}");
        }
    }
}

#[test]
fn beta_kernel_is_log_convex_but_not_column_monotone_on_decreasing_mesh() {
    // decreasing steps make the ones-conjugate lose column monotonicity
    // while keeping positivity and log-convexity
    let mesh = Mesh::algebraic_decay(0.1, 0.5, 0.5, 25).unwrap();
    let beta = fode::fode_beta_kernel(0.6, &mesh).unwrap();
    assert!(props::entries_positive(&beta, TOL).holds);
    assert!(props::log_convexity(&beta, TOL).holds);
    assert!(props::is_row_monotone(&beta, TOL).holds);
    assert!(!props::is_column_monotone(&beta, TOL).holds);
}

#[test]
fn non_monotone_kernel_fails_r_cmm_with_witness() {
    // ones kernel with one bumped entry
    let mut rows: Vec<Vec<f64>> = (1..=6).map(|n| vec![1.0; n]).collect();
    rows[4][2] = 1.5;
    let a = ArrayKernel::from_rows(rows).unwrap();
    let rep = props::is_r_cmm(&a, TOL).unwrap();
    assert!(!rep.holds);
    let w = rep.witness.unwrap();
    assert_eq!((w.row, w.index), (5, 2));
}
