mod common;

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DVector;
use num_complex::Complex64;
use qce_core::constellation::{Constellation, Modulation};
use qce_core::lp::{canonicalize, certify, SolveOptions, StartPoint};
use qce_core::precoder::{
    min_margin, msm, msm_psk, msm_qam, msm_qam_block, msm_qam_capped, msm_qam_per_user_alpha,
    phase_only, qwf_precode, wf_ce_precode, wf_precode, MsmOptions, Mutation, PskLpBuild,
};
use qce_core::quantize::{ce_quantize, polygon_contains};
use qce_core::ComplexMatrix;
use rand::Rng;

use common::{best_discrete_psk_margin, random_channel, random_symbols, seeded};

fn opts() -> MsmOptions {
    MsmOptions::default()
}

#[test]
fn relaxed_margin_dominates_every_discrete_vector() {
    let mut rng = seeded(11);
    let qpsk = Constellation::psk(4).unwrap();
    for _ in 0..40 {
        let h = random_channel(&mut rng, 2, 4);
        let s = random_symbols(&mut rng, &qpsk, 2);
        let relaxed = msm_psk(&h, &s, &qpsk, 4, &opts()).unwrap().delta;
        let discrete = best_discrete_psk_margin(&h, &s, 4, 4);
        assert!(relaxed >= discrete - 1e-9, "{relaxed} < {discrete}");
    }
}

#[test]
fn lp_margin_equals_geometric_margin() {
    let mut rng = seeded(12);
    for (m, q) in [(Modulation::QPSK, 4), (Modulation::PSK8, 8), (Modulation::QAM16, 4), (Modulation::QAM64, 8)] {
        let c = m.constellation().unwrap();
        for _ in 0..30 {
            let users = rng.random_range(1..5);
            let n = rng.random_range(users..10);
            let h = random_channel(&mut rng, users, n);
            let s = random_symbols(&mut rng, &c, users);
            let r = msm(&h, &s, &c, q, &opts()).unwrap();
            // the symbol region also requires δ ≤ α, which only binds when
            // every user sits on a corner
            let geo = match r.alpha {
                Some(alpha) => min_margin(&h, &r.x, &s, &c, alpha).min(alpha),
                None => min_margin(&h, &r.x, &s, &c, 1.0),
            };
            assert!((geo - r.delta).abs() < 1e-6, "{m}: geometric {geo} vs LP {}", r.delta);
            assert!(r.delta >= 0.0);
            assert!(polygon_contains(&r.x, q, 1e-9));
            assert!((&r.t - ce_quantize(&r.x, q, n as f64)).norm() == 0.0);
            if let Some(a) = r.alpha {
                assert!(r.delta <= a + 1e-9);
            }
        }
    }
}

#[test]
fn psk_solution_certifies() {
    let mut rng = seeded(13);
    let qpsk = Constellation::psk(4).unwrap();
    for q in [4, 8] {
        let h = random_channel(&mut rng, 2, 8);
        let s = random_symbols(&mut rng, &qpsk, 2);
        let build = PskLpBuild::new(&h, &s, &qpsk, q, Mutation::None).unwrap();
        assert_eq!(build.problem.num_rows(), 4 + 8 * (q - 4));
        assert_eq!(canonicalize(&build.problem).num_artificials(), 0);
        let origin = SolveOptions { start: StartPoint::Origin, ..Default::default() };
        let sol = qce_core::lp::solve(&build.problem, &origin).unwrap();
        assert_eq!(sol.artificials, 0);
        let report = certify(&build.problem, &sol, 1e-7);
        assert!(report.passed, "{report:?}");
    }
}

/// Scalar channel: grid search over the square/polygon for the best margin.
fn grid_best(h: Complex64, s: Complex64, c: &Constellation, q: usize, alphas: &[f64]) -> (f64, f64) {
    let steps = 400;
    let bound = (PI / q as f64).cos();
    let mut best = f64::NEG_INFINITY;
    for a in 0..=steps {
        for b in 0..=steps {
            let x = Complex64::new(
                -bound + 2.0 * bound * a as f64 / steps as f64,
                -bound + 2.0 * bound * b as f64 / steps as f64,
            );
            if !polygon_contains(&DVector::from_element(1, x), q, 1e-12) {
                continue;
            }
            for &alpha in alphas {
                let cap = if alphas.len() > 1 { alpha } else { f64::INFINITY };
                best = best.max(c.safety_margin(h * x, s, alpha).min(cap));
            }
        }
    }
    (best, 2.0 * bound / steps as f64 * h.norm() * SQRT_2)
}

#[test]
fn scalar_optimum_matches_grid_search() {
    let mut rng = seeded(14);
    let qpsk = Constellation::psk(4).unwrap();
    let qam = Constellation::qam(16).unwrap();
    let alphas: Vec<f64> = (1..200).map(|k| k as f64 * 0.01).collect();
    for _ in 0..6 {
        let h = random_channel(&mut rng, 1, 1);
        let s = random_symbols(&mut rng, &qpsk, 1);
        let lp = msm_psk(&h, &s, &qpsk, 8, &opts()).unwrap().delta;
        let (grid, slack) = grid_best(h[(0, 0)], s[0], &qpsk, 8, &[1.0]);
        assert!(lp >= grid - 1e-9 && lp <= grid + slack, "psk {lp} vs grid {grid}");

        let s = random_symbols(&mut rng, &qam, 1);
        let lp = msm_qam(&h, &s, &qam, 4, &opts()).unwrap().delta;
        let (grid, slack) = grid_best(h[(0, 0)], s[0], &qam, 4, &alphas);
        assert!(lp >= grid - 1e-9 && lp <= grid + slack + 0.01, "qam {lp} vs grid {grid}");
    }
}

#[test]
fn psk_is_invariant_to_joint_user_rotation() {
    let mut rng = seeded(15);
    let c = Constellation::psk(8).unwrap();
    for _ in 0..10 {
        let h = random_channel(&mut rng, 3, 6);
        let s = random_symbols(&mut rng, &c, 3);
        let base = msm_psk(&h, &s, &c, 8, &opts()).unwrap().delta;
        // rotating user m by a multiple of 2π/S keeps s_m in the constellation
        let mut h2 = h.clone();
        let mut s2 = s.clone();
        for m in 0..3 {
            let k = rng.random_range(0..8);
            let rot = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 8.0);
            s2[m] *= rot;
            for j in 0..6 {
                h2[(m, j)] *= rot;
            }
        }
        let rotated = msm_psk(&h2, &s2, &c, 8, &opts()).unwrap().delta;
        assert!((base - rotated).abs() < 1e-9, "{base} vs {rotated}");
    }
}

#[test]
fn margin_is_invariant_to_polygon_rotation() {
    let mut rng = seeded(16);
    for (m, q) in [(Modulation::QPSK, 4), (Modulation::QPSK, 8), (Modulation::QAM16, 4)] {
        let c = m.constellation().unwrap();
        for _ in 0..8 {
            let h = random_channel(&mut rng, 2, 5);
            let s = random_symbols(&mut rng, &c, 2);
            let k = rng.random_range(1..q);
            let h2 = &h * Complex64::from_polar(1.0, -2.0 * PI * k as f64 / q as f64);
            let a = msm(&h, &s, &c, q, &opts()).unwrap().delta;
            let b = msm(&h2, &s, &c, q, &opts()).unwrap().delta;
            assert!((a - b).abs() < 1e-8, "{m} Q={q}: {a} vs {b}");
        }
    }
}

#[test]
fn dropping_infinite_rows_matches_a_huge_bound() {
    let mut rng = seeded(17);
    let c = Constellation::qam(16).unwrap();
    for _ in 0..20 {
        let h = random_channel(&mut rng, 4, 12);
        let s = random_symbols(&mut rng, &c, 4);
        let dropped = msm_qam(&h, &s, &c, 4, &opts()).unwrap().delta;
        let capped = msm_qam_capped(&h, &s, &c, 4, 1e6, &opts()).unwrap().delta;
        assert!((dropped - capped).abs() < 1e-7, "{dropped} vs {capped}");
    }
}

#[test]
fn single_block_equals_symbol_wise() {
    let mut rng = seeded(18);
    let c = Constellation::qam(16).unwrap();
    for _ in 0..5 {
        let h = random_channel(&mut rng, 3, 10);
        let s = random_symbols(&mut rng, &c, 3);
        let single = msm_qam(&h, &s, &c, 4, &opts()).unwrap();
        let block = msm_qam_block(&h, &[s.clone()], &c, 4, &opts()).unwrap();
        assert_eq!(block.len(), 1);
        assert!((single.delta - block[0].delta).abs() < 1e-12);
        assert!((&single.x - &block[0].x).norm() < 1e-12);
        assert_eq!(single.alpha, block[0].alpha);
    }
}

#[test]
fn block_results_share_alpha_and_are_each_consistent() {
    let mut rng = seeded(19);
    let c = Constellation::qam(16).unwrap();
    let h = random_channel(&mut rng, 3, 12);
    let block: Vec<Vec<Complex64>> = (0..4).map(|_| random_symbols(&mut rng, &c, 3)).collect();
    let results = msm_qam_block(&h, &block, &c, 4, &opts()).unwrap();
    let alpha = results[0].alpha.unwrap();
    let mut total = 0.0;
    for (r, s) in results.iter().zip(&block) {
        assert_eq!(r.alpha, Some(alpha));
        assert!(min_margin(&h, &r.x, s, &c, alpha) >= r.delta - 1e-7);
        total += r.delta;
    }
    // the shared scale can only cost margin
    let separate: f64 = block.iter().map(|s| msm_qam(&h, s, &c, 4, &opts()).unwrap().delta).sum();
    assert!(total <= separate + 1e-7);
}

#[test]
fn per_user_alpha_dominates_joint() {
    let mut rng = seeded(20);
    let c = Constellation::qam(16).unwrap();
    for users in [1, 3, 5] {
        for _ in 0..5 {
            let h = random_channel(&mut rng, users, 12);
            let s = random_symbols(&mut rng, &c, users);
            let joint = msm_qam(&h, &s, &c, 4, &opts()).unwrap();
            let per = msm_qam_per_user_alpha(&h, &s, &c, 4, &opts()).unwrap();
            assert_eq!(per.user_alphas.as_ref().unwrap().len(), users);
            if users == 1 {
                assert!((per.delta - joint.delta).abs() < 1e-9);
            } else {
                assert!(per.delta >= joint.delta - 1e-9);
            }
            let y = &h * &per.x;
            for (m, &a) in per.user_alphas.as_ref().unwrap().iter().enumerate() {
                assert!(c.safety_margin(y[m], s[m], a) >= per.delta - 1e-7);
            }
        }
    }
}

#[test]
fn mutated_build_breaks_margin_consistency() {
    let mut rng = seeded(21);
    let c = Constellation::psk(4).unwrap();
    let mutated = MsmOptions { mutation: Mutation::FlipImagInA, ..opts() };
    let mut caught = 0;
    for _ in 0..10 {
        let h = random_channel(&mut rng, 2, 6);
        let s = random_symbols(&mut rng, &c, 2);
        let r = msm_psk(&h, &s, &c, 4, &mutated).unwrap();
        if (min_margin(&h, &r.x, &s, &c, 1.0) - r.delta).abs() > 1e-6 {
            caught += 1;
        }
    }
    assert!(caught >= 9, "only {caught} of 10 mutated solves were inconsistent");
}

#[test]
fn wiener_filter_meets_average_power() {
    let mut rng = seeded(22);
    let c = Constellation::qam(16).unwrap();
    let h = random_channel(&mut rng, 4, 16);
    let p_tx = 3.0;
    let trials = 20_000;
    let mut power = 0.0;
    for _ in 0..trials {
        let s = random_symbols(&mut rng, &c, 4);
        power += wf_precode(&h, &s, p_tx, 1.0, c.mean_energy()).unwrap().norm_squared();
    }
    let mean = power / trials as f64;
    assert!((mean / p_tx - 1.0).abs() < 0.05, "mean power {mean}");
}

#[test]
fn wiener_filter_zero_forces_without_noise() {
    let mut rng = seeded(23);
    let c = Constellation::psk(4).unwrap();
    let h = random_channel(&mut rng, 3, 8);
    let s = random_symbols(&mut rng, &c, 3);
    let x = wf_precode(&h, &s, 1.0, 1e-12, 1.0).unwrap();
    let y = &h * x;
    let ratio = y[0] / s[0];
    for m in 0..3 {
        assert!((y[m] - ratio * s[m]).norm() < 1e-6);
    }
    assert!(wf_precode(&ComplexMatrix::zeros(2, 3), &s[..2], 1.0, 0.0, 1.0).is_err());
}

#[test]
fn quantized_wf_converges_to_phase_only() {
    let mut rng = seeded(24);
    let c = Constellation::psk(4).unwrap();
    let h = random_channel(&mut rng, 3, 8);
    let s = random_symbols(&mut rng, &c, 3);
    let ce = wf_ce_precode(&h, &s, 8.0, 0.1, 1.0).unwrap();
    for q in [4, 16, 64, 256] {
        let t = qwf_precode(&h, &s, 8.0, 0.1, 1.0, q).unwrap();
        for (a, b) in t.iter().zip(ce.iter()) {
            let gap = (a / b).arg().abs();
            assert!(gap <= PI / q as f64 + 1e-12, "Q={q}: gap {gap}");
        }
    }
    let x = wf_precode(&h, &s, 8.0, 0.1, 1.0).unwrap();
    assert_eq!(phase_only(&x, 8.0), ce);
}
