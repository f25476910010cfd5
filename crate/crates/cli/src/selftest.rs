//! Built-in property checks, runnable from a release binary.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qce_core::constellation::{Constellation, Modulation};
use qce_core::lp::{certify, solve, LpProblem, LpStatus, PivotRule, Sense, SolveOptions};
use qce_core::precoder::{min_margin, msm, msm_psk, Mutation, MsmOptions};
use qce_core::quantize::{ce_quantize, polygon_contains, polygon_level, CeQuantizer};
use qce_core::sim::{complex_normal, db_grid, run_ber, Scheme, SimConfig};
use qce_core::ComplexMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub result: Result<String, String>,
}

fn channel(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ComplexMatrix {
    DMatrix::from_fn(m, n, |_, _| complex_normal(rng))
}

fn symbols(rng: &mut ChaCha8Rng, c: &Constellation, m: usize) -> Vec<Complex64> {
    (0..m).map(|_| c.point(rng.random_range(0..c.order()))).collect()
}

fn lp_certificates(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let cases = 200;
    for case in 0..cases {
        let n = rng.random_range(2..8);
        let m = rng.random_range(1..8);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..0.0)).collect();
        let upper: Vec<f64> = lower.iter().map(|l| l + rng.random_range(0.5..3.0)).collect();
        let x0: Vec<f64> = (0..n).map(|j| rng.random_range(lower[j]..upper[j])).collect();
        let mut senses = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for i in 0..m {
            let act: f64 = (0..n).map(|j| a[(i, j)] * x0[j]).sum();
            if rng.random_bool(0.3) {
                senses.push(Sense::Ge);
                b.push(act - rng.random_range(0.0..0.5));
            } else {
                senses.push(Sense::Le);
                b.push(act + rng.random_range(0.0..0.5));
            }
        }
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = LpProblem::new(c, a, b, senses, lower, upper).map_err(|e| e.to_string())?;
        let mut objectives = Vec::new();
        for pivot_rule in [PivotRule::Dantzig, PivotRule::Bland] {
            let sol = solve(&p, &SolveOptions { pivot_rule, ..Default::default() })
                .map_err(|e| format!("case {case}: {e}"))?;
            if sol.status != LpStatus::Optimal {
                return Err(format!("case {case}: status {:?}", sol.status));
            }
            let report = certify(&p, &sol, 1e-8);
            if !report.passed {
                return Err(format!("case {case}: certificate {report:?}"));
            }
            objectives.push(sol.objective);
        }
        if (objectives[0] - objectives[1]).abs() > 1e-8 {
            return Err(format!("case {case}: pivot rules disagree {objectives:?}"));
        }
    }
    Ok(format!("{cases} random LPs certified under both pivot rules"))
}

fn polygon(rng: &mut ChaCha8Rng) -> Result<String, String> {
    for bits in 2..=5u32 {
        let q = 1usize << bits;
        let bound = (std::f64::consts::PI / q as f64).cos();
        let alphabet = CeQuantizer::with_phases(q, 1, 1.0).map_err(|e| e.to_string())?.alphabet();
        for a in &alphabet {
            if (polygon_level(*a, q) - bound).abs() > 1e-12 {
                return Err(format!("Q={q}: alphabet point {a} off the polygon boundary"));
            }
        }
        for _ in 0..200 {
            let w: Vec<f64> = (0..q).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            let mix: Complex64 = alphabet.iter().zip(&w).map(|(a, w)| a * (w / total)).sum();
            let x = nalgebra::DVector::from_element(1, mix);
            if !polygon_contains(&x, q, 1e-12) {
                return Err(format!("Q={q}: convex mixture {mix} outside polygon"));
            }
            let t = ce_quantize(&x, q, 1.0);
            if !alphabet.iter().any(|a| (a - t[0]).norm() < 1e-12) {
                return Err(format!("Q={q}: quantizer output {} not in alphabet", t[0]));
            }
        }
    }
    Ok("alphabet on boundary, mixtures inside, quantizer onto alphabet".into())
}

fn margins(rng: &mut ChaCha8Rng, mutation: Mutation) -> Result<String, String> {
    let opts = MsmOptions { mutation, ..Default::default() };
    let mut count = 0;
    for (modulation, q) in [(Modulation::QPSK, 4), (Modulation::PSK8, 8), (Modulation::QAM16, 4)] {
        let c = modulation.constellation().map_err(|e| e.to_string())?;
        for case in 0..60 {
            let m = rng.random_range(1..=3);
            let n = rng.random_range(m + 1..=10);
            let h = channel(rng, m, n);
            let s = symbols(rng, &c, m);
            let r = msm(&h, &s, &c, q, &opts).map_err(|e| format!("{modulation} case {case}: {e}"))?;
            let geo = match r.alpha {
                Some(a) => min_margin(&h, &r.x, &s, &c, a).min(a),
                None => min_margin(&h, &r.x, &s, &c, 1.0),
            };
            if (geo - r.delta).abs() > 1e-6 {
                return Err(format!(
                    "{modulation} Q={q} case {case}: LP margin {} vs geometric {geo}",
                    r.delta
                ));
            }
            count += 1;
        }
    }
    Ok(format!("{count} LP margins match the geometric margin"))
}

fn dominance(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let c = Constellation::psk(4).map_err(|e| e.to_string())?;
    let alphabet = CeQuantizer::with_phases(4, 1, 1.0).map_err(|e| e.to_string())?.alphabet();
    let (m, n) = (2, 4);
    for case in 0..50 {
        let h = channel(rng, m, n);
        let s = symbols(rng, &c, m);
        let relaxed = msm_psk(&h, &s, &c, 4, &MsmOptions::default())
            .map_err(|e| format!("case {case}: {e}"))?
            .delta;
        for code in 0..4usize.pow(n as u32) {
            let t = nalgebra::DVector::from_fn(n, |k, _| alphabet[(code >> (2 * k)) & 3]);
            let y = &h * &t;
            let worst = (0..m).map(|u| c.safety_margin(y[u], s[u], 1.0)).fold(f64::INFINITY, f64::min);
            if worst > relaxed + 1e-9 {
                return Err(format!("case {case}: discrete margin {worst} beats relaxed {relaxed}"));
            }
        }
    }
    Ok("relaxed margin dominates all 256 discrete vectors in 50 cases".into())
}

fn determinism(seed: u64) -> Result<String, String> {
    let cfg = SimConfig {
        n: 8,
        m: 2,
        scheme: Scheme::Msm,
        modulation: Modulation::QAM16,
        ptx_db: db_grid(0.0, 10.0, 5.0),
        channels: 2,
        vectors_per_channel: 16,
        block_len: 16,
        seed,
        ..Default::default()
    };
    let a = run_ber(&cfg, &MsmOptions::default()).map_err(|e| e.to_string())?;
    let b = run_ber(&cfg, &MsmOptions::default()).map_err(|e| e.to_string())?;
    if a.records != b.records {
        return Err("repeated simulation differs".into());
    }
    Ok("repeated simulation is identical".into())
}

/// Runs every check. `mutate` injects a sign flip into the PSK LP build.
pub fn run(seed: u64, mutate: bool) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mutation = if mutate { Mutation::FlipImagInA } else { Mutation::None };
    vec![
        Check { name: "lp-certificate", result: lp_certificates(&mut rng) },
        Check { name: "polygon", result: polygon(&mut rng) },
        Check { name: "margin-consistency", result: margins(&mut rng, mutation) },
        Check { name: "discrete-dominance", result: dominance(&mut rng) },
        Check { name: "determinism", result: determinism(seed) },
    ]
}
