//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qce_core::lp::{LpProblem, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maximum of the objective over all vertices of the feasible polytope,
/// found by solving every `n × n` system of active constraints drawn from
/// the rows and the (finite) bounds. `None` when no vertex is feasible.
pub fn vertex_enumeration_max(p: &LpProblem) -> Option<(f64, Vec<f64>)> {
    let n = p.num_vars();
    let m = p.num_rows();
    // candidate hyperplanes: (coefficients, rhs)
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..m {
        planes.push((p.matrix().row(i).iter().copied().collect(), p.rhs()[i]));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if p.lower()[j].is_finite() {
            planes.push((e.clone(), p.lower()[j]));
        }
        if p.upper()[j].is_finite() {
            planes.push((e, p.upper()[j]));
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    let k = planes.len();
    if k < n {
        return None;
    }
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| planes[subset[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[subset[r]].1);
        if a.determinant().abs() > 1e-10 {
            if let Some(x) = a.lu().solve(&b) {
                let x: Vec<f64> = x.iter().copied().collect();
                if feasible(p, &x, 1e-9) {
                    let obj = p.objective_value(&x);
                    if best.as_ref().map_or(true, |(v, _)| obj > *v) {
                        best = Some((obj, x));
                    }
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < k - n + i {
                subset[i] += 1;
                for t in i + 1..n {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn feasible(p: &LpProblem, x: &[f64], tol: f64) -> bool {
    let act = p.activity(x);
    let rows_ok = (0..p.num_rows()).all(|i| match p.senses()[i] {
        Sense::Le => act[i] <= p.rhs()[i] + tol,
        Sense::Ge => act[i] >= p.rhs()[i] - tol,
    });
    rows_ok
        && x
            .iter()
            .enumerate()
            .all(|(j, v)| *v >= p.lower()[j] - tol && *v <= p.upper()[j] + tol)
}

/// A random LP with finite bounds that is feasible by construction: the
/// right-hand side is built around an interior point of the box.
pub fn random_feasible_lp(rng: &mut impl Rng, n: usize, m: usize) -> LpProblem {
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..0.5)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.random_range(0.2..3.0)).collect();
    let x0: Vec<f64> = (0..n)
        .map(|j| rng.random_range(lower[j]..upper[j]))
        .collect();
    let mut b = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for i in 0..m {
        let act: f64 = (0..n).map(|j| a[(i, j)] * x0[j]).sum();
        let margin = rng.random_range(0.0..0.5);
        if rng.random_bool(0.3) {
            senses.push(Sense::Ge);
            b.push(act - margin);
        } else {
            senses.push(Sense::Le);
            b.push(act + margin);
        }
    }
    LpProblem::new(c, a, b, senses, lower, upper).unwrap()
}

/// Largest minimum PSK margin over every vector of the discrete transmit
/// set with `q` phases (unit amplitude), by exhaustive enumeration.
pub fn best_discrete_psk_margin(
    h: &qce_core::ComplexMatrix,
    s: &[Complex64],
    psk_order: usize,
    q: usize,
) -> f64 {
    let n = h.ncols();
    let theta = std::f64::consts::PI / psk_order as f64;
    let points: Vec<Complex64> = (0..q)
        .map(|i| Complex64::from_polar(1.0, (2 * i + 1) as f64 * std::f64::consts::PI / q as f64))
        .collect();
    let total = q.pow(n as u32);
    let mut best = f64::NEG_INFINITY;
    let mut t = vec![Complex64::new(0.0, 0.0); n];
    for code in 0..total {
        let mut c = code;
        for tn in t.iter_mut() {
            *tn = points[c % q];
            c /= q;
        }
        let mut worst = f64::INFINITY;
        for (m, sm) in s.iter().enumerate() {
            let y: Complex64 = (0..n).map(|k| h[(m, k)] * t[k]).sum();
            let z = y * sm.conj();
            worst = worst.min(z.re * theta.sin() - z.im.abs() * theta.cos());
        }
        best = best.max(worst);
    }
    best
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// I.i.d. CN(0, 1) entries.
pub fn random_channel(rng: &mut impl Rng, m: usize, n: usize) -> qce_core::ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(m, n, |_, _| {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        Complex64::new(re, im) * scale
    })
}

pub fn random_symbols(
    rng: &mut impl Rng,
    c: &qce_core::constellation::Constellation,
    m: usize,
) -> Vec<Complex64> {
    (0..m).map(|_| c.point(rng.random_range(0..c.order()))).collect()
}
