use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SimError;
use crate::constellation::Constellation;
use crate::{ComplexMatrix, ComplexVector};

/// One CN(0, 1) sample.
pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// `M × N` channel with i.i.d. CN(0, 1) entries, drawn row by row.
pub fn gen_channel(n: usize, m: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut h = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            h[(i, j)] = complex_normal(rng);
        }
    }
    h
}

/// `√(1-ν) H + √ν Γ` with `Γ` i.i.d. CN(0, 1).
///
/// `Γ` is drawn even for `ν = 0`, so the random stream does not depend on
/// `ν`; the result is then `H` exactly.
pub fn corrupt_csi(h: &ComplexMatrix, nu: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let gamma = gen_channel(h.ncols(), h.nrows(), rng);
    if nu == 0.0 {
        return h.clone();
    }
    h * Complex64::new((1.0 - nu).sqrt(), 0.0) + gamma * Complex64::new(nu.sqrt(), 0.0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Noise {
    #[default]
    On,
    /// Noise samples are still drawn but not added.
    Off,
}

/// `r = H t + η`, `η ~ CN(0, I_M)`.
pub fn transmit(
    h: &ComplexMatrix,
    t: &ComplexVector,
    noise: Noise,
    rng: &mut impl Rng,
) -> Result<ComplexVector, SimError> {
    if h.ncols() != t.len() {
        return Err(SimError::DimensionMismatch(format!(
            "channel has {} columns, transmit vector has {} entries",
            h.ncols(),
            t.len()
        )));
    }
    let mut r = h * t;
    for v in r.iter_mut() {
        let eta = complex_normal(rng);
        if noise == Noise::On {
            *v += eta;
        }
    }
    Ok(r)
}

/// Blind receive gain `g = T·E[|Re s| + |Im s|] / Σ_t (|Re r[t]| + |Im r[t]|)`.
pub fn estimate_gain(block: &[Complex64], c: &Constellation) -> Result<f64, SimError> {
    let sum: f64 = block.iter().map(|r| r.re.abs() + r.im.abs()).sum();
    if block.is_empty() || !(sum > 0.0) || !sum.is_finite() {
        return Err(SimError::DegenerateBlock);
    }
    Ok(block.len() as f64 * c.mean_abs_re_im() / sum)
}
