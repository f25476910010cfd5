//! Constant-envelope phase quantization and its polygon relaxation.
//!
//! A `q`-bit phase DAC emits `t = √(P_tx/N) e^{jφ}` with `φ` restricted to
//! the `Q = 2^q` sector midpoints `(2i-1)π/Q`. The convex hull of those
//! points is a regular `Q`-gon, written as the intersection of `Q/4` squares
//! rotated by `β_i = 2π(i-1)/Q`. On the real-stacked vector
//! `x' = [Re x; Im x]` the first square becomes the box `|x'| ≤ cos(π/Q)`
//! and the rest the rows `E x' ≤ cos(π/Q)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::ComplexVector;

#[derive(Debug, Error, PartialEq)]
pub enum QuantizeError {
    #[error("phase resolution Q = {0} must be a power of two and at least 4")]
    InvalidOrder(usize),
    #[error("transmit power must be positive and finite, got {0}")]
    InvalidPower(f64),
    #[error("antenna count must be positive")]
    NoAntennas,
}

fn check_order(q_phases: usize) -> Result<(), QuantizeError> {
    if q_phases < 4 || !q_phases.is_power_of_two() {
        return Err(QuantizeError::InvalidOrder(q_phases));
    }
    Ok(())
}

/// Quantizes a phase to the midpoint of its `2π/Q` sector.
///
/// The phase is first wrapped to `[0, 2π)`; exact sector boundaries land in
/// the higher sector.
pub fn phase_quantize(phi: f64, q_phases: usize) -> f64 {
    let step = 2.0 * PI / q_phases as f64;
    let wrapped = phi.rem_euclid(2.0 * PI);
    let k = ((wrapped / step).floor() as usize).min(q_phases - 1);
    (k as f64 + 0.5) * step
}

/// Element-wise CE quantizer. Zero entries are treated as phase `0`.
pub fn ce_quantize(x: &ComplexVector, q_phases: usize, p_tx: f64) -> ComplexVector {
    let amplitude = (p_tx / x.len() as f64).sqrt();
    x.map(|v| {
        let phi = if v == Complex64::new(0.0, 0.0) { 0.0 } else { v.arg() };
        Complex64::from_polar(amplitude, phase_quantize(phi, q_phases))
    })
}

/// A `q`-bit CE transmitter for `N` antennas at total power `P_tx`.
#[derive(Clone, Debug, PartialEq)]
pub struct CeQuantizer {
    bits: u32,
    phases: usize,
    antennas: usize,
    p_tx: f64,
}

impl CeQuantizer {
    pub fn new(bits: u32, antennas: usize, p_tx: f64) -> Result<Self, QuantizeError> {
        let phases = 1usize
            .checked_shl(bits)
            .ok_or(QuantizeError::InvalidOrder(usize::MAX))?;
        Self::with_phases(phases, antennas, p_tx)
    }

    pub fn with_phases(phases: usize, antennas: usize, p_tx: f64) -> Result<Self, QuantizeError> {
        check_order(phases)?;
        if antennas == 0 {
            return Err(QuantizeError::NoAntennas);
        }
        if !(p_tx.is_finite() && p_tx > 0.0) {
            return Err(QuantizeError::InvalidPower(p_tx));
        }
        Ok(CeQuantizer {
            bits: phases.trailing_zeros(),
            phases,
            antennas,
            p_tx,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn phases(&self) -> usize {
        self.phases
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn p_tx(&self) -> f64 {
        self.p_tx
    }

    /// Per-antenna magnitude `√(P_tx/N)`.
    pub fn amplitude(&self) -> f64 {
        (self.p_tx / self.antennas as f64).sqrt()
    }

    /// The per-antenna alphabet, ordered by phase.
    pub fn alphabet(&self) -> Vec<Complex64> {
        let a = self.amplitude();
        (0..self.phases)
            .map(|i| Complex64::from_polar(a, (2 * i + 1) as f64 * PI / self.phases as f64))
            .collect()
    }

    pub fn quantize(&self, x: &ComplexVector) -> ComplexVector {
        assert_eq!(x.len(), self.antennas, "vector length must equal the antenna count");
        ce_quantize(x, self.phases, self.p_tx)
    }
}

/// Half-space description of the `Q`-gon spanned by unit-power CE symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonSpec {
    pub phases: usize,
    pub antennas: usize,
    /// `cos(π/Q)`: bound on every row of the box and of `E`.
    pub bound: f64,
    /// Rotation angles `β_i` of the squares beyond the axis-aligned one.
    pub angles: Vec<f64>,
    /// `N(Q-4) × 2N`: `[T_i; -T_i]` for each angle, `T_i = R(β_i) ⊗ I_N`.
    pub e: DMatrix<f64>,
}

pub fn polygon_spec(q_phases: usize, antennas: usize) -> Result<PolygonSpec, QuantizeError> {
    check_order(q_phases)?;
    if antennas == 0 {
        return Err(QuantizeError::NoAntennas);
    }
    let n = antennas;
    let angles: Vec<f64> = (2..=q_phases / 4)
        .map(|i| 2.0 * PI * (i - 1) as f64 / q_phases as f64)
        .collect();
    let mut e = DMatrix::zeros(4 * n * angles.len(), 2 * n);
    for (k, &beta) in angles.iter().enumerate() {
        let (s, c) = beta.sin_cos();
        let base = 4 * n * k;
        for row in 0..n {
            // R(β) = [[c, s], [-s, c]]
            for (offset, sign) in [(0, 1.0), (2 * n, -1.0)] {
                e[(base + offset + row, row)] = sign * c;
                e[(base + offset + row, n + row)] = sign * s;
                e[(base + offset + n + row, row)] = -sign * s;
                e[(base + offset + n + row, n + row)] = sign * c;
            }
        }
    }
    Ok(PolygonSpec {
        phases: q_phases,
        antennas,
        bound: (PI / q_phases as f64).cos(),
        angles,
        e,
    })
}

/// Largest value of `|Re(v e^{-jβ})|`, `|Im(v e^{-jβ})|` over all `Q/4`
/// squares, i.e. the polygon gauge of `v` scaled by `cos(π/Q)`.
pub fn polygon_level(v: Complex64, q_phases: usize) -> f64 {
    (0..q_phases / 4)
        .map(|i| {
            let w = v * Complex64::from_polar(1.0, -2.0 * PI * i as f64 / q_phases as f64);
            w.re.abs().max(w.im.abs())
        })
        .fold(0.0, f64::max)
}

/// Whether every entry of `x` lies in the unit-power `Q`-gon, up to `tol`.
pub fn polygon_contains(x: &ComplexVector, q_phases: usize, tol: f64) -> bool {
    let bound = (PI / q_phases as f64).cos();
    x.iter().all(|&v| polygon_level(v, q_phases) <= bound + tol)
}
