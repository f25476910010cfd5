//! Maximum-safety-margin precoding for massive MU-MIMO downlink with
//! quantized constant-envelope (QCE) transmit signals.
//!
//! The crate is organised bottom-up:
//!
//! * [`lp`]: bounded-variable two-phase simplex solver.
//! * [`constellation`]: PSK/QAM constellations, Gray labels, detection and
//!   the geometric safety margin.
//! * [`quantize`]: the phase quantizer, the CE quantizer and the polygon
//!   relaxation of the discrete transmit alphabet.
//! * [`precoder`]: the MSM linear programs for PSK and QAM and the
//!   Wiener-filter baselines.
//! * [`sim`]: channels, transmission, blind receive scaling and the
//!   Monte-Carlo BER engine.

pub mod constellation;
pub mod lp;
pub mod precoder;
pub mod quantize;
pub mod sim;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix (channels `H`).
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex vector (symbols `s`, transmit vectors `x`, `t`, receive `r`).
pub type ComplexVector = DVector<Complex64>;
