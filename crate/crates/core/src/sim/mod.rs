//! Monte-Carlo link simulation: channels, transmission, blind receive
//! scaling, BER counting and the statistics behind the tables.
//!
//! Every channel realization owns a ChaCha8 stream selected by
//! `(seed, realization)`, and draws, in order: the channel, the CSI error,
//! all symbol vectors, then one noise vector per (transmit power, symbol
//! vector). The draw sequence does not depend on the precoder, so runs of
//! different schemes with the same seed see identical channels, symbols and
//! noise.

mod channel;
mod csv_out;
mod stats;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use channel::{complex_normal, corrupt_csi, estimate_gain, gen_channel, transmit, Noise};
pub use csv_out::{read_csv, write_csv, CSV_SCHEMA};
pub use stats::{
    alpha_range_stats, distortion_stats, iteration_stats, AlphaRangeStats, DistortionStats,
    IterationStat, StudyConfig,
};

use crate::constellation::{Constellation, ConstellationError, Kind, Modulation};
use crate::precoder::{self, MsmOptions, PrecodeError, WienerFilter};
use crate::quantize::ce_quantize;
use crate::ComplexVector;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("received block is identically zero")]
    DegenerateBlock,
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error("realization {realization}: {source}")]
    Precode {
        realization: usize,
        #[source]
        source: PrecodeError,
    },
}

/// Transmit processing under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// MSM with the CE quantizer.
    Msm,
    /// Wiener filter followed by the `Q`-phase CE quantizer.
    Qwf,
    /// Wiener filter followed by the phase-only (`Q = ∞`) CE quantizer.
    WfCe,
    /// Unconstrained Wiener filter.
    WfIdeal,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Msm, Scheme::Qwf, Scheme::WfCe, Scheme::WfIdeal];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Msm => "msm",
            Scheme::Qwf => "qwf",
            Scheme::WfCe => "wf-ce",
            Scheme::WfIdeal => "wf",
        }
    }

    /// Whether the scheme uses the finite phase resolution `Q`.
    pub fn quantized(self) -> bool {
        matches!(self, Scheme::Msm | Scheme::Qwf)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "msm" => Ok(Scheme::Msm),
            "qwf" => Ok(Scheme::Qwf),
            "wf-ce" | "wfce" => Ok(Scheme::WfCe),
            "wf" | "wf-ideal" => Ok(Scheme::WfIdeal),
            other => Err(SimError::InvalidConfig(format!("unknown precoder `{other}`"))),
        }
    }
}

/// `min, min + step, …` up to and including `max` (within rounding).
pub fn db_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || max < min {
        return vec![min];
    }
    let count = ((max - min) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| min + k as f64 * step).collect()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Base-station antennas.
    pub n: usize,
    /// Single-antenna users.
    pub m: usize,
    /// DAC phase count `Q`.
    pub q: usize,
    pub modulation: Modulation,
    pub scheme: Scheme,
    pub ptx_db: Vec<f64>,
    /// CSI error variance fraction.
    pub nu: f64,
    pub channels: usize,
    pub vectors_per_channel: usize,
    /// Blind gain estimation block length.
    pub block_len: usize,
    pub seed: u64,
    pub noise: Noise,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 64,
            m: 8,
            q: 4,
            modulation: Modulation::QPSK,
            scheme: Scheme::Msm,
            ptx_db: db_grid(-15.0, 30.0, 1.0),
            nu: 0.0,
            channels: 20,
            vectors_per_channel: 128,
            block_len: 128,
            seed: 1,
            noise: Noise::On,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.m == 0 || self.n < self.m {
            return bad(format!("need N ≥ M ≥ 1, got N = {}, M = {}", self.n, self.m));
        }
        if self.block_len == 0 {
            return bad("block length T must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return bad(format!("nu must lie in [0, 1], got {}", self.nu));
        }
        if self.channels == 0 || self.vectors_per_channel == 0 {
            return bad("channel and vector counts must be positive".into());
        }
        if self.ptx_db.is_empty() || self.ptx_db.iter().any(|p| !p.is_finite()) {
            return bad("transmit power grid must be non-empty and finite".into());
        }
        if self.scheme.quantized() && (self.q < 4 || !self.q.is_power_of_two()) {
            return bad(format!("Q must be a power of two ≥ 4, got {}", self.q));
        }
        self.modulation.constellation()?;
        Ok(())
    }
}

/// BER and side statistics of one (scheme, modulation, Q, P_tx, ν) point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub precoder: String,
    pub modulation: String,
    /// Phase count, empty for schemes without a finite resolution.
    pub q: Option<usize>,
    pub n: usize,
    pub m: usize,
    pub ptx_db: f64,
    pub nu: f64,
    pub channels: usize,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    /// `√(ber(1 - ber)/bits_total)`.
    pub std_err: f64,
    pub mean_delta: Option<f64>,
    pub mean_alpha: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub mean_op_count: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RealizationFailure {
    pub realization: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub records: Vec<BerRecord>,
    /// Realizations skipped because precoding failed.
    pub failures: Vec<RealizationFailure>,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    errors: Vec<u64>,
    bits: Vec<u64>,
    solves: usize,
    delta: f64,
    alpha: f64,
    alpha_count: usize,
    iterations: f64,
    ops: f64,
}

/// The stream for one realization.
pub fn realization_rng(seed: u64, realization: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization as u64);
    rng
}

fn realize(
    cfg: &SimConfig,
    c: &Constellation,
    opts: &MsmOptions,
    index: usize,
) -> Result<Tally, SimError> {
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = realization_rng(cfg.seed, index);
    let h = gen_channel(n, m, &mut rng);
    let h_est = corrupt_csi(&h, cfg.nu, &mut rng);
    let sent: Vec<Vec<usize>> = (0..cfg.vectors_per_channel)
        .map(|_| (0..m).map(|_| rng.random_range(0..c.order())).collect())
        .collect();
    let symbols: Vec<Vec<Complex64>> = sent
        .iter()
        .map(|idx| idx.iter().map(|&i| c.point(i)).collect())
        .collect();

    let mut tally = Tally {
        errors: vec![0; cfg.ptx_db.len()],
        bits: vec![0; cfg.ptx_db.len()],
        ..Default::default()
    };

    let wrap = |source| SimError::Precode { realization: index, source };
    let msm_t: Vec<ComplexVector> = if cfg.scheme == Scheme::Msm {
        let mut out = Vec::with_capacity(symbols.len());
        for s in &symbols {
            let r = precoder::msm(&h_est, s, c, cfg.q, opts).map_err(wrap)?;
            tally.solves += 1;
            tally.delta += r.delta;
            if let Some(a) = r.alpha {
                tally.alpha += a;
                tally.alpha_count += 1;
            }
            tally.iterations += r.stats.iterations as f64;
            tally.ops += r.stats.op_count as f64;
            out.push(r.t);
        }
        out
    } else {
        Vec::new()
    };

    let energy = c.mean_energy();
    let mut received = vec![DVector::zeros(m); symbols.len()];
    for (p_idx, &p_db) in cfg.ptx_db.iter().enumerate() {
        let p = db_to_linear(p_db);
        let filter = match cfg.scheme {
            Scheme::Msm => None,
            _ => Some(WienerFilter::new(&h_est, p, 1.0, energy).map_err(wrap)?),
        };
        for (v, s) in symbols.iter().enumerate() {
            let t = match (cfg.scheme, &filter) {
                (Scheme::Msm, _) => &msm_t[v] * Complex64::new((p / n as f64).sqrt(), 0.0),
                (scheme, Some(f)) => {
                    let x = f.apply(s);
                    match scheme {
                        Scheme::Qwf => ce_quantize(&x, cfg.q, p),
                        Scheme::WfCe => precoder::phase_only(&x, p),
                        _ => x,
                    }
                }
                (_, None) => unreachable!("linear schemes always build a filter"),
            };
            received[v] = transmit(&h, &t, cfg.noise, &mut rng)?;
        }
        for user in 0..m {
            for start in (0..symbols.len()).step_by(cfg.block_len) {
                let end = (start + cfg.block_len).min(symbols.len());
                let block: Vec<Complex64> = received[start..end].iter().map(|r| r[user]).collect();
                let gain = match c.kind() {
                    Kind::Psk => 1.0,
                    // an all-zero block cannot be scaled; detection then
                    // sees zeros, which is what the receiver would do
                    Kind::Qam => estimate_gain(&block, c).unwrap_or(1.0),
                };
                for (k, r) in block.iter().enumerate() {
                    let detected = c.detect(r * gain);
                    tally.errors[p_idx] += c.bit_errors(sent[start + k][user], detected) as u64;
                    tally.bits[p_idx] += c.bits_per_symbol() as u64;
                }
            }
        }
    }
    Ok(tally)
}

/// Runs the Monte-Carlo BER simulation of `cfg`, one work unit per channel
/// realization on the current rayon pool.
pub fn run_ber(cfg: &SimConfig, opts: &MsmOptions) -> Result<SimOutput, SimError> {
    cfg.validate()?;
    let c = cfg.modulation.constellation()?;
    let results: Vec<Result<Tally, SimError>> = (0..cfg.channels)
        .into_par_iter()
        .map(|i| realize(cfg, &c, opts, i))
        .collect();

    let mut total = Tally {
        errors: vec![0; cfg.ptx_db.len()],
        bits: vec![0; cfg.ptx_db.len()],
        ..Default::default()
    };
    let mut failures = Vec::new();
    let mut completed = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => {
                completed += 1;
                for k in 0..t.errors.len() {
                    total.errors[k] += t.errors[k];
                    total.bits[k] += t.bits[k];
                }
                total.solves += t.solves;
                total.delta += t.delta;
                total.alpha += t.alpha;
                total.alpha_count += t.alpha_count;
                total.iterations += t.iterations;
                total.ops += t.ops;
            }
            Err(SimError::Precode { source, .. }) => {
                log::warn!("realization {i} skipped: {source}");
                failures.push(RealizationFailure { realization: i, message: source.to_string() });
            }
            Err(e) => return Err(e),
        }
    }

    let per_solve = |sum: f64, count: usize| (count > 0).then(|| sum / count as f64);
    let records = cfg
        .ptx_db
        .iter()
        .enumerate()
        .map(|(k, &ptx_db)| {
            let bits = total.bits[k];
            let ber = if bits > 0 { total.errors[k] as f64 / bits as f64 } else { 0.0 };
            BerRecord {
                precoder: cfg.scheme.to_string(),
                modulation: cfg.modulation.to_string(),
                q: match cfg.scheme {
                    Scheme::Msm | Scheme::Qwf => Some(cfg.q),
                    _ => None,
                },
                n: cfg.n,
                m: cfg.m,
                ptx_db,
                nu: cfg.nu,
                channels: completed,
                bit_errors: total.errors[k],
                bits_total: bits,
                ber,
                std_err: if bits > 0 { (ber * (1.0 - ber) / bits as f64).sqrt() } else { 0.0 },
                mean_delta: per_solve(total.delta, total.solves),
                mean_alpha: per_solve(total.alpha, total.alpha_count),
                mean_iterations: per_solve(total.iterations, total.solves),
                mean_op_count: per_solve(total.ops, total.solves),
            }
        })
        .collect();
    Ok(SimOutput { records, failures })
}

/// Transmit power (dB) at which a BER curve first drops to `target`,
/// interpolating `log10(BER)` linearly between grid points.
pub fn ptx_at_ber(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    let below = curve.iter().position(|&(_, b)| b <= target)?;
    if below == 0 {
        return None;
    }
    let (p0, b0) = curve[below - 1];
    let (p1, b1) = curve[below];
    let (l0, lt) = (b0.log10(), target.log10());
    let l1 = if b1 > 0.0 { b1.log10() } else { f64::NEG_INFINITY };
    if l1.is_infinite() {
        // linear in BER when the next point has no errors at all
        return Some(p0 + (p1 - p0) * (b0 - target) / b0);
    }
    Some(p0 + (p1 - p0) * (l0 - lt) / (l0 - l1))
}

/// Convenience: the `(ptx_db, ber)` curve of a record list.
pub fn ber_curve(records: &[BerRecord]) -> Vec<(f64, f64)> {
    records.iter().map(|r| (r.ptx_db, r.ber)).collect()
}
