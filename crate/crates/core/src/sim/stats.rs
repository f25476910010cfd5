//! Per-solve statistics behind the tables: quantization distortion versus
//! block length, the relative range of α, and simplex iteration counts.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::{gen_channel, realization_rng, SimError};
use crate::constellation::{Constellation, Modulation};
use crate::precoder::{self, MsmOptions};
use crate::ComplexMatrix;

/// Shared shape of the table studies.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub modulation: Modulation,
    pub channels: usize,
    pub vectors_per_channel: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            n: 64,
            m: 8,
            q: 4,
            modulation: Modulation::QAM16,
            channels: 20,
            vectors_per_channel: 128,
            seed: 1,
        }
    }
}

impl StudyConfig {
    fn validate(&self) -> Result<Constellation, SimError> {
        if self.m == 0 || self.n < self.m {
            return Err(SimError::InvalidConfig(format!(
                "need N ≥ M ≥ 1, got N = {}, M = {}",
                self.n, self.m
            )));
        }
        if self.channels == 0 || self.vectors_per_channel == 0 {
            return Err(SimError::InvalidConfig("channel and vector counts must be positive".into()));
        }
        if self.q < 4 || !self.q.is_power_of_two() {
            return Err(SimError::InvalidConfig(format!("Q must be a power of two ≥ 4, got {}", self.q)));
        }
        Ok(self.modulation.constellation()?)
    }

    /// Channel and symbol vectors of one realization, on the same stream
    /// layout as the BER simulation.
    fn draw(&self, c: &Constellation, index: usize) -> (ComplexMatrix, Vec<Vec<Complex64>>) {
        let mut rng = realization_rng(self.seed, index);
        let h = gen_channel(self.n, self.m, &mut rng);
        // keep the CSI-error draw so symbols line up with run_ber
        let _ = gen_channel(self.n, self.m, &mut rng);
        let symbols = (0..self.vectors_per_channel)
            .map(|_| (0..self.m).map(|_| c.point(rng.random_range(0..c.order()))).collect())
            .collect();
        (h, symbols)
    }
}

fn precode_error(realization: usize) -> impl Fn(precoder::PrecodeError) -> SimError {
    move |source| SimError::Precode { realization, source }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionStats {
    /// Vectors sharing one α.
    pub block: usize,
    /// Mean fraction of antennas with `t_n ≠ x_n`.
    pub distorted_fraction: f64,
    /// Mean `‖t - x‖²` at `P_tx = N`.
    pub mse: f64,
    pub mean_delta: f64,
    pub vectors: usize,
}

/// Quantization distortion of QAM MSM when `block` consecutive vectors share
/// one α (`block = 1` is symbol-wise processing).
pub fn distortion_stats(
    cfg: &StudyConfig,
    block: usize,
    opts: &MsmOptions,
) -> Result<DistortionStats, SimError> {
    let c = cfg.validate()?;
    if block == 0 {
        return Err(SimError::InvalidConfig("block size must be at least 1".into()));
    }
    let per_channel = (0..cfg.channels)
        .into_par_iter()
        .map(|i| {
            let (h, symbols) = cfg.draw(&c, i);
            let mut sums = (0.0, 0.0, 0.0, 0usize);
            for chunk in symbols.chunks(block) {
                let results = if block == 1 {
                    vec![precoder::msm(&h, &chunk[0], &c, cfg.q, opts).map_err(precode_error(i))?]
                } else {
                    precoder::msm_qam_block(&h, chunk, &c, cfg.q, opts).map_err(precode_error(i))?
                };
                for r in results {
                    sums.0 += r.distorted_fraction;
                    sums.1 += r.mse;
                    sums.2 += r.delta;
                    sums.3 += 1;
                }
            }
            Ok(sums)
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let (df, mse, delta, count) = per_channel
        .into_iter()
        .fold((0.0, 0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let k = count as f64;
    Ok(DistortionStats {
        block,
        distorted_fraction: df / k,
        mse: mse / k,
        mean_delta: delta / k,
        vectors: count,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaRangeStats {
    pub n: usize,
    pub m: usize,
    /// `E_H[(max α − min α) / mean α]` of the joint α.
    pub joint: f64,
    /// `max_m E_H[(max α_m − min α_m) / mean α_m]` with one α per user.
    pub per_user: f64,
}

fn relative_range(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean > 0.0 { (max - min) / mean } else { 0.0 }
}

/// Relative range of the QAM scale factor over the vectors of each channel,
/// averaged over channels. Joint and per-user α are computed on the same
/// channels and symbols.
pub fn alpha_range_stats(cfg: &StudyConfig, opts: &MsmOptions) -> Result<AlphaRangeStats, SimError> {
    let c = cfg.validate()?;
    if c.kind() != crate::constellation::Kind::Qam {
        return Err(SimError::InvalidConfig("α is defined for QAM only".into()));
    }
    let per_channel = (0..cfg.channels)
        .into_par_iter()
        .map(|i| {
            let (h, symbols) = cfg.draw(&c, i);
            let mut joint = Vec::with_capacity(symbols.len());
            let mut users = vec![Vec::with_capacity(symbols.len()); cfg.m];
            for s in &symbols {
                let r = precoder::msm_qam(&h, s, &c, cfg.q, opts).map_err(precode_error(i))?;
                joint.push(r.alpha.unwrap_or(0.0));
                let r = precoder::msm_qam_per_user_alpha(&h, s, &c, cfg.q, opts)
                    .map_err(precode_error(i))?;
                for (u, a) in r.user_alphas.unwrap_or_default().into_iter().enumerate() {
                    users[u].push(a);
                }
            }
            let user_ranges: Vec<f64> = users.iter().map(|a| relative_range(a)).collect();
            Ok((relative_range(&joint), user_ranges))
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let k = per_channel.len() as f64;
    let joint = per_channel.iter().map(|p| p.0).sum::<f64>() / k;
    let per_user = (0..cfg.m)
        .map(|u| per_channel.iter().map(|p| p.1[u]).sum::<f64>() / k)
        .fold(0.0, f64::max);
    Ok(AlphaRangeStats { n: cfg.n, m: cfg.m, joint, per_user })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationStat {
    pub modulation: Modulation,
    pub q: usize,
    pub mean_iterations: f64,
    pub mean_pivots: f64,
    pub mean_op_count: f64,
    pub solves: usize,
}

/// Mean simplex work per symbol-wise MSM solve. `cfg.modulation` and
/// `cfg.q` are ignored in favour of each listed pair.
pub fn iteration_stats(
    cfg: &StudyConfig,
    keys: &[(Modulation, usize)],
    opts: &MsmOptions,
) -> Result<Vec<IterationStat>, SimError> {
    keys.iter()
        .map(|&(modulation, q)| {
            let point = StudyConfig { modulation, q, ..cfg.clone() };
            let c = point.validate()?;
            let sums = (0..point.channels)
                .into_par_iter()
                .map(|i| {
                    let (h, symbols) = point.draw(&c, i);
                    let mut acc = (0.0, 0.0, 0.0, 0usize);
                    for s in &symbols {
                        let r = precoder::msm(&h, s, &c, q, opts).map_err(precode_error(i))?;
                        acc.0 += r.stats.iterations as f64;
                        acc.1 += r.stats.pivots as f64;
                        acc.2 += r.stats.op_count as f64;
                        acc.3 += 1;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>, SimError>>()?
                .into_iter()
                .fold((0.0, 0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
            let k = sums.3 as f64;
            Ok(IterationStat {
                modulation,
                q,
                mean_iterations: sums.0 / k,
                mean_pivots: sums.1 / k,
                mean_op_count: sums.2 / k,
                solves: sums.3,
            })
        })
        .collect()
}
