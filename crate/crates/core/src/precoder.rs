//! Maximum-safety-margin (MSM) precoders and Wiener-filter baselines.
//!
//! Both MSM variants solve one LP per symbol vector over the real-stacked
//! relaxed transmit vector `x' = [Re x; Im x]`, confined to the polygon
//! spanned by the CE alphabet at `P_tx = N`. The relaxed solution is then
//! CE-quantized. The LP never references the transmit power, so a solution
//! computed at `P_tx = N` serves every power by scaling with `√(P_tx/N)`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::constellation::{Constellation, Kind};
use crate::lp::{self, LpError, LpProblem, LpSolution, LpStatus, Sense, SolveOptions};
use crate::quantize::{ce_quantize, polygon_spec, PolygonSpec, QuantizeError};
use crate::{ComplexMatrix, ComplexVector};

/// Entries of `t` and `x` closer than this count as undistorted.
pub const DISTORTION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PrecodeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("symbol {index} ({value}) is not a point of the {modulation} constellation")]
    NotASymbol { index: usize, value: Complex64, modulation: String },
    #[error("precoder needs a {expected} constellation")]
    WrongModulation { expected: Kind },
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error("LP solver failed: {0}")]
    Solver(#[from] LpError),
    #[error("LP solver returned status {0:?}")]
    SolverStatus(LpStatus),
    #[error("channel matrix is singular")]
    SingularChannel,
}

/// Deliberate model faults, used only to check that self-tests notice them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Builds the PSK `A` block as `[Re H̃, +Im H̃]`.
    FlipImagInA,
}

#[derive(Clone, Debug)]
pub struct MsmOptions {
    pub lp: SolveOptions,
    /// Start the simplex at the polygon-box corner of the matched filter
    /// `Hᴴ s` rather than at the solver's default point.
    pub matched_start: bool,
    pub mutation: Mutation,
}

impl Default for MsmOptions {
    fn default() -> Self {
        MsmOptions {
            lp: SolveOptions::default(),
            matched_start: true,
            mutation: Mutation::None,
        }
    }
}

/// Solver effort of one precoding LP.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LpStats {
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    pub pivots: usize,
    pub bound_flips: usize,
    pub op_count: u64,
}

impl LpStats {
    fn from_solution(problem: &LpProblem, sol: &LpSolution) -> Self {
        LpStats {
            rows: problem.num_rows(),
            cols: problem.num_vars(),
            iterations: sol.iterations,
            pivots: sol.pivots,
            bound_flips: sol.bound_flips,
            op_count: sol.op_count,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrecodeResult {
    /// Relaxed transmit vector, inside the polygon at `P_tx = N`.
    pub x: ComplexVector,
    /// `ce_quantize(x, Q)` at `P_tx = N`.
    pub t: ComplexVector,
    pub delta: f64,
    /// Joint QAM scale factor.
    pub alpha: Option<f64>,
    /// Per-user scale factors of [`msm_qam_per_user_alpha`].
    pub user_alphas: Option<Vec<f64>>,
    pub stats: LpStats,
    /// Fraction of entries with `|t_n - x_n| > DISTORTION_TOL`.
    pub distorted_fraction: f64,
    /// `‖t - x‖²`.
    pub mse: f64,
}

impl PrecodeResult {
    fn new(
        x: ComplexVector,
        q_phases: usize,
        delta: f64,
        alpha: Option<f64>,
        stats: LpStats,
    ) -> Self {
        let n = x.len();
        let t = ce_quantize(&x, q_phases, n as f64);
        let diff = &t - &x;
        let distorted = diff.iter().filter(|d| d.norm() > DISTORTION_TOL).count();
        PrecodeResult {
            distorted_fraction: distorted as f64 / n as f64,
            mse: diff.norm_squared(),
            x,
            t,
            delta,
            alpha,
            user_alphas: None,
            stats,
        }
    }
}

fn unstack(v: &[f64], n: usize) -> ComplexVector {
    DVector::from_fn(n, |i, _| Complex64::new(v[i], v[n + i]))
}

fn check_dims(h: &ComplexMatrix, s: &[Complex64]) -> Result<(), PrecodeError> {
    if h.nrows() != s.len() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "H has {} rows but {} symbols were given",
            h.nrows(),
            s.len()
        )));
    }
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(PrecodeError::DimensionMismatch("empty channel".into()));
    }
    Ok(())
}

fn check_symbols(c: &Constellation, s: &[Complex64]) -> Result<(), PrecodeError> {
    for (index, &value) in s.iter().enumerate() {
        if (c.point(c.detect(value)) - value).norm() > 1e-9 {
            return Err(PrecodeError::NotASymbol {
                index,
                value,
                modulation: c.modulation().to_string(),
            });
        }
    }
    Ok(())
}

/// Writes `[Re Hᴴs; Im Hᴴs]` into `hint[col..col + 2N]`.
fn matched_hint(hint: &mut [f64], col: usize, h: &ComplexMatrix, s: &[Complex64]) {
    let n = h.ncols();
    for j in 0..n {
        let v: Complex64 = (0..s.len()).map(|i| h[(i, j)].conj() * s[i]).sum();
        hint[col + j] = v.re;
        hint[col + n + j] = v.im;
    }
}

fn solve_optimal(
    problem: &LpProblem,
    opts: &MsmOptions,
    hint: &[f64],
) -> Result<LpSolution, PrecodeError> {
    let hint = opts.matched_start.then_some(hint);
    let sol = lp::solve_from(problem, &opts.lp, hint)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        other => Err(PrecodeError::SolverStatus(other)),
    }
}

/// Real `M × 2N` blocks `[Re G, -Im G]` and `[Im G, Re G]` of a complex matrix.
fn real_blocks(g: &ComplexMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, n) = g.shape();
    let re = DMatrix::from_fn(m, 2 * n, |i, j| if j < n { g[(i, j)].re } else { -g[(i, j - n)].im });
    let im = DMatrix::from_fn(m, 2 * n, |i, j| if j < n { g[(i, j)].im } else { g[(i, j - n)].re });
    (re, im)
}

/// Writes `E x' ≤ cos(π/Q)` for the variable block starting at `col`.
fn push_polygon_rows(
    rows: &mut Vec<(Vec<(usize, f64)>, f64)>,
    poly: &PolygonSpec,
    col: usize,
) {
    for r in 0..poly.e.nrows() {
        let coeffs = (0..poly.e.ncols())
            .filter(|&j| poly.e[(r, j)] != 0.0)
            .map(|j| (col + j, poly.e[(r, j)]))
            .collect();
        rows.push((coeffs, poly.bound));
    }
}

fn assemble(
    n_vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
) -> Result<LpProblem, PrecodeError> {
    let m = rows.len();
    let mut a = DMatrix::zeros(m, n_vars);
    let mut b = Vec::with_capacity(m);
    for (i, (coeffs, rhs)) in rows.into_iter().enumerate() {
        for (j, v) in coeffs {
            a[(i, j)] += v;
        }
        b.push(rhs);
    }
    Ok(LpProblem::new(objective, a, b, vec![Sense::Le; m], lower, upper)?)
}

/// The PSK MSM program over `v = [x'; δ]`.
#[derive(Clone, Debug)]
pub struct PskLpBuild {
    /// `[Re H̃, -Im H̃]` with `H̃ = diag(s*) H`.
    pub a: DMatrix<f64>,
    /// `[Im H̃, Re H̃]`.
    pub b: DMatrix<f64>,
    pub theta: f64,
    pub polygon: PolygonSpec,
    pub problem: LpProblem,
}

impl PskLpBuild {
    pub fn new(
        h: &ComplexMatrix,
        s: &[Complex64],
        constellation: &Constellation,
        q_phases: usize,
        mutation: Mutation,
    ) -> Result<Self, PrecodeError> {
        check_dims(h, s)?;
        let theta = constellation
            .theta()
            .ok_or(PrecodeError::WrongModulation { expected: Kind::Psk })?;
        check_symbols(constellation, s)?;
        let (m, n) = h.shape();
        let polygon = polygon_spec(q_phases, n)?;

        let mut h_tilde = h.clone();
        for (i, sym) in s.iter().enumerate() {
            let unit = sym.conj() / sym.norm();
            for j in 0..n {
                h_tilde[(i, j)] *= unit;
            }
        }
        let (mut a, b) = real_blocks(&h_tilde);
        if mutation == Mutation::FlipImagInA {
            for i in 0..m {
                for j in n..2 * n {
                    a[(i, j)] = -a[(i, j)];
                }
            }
        }

        let nv = 2 * n + 1;
        let delta_col = 2 * n;
        let tan = theta.tan();
        let inv_cos = 1.0 / theta.cos();
        let mut rows = Vec::with_capacity(2 * m + polygon.e.nrows());
        for sign in [1.0, -1.0] {
            for i in 0..m {
                let mut coeffs: Vec<(usize, f64)> =
                    (0..2 * n).map(|j| (j, sign * b[(i, j)] - tan * a[(i, j)])).collect();
                coeffs.push((delta_col, inv_cos));
                rows.push((coeffs, 0.0));
            }
        }
        push_polygon_rows(&mut rows, &polygon, 0);

        let mut objective = vec![0.0; nv];
        objective[delta_col] = 1.0;
        let mut lower = vec![-polygon.bound; nv];
        let mut upper = vec![polygon.bound; nv];
        lower[delta_col] = 0.0;
        upper[delta_col] = f64::INFINITY;
        let problem = assemble(nv, objective, rows, lower, upper)?;
        Ok(PskLpBuild { a, b, theta, polygon, problem })
    }
}

pub fn msm_psk(
    h: &ComplexMatrix,
    s: &[Complex64],
    constellation: &Constellation,
    q_phases: usize,
    opts: &MsmOptions,
) -> Result<PrecodeResult, PrecodeError> {
    let build = PskLpBuild::new(h, s, constellation, q_phases, opts.mutation)?;
    let n = h.ncols();
    let mut hint = vec![0.0; 2 * n + 1];
    matched_hint(&mut hint, 0, h, s);
    let sol = solve_optimal(&build.problem, opts, &hint)?;
    let x = unstack(&sol.x, n);
    let stats = LpStats::from_solution(&build.problem, &sol);
    Ok(PrecodeResult::new(x, q_phases, sol.x[2 * n].max(0.0), None, stats))
}

/// One user's symbol-region row: `coeffs · x' + (√2δ) + alpha_coeff · α ≤ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SrRow {
    pub user: usize,
    pub coeffs: Vec<f64>,
    pub alpha_coeff: f64,
}

/// The QAM MSM symbol-region data for one symbol vector.
#[derive(Clone, Debug)]
pub struct QamLpBuild {
    /// `[Re Ĥ, -Im Ĥ]` with `Ĥ = diag(σ_R - jσ_I) H / √2`.
    pub v: DMatrix<f64>,
    /// `[Im Ĥ, Re Ĥ]`.
    pub w: DMatrix<f64>,
    /// `c_m = o_m (σ_R - jσ_I) / √2`, independent of α.
    pub c: Vec<Complex64>,
    /// Real-axis outward extent per user, `2` or `∞`.
    pub xi_re: Vec<f64>,
    /// Imaginary-axis outward extent per user, `2` or `∞`.
    pub xi_im: Vec<f64>,
    /// Whether `σ_R σ_I = 1`; decides which of the outer rows bounds which axis.
    pub same_sign: Vec<bool>,
}

impl QamLpBuild {
    pub fn new(
        h: &ComplexMatrix,
        s: &[Complex64],
        constellation: &Constellation,
    ) -> Result<Self, PrecodeError> {
        check_dims(h, s)?;
        if constellation.kind() != Kind::Qam {
            return Err(PrecodeError::WrongModulation { expected: Kind::Qam });
        }
        check_symbols(constellation, s)?;
        let mut h_hat = h.clone();
        let mut c = Vec::with_capacity(s.len());
        let mut xi_re = Vec::with_capacity(s.len());
        let mut xi_im = Vec::with_capacity(s.len());
        let mut same_sign = Vec::with_capacity(s.len());
        for (i, &sym) in s.iter().enumerate() {
            let region = constellation.region(sym).expect("QAM constellation");
            let rot = region.direction.conj() / SQRT_2;
            for j in 0..h.ncols() {
                h_hat[(i, j)] *= rot;
            }
            c.push(region.offset * rot);
            xi_re.push(region.xi_re);
            xi_im.push(region.xi_im);
            same_sign.push(region.direction.re * region.direction.im > 0.0);
        }
        let (v, w) = real_blocks(&h_hat);
        Ok(QamLpBuild { v, w, c, xi_re, xi_im, same_sign })
    }

    /// All finite symbol-region rows. Rows whose ξ is infinite are vacuous
    /// and left out; `xi_cap` replaces ∞ by a finite value instead.
    pub fn rows(&self, xi_cap: Option<f64>) -> Vec<SrRow> {
        let (m, n2) = self.v.shape();
        let mut out = Vec::with_capacity(4 * m);
        let combine = |i: usize, sw: f64, sv: f64| -> Vec<f64> {
            (0..n2).map(|j| sw * self.w[(i, j)] + sv * self.v[(i, j)]).collect()
        };
        for i in 0..m {
            let (cr, ci) = (self.c[i].re, self.c[i].im);
            out.push(SrRow { user: i, coeffs: combine(i, 1.0, -1.0), alpha_coeff: cr - ci });
            out.push(SrRow { user: i, coeffs: combine(i, -1.0, -1.0), alpha_coeff: cr + ci });
            // In quadrants I and III the third row bounds the imaginary
            // offset and the fourth the real one; II and IV swap them.
            let (xi3, xi4) = if self.same_sign[i] {
                (self.xi_im[i], self.xi_re[i])
            } else {
                (self.xi_re[i], self.xi_im[i])
            };
            let cap = |xi: f64| match xi_cap {
                Some(c) if xi.is_infinite() => Some(c),
                _ if xi.is_infinite() => None,
                _ => Some(xi),
            };
            if let Some(xi) = cap(xi3) {
                out.push(SrRow {
                    user: i,
                    coeffs: combine(i, 1.0, 1.0),
                    alpha_coeff: -cr - ci - SQRT_2 * xi,
                });
            }
            if let Some(xi) = cap(xi4) {
                out.push(SrRow {
                    user: i,
                    coeffs: combine(i, -1.0, 1.0),
                    alpha_coeff: -cr + ci - SQRT_2 * xi,
                });
            }
        }
        out
    }
}

/// Layout of a QAM program with `blocks` symbol vectors and `alphas`
/// scale variables: `[x'_1 … x'_B, √2δ_1 … √2δ_B, α_1 … α_K]`.
struct QamLayout {
    n: usize,
    blocks: usize,
    alphas: usize,
}

impl QamLayout {
    fn x(&self, b: usize) -> usize {
        2 * self.n * b
    }
    fn w(&self, b: usize) -> usize {
        2 * self.n * self.blocks + b
    }
    fn alpha(&self, k: usize) -> usize {
        (2 * self.n + 1) * self.blocks + k
    }
    fn len(&self) -> usize {
        (2 * self.n + 1) * self.blocks + self.alphas
    }
}

struct QamSolution {
    sol: LpSolution,
    stats: LpStats,
    layout: QamLayout,
}

fn solve_qam(
    h: &ComplexMatrix,
    symbols: &[&[Complex64]],
    constellation: &Constellation,
    q_phases: usize,
    per_user_alpha: bool,
    xi_cap: Option<f64>,
    opts: &MsmOptions,
) -> Result<QamSolution, PrecodeError> {
    let (m, n) = h.shape();
    let polygon = polygon_spec(q_phases, n)?;
    let layout = QamLayout {
        n,
        blocks: symbols.len(),
        alphas: if per_user_alpha { m } else { 1 },
    };
    let mut rows = Vec::new();
    for (b, s) in symbols.iter().enumerate() {
        let build = QamLpBuild::new(h, s, constellation)?;
        for row in build.rows(xi_cap) {
            let mut coeffs: Vec<(usize, f64)> = row
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, &v)| (layout.x(b) + j, v))
                .collect();
            coeffs.push((layout.w(b), 1.0));
            let k = if per_user_alpha { row.user } else { 0 };
            coeffs.push((layout.alpha(k), row.alpha_coeff));
            rows.push((coeffs, 0.0));
        }
    }
    // δ ≤ α. Implied by any finite outer row; for all-corner draws it is
    // the only thing keeping the scaled constellation non-degenerate.
    for b in 0..layout.blocks {
        for k in 0..layout.alphas {
            rows.push((vec![(layout.w(b), 1.0), (layout.alpha(k), -SQRT_2)], 0.0));
        }
    }
    for b in 0..layout.blocks {
        push_polygon_rows(&mut rows, &polygon, layout.x(b));
    }
    let nv = layout.len();
    let mut objective = vec![0.0; nv];
    let mut lower = vec![-polygon.bound; nv];
    let mut upper = vec![polygon.bound; nv];
    for b in 0..layout.blocks {
        objective[layout.w(b)] = 1.0;
    }
    for j in layout.w(0)..nv {
        lower[j] = 0.0;
        upper[j] = f64::INFINITY;
    }
    let problem = assemble(nv, objective, rows, lower, upper)?;
    let mut hint = vec![0.0; nv];
    for (b, s) in symbols.iter().enumerate() {
        matched_hint(&mut hint, layout.x(b), h, s);
    }
    let sol = solve_optimal(&problem, opts, &hint)?;
    let stats = LpStats::from_solution(&problem, &sol);
    Ok(QamSolution { sol, stats, layout })
}

impl QamSolution {
    fn result(&self, b: usize, q_phases: usize, alpha: Option<f64>) -> PrecodeResult {
        let n = self.layout.n;
        let start = self.layout.x(b);
        let x = unstack(&self.sol.x[start..start + 2 * n], n);
        let delta = (self.sol.x[self.layout.w(b)] / SQRT_2).max(0.0);
        PrecodeResult::new(x, q_phases, delta, alpha, self.stats)
    }

    fn alpha(&self, k: usize) -> f64 {
        self.sol.x[self.layout.alpha(k)]
    }
}

pub fn msm_qam(
    h: &ComplexMatrix,
    s: &[Complex64],
    constellation: &Constellation,
    q_phases: usize,
    opts: &MsmOptions,
) -> Result<PrecodeResult, PrecodeError> {
    let solved = solve_qam(h, &[s], constellation, q_phases, false, None, opts)?;
    Ok(solved.result(0, q_phases, Some(solved.alpha(0))))
}

/// As [`msm_qam`], with every infinite ξ replaced by `xi_cap`.
pub fn msm_qam_capped(
    h: &ComplexMatrix,
    s: &[Complex64],
    constellation: &Constellation,
    q_phases: usize,
    xi_cap: f64,
    opts: &MsmOptions,
) -> Result<PrecodeResult, PrecodeError> {
    let solved = solve_qam(h, &[s], constellation, q_phases, false, Some(xi_cap), opts)?;
    Ok(solved.result(0, q_phases, Some(solved.alpha(0))))
}

/// Jointly precodes `B` symbol vectors with one shared α, maximizing the sum
/// of their margins. Every result carries the stats of the joint LP.
pub fn msm_qam_block(
    h: &ComplexMatrix,
    block: &[Vec<Complex64>],
    constellation: &Constellation,
    q_phases: usize,
    opts: &MsmOptions,
) -> Result<Vec<PrecodeResult>, PrecodeError> {
    if block.is_empty() {
        return Err(PrecodeError::DimensionMismatch("empty block".into()));
    }
    let refs: Vec<&[Complex64]> = block.iter().map(Vec::as_slice).collect();
    let solved = solve_qam(h, &refs, constellation, q_phases, false, None, opts)?;
    let alpha = solved.alpha(0);
    Ok((0..block.len()).map(|b| solved.result(b, q_phases, Some(alpha))).collect())
}

/// QAM MSM with an independent scale factor `α_m` per user.
pub fn msm_qam_per_user_alpha(
    h: &ComplexMatrix,
    s: &[Complex64],
    constellation: &Constellation,
    q_phases: usize,
    opts: &MsmOptions,
) -> Result<PrecodeResult, PrecodeError> {
    let solved = solve_qam(h, &[s], constellation, q_phases, true, None, opts)?;
    let mut result = solved.result(0, q_phases, None);
    result.user_alphas = Some((0..s.len()).map(|k| solved.alpha(k)).collect());
    Ok(result)
}

/// Dispatches on the constellation family.
pub fn msm(
    h: &ComplexMatrix,
    s: &[Complex64],
    constellation: &Constellation,
    q_phases: usize,
    opts: &MsmOptions,
) -> Result<PrecodeResult, PrecodeError> {
    match constellation.kind() {
        Kind::Psk => msm_psk(h, s, constellation, q_phases, opts),
        Kind::Qam => msm_qam(h, s, constellation, q_phases, opts),
    }
}

/// Smallest per-user geometric safety margin of the noiseless receive
/// vector `H x`.
pub fn min_margin(
    h: &ComplexMatrix,
    x: &ComplexVector,
    s: &[Complex64],
    constellation: &Constellation,
    alpha: f64,
) -> f64 {
    let y = h * x;
    y.iter()
        .zip(s)
        .map(|(&yi, &si)| constellation.safety_margin(yi, si, alpha))
        .fold(f64::INFINITY, f64::min)
}

/// Wiener-filter precoding matrix `β Hᴴ(HHᴴ + (Mσ²/P_tx) I)⁻¹`, with `β`
/// chosen so that `E‖x‖² = P_tx` for symbols of energy `σ_s²`.
#[derive(Clone, Debug)]
pub struct WienerFilter {
    pub matrix: ComplexMatrix,
    pub beta: f64,
}

impl WienerFilter {
    pub fn new(
        h: &ComplexMatrix,
        p_tx: f64,
        noise_var: f64,
        symbol_energy: f64,
    ) -> Result<Self, PrecodeError> {
        let m = h.nrows();
        let hh = h.adjoint();
        let reg = Complex64::new(m as f64 * noise_var / p_tx, 0.0);
        let gram = h * &hh + ComplexMatrix::identity(m, m) * reg;
        let inv = gram.try_inverse().ok_or(PrecodeError::SingularChannel)?;
        let f = hh * inv;
        let energy = f.norm_squared() * symbol_energy;
        if !(energy.is_finite() && energy > 0.0) {
            return Err(PrecodeError::SingularChannel);
        }
        let beta = (p_tx / energy).sqrt();
        Ok(WienerFilter { matrix: f * Complex64::new(beta, 0.0), beta })
    }

    pub fn apply(&self, s: &[Complex64]) -> ComplexVector {
        &self.matrix * DVector::from_column_slice(s)
    }
}

pub fn wf_precode(
    h: &ComplexMatrix,
    s: &[Complex64],
    p_tx: f64,
    noise_var: f64,
    symbol_energy: f64,
) -> Result<ComplexVector, PrecodeError> {
    check_dims(h, s)?;
    Ok(WienerFilter::new(h, p_tx, noise_var, symbol_energy)?.apply(s))
}

/// Infinite-resolution CE: keeps the phase of `x`, sets every magnitude to
/// `√(P_tx/N)`.
pub fn phase_only(x: &ComplexVector, p_tx: f64) -> ComplexVector {
    let amp = (p_tx / x.len() as f64).sqrt();
    x.map(|v| {
        let phi = if v == Complex64::new(0.0, 0.0) { 0.0 } else { v.arg() };
        Complex64::from_polar(amp, phi)
    })
}

pub fn wf_ce_precode(
    h: &ComplexMatrix,
    s: &[Complex64],
    p_tx: f64,
    noise_var: f64,
    symbol_energy: f64,
) -> Result<ComplexVector, PrecodeError> {
    Ok(phase_only(&wf_precode(h, s, p_tx, noise_var, symbol_energy)?, p_tx))
}

pub fn qwf_precode(
    h: &ComplexMatrix,
    s: &[Complex64],
    p_tx: f64,
    noise_var: f64,
    symbol_energy: f64,
    q_phases: usize,
) -> Result<ComplexVector, PrecodeError> {
    let x = wf_precode(h, s, p_tx, noise_var, symbol_energy)?;
    Ok(ce_quantize(&x, q_phases, p_tx))
}
