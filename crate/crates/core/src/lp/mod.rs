//! Linear programming with bounded variables.
//!
//! Problems are stated in inequality form
//!
//! ```text
//! maximize   cᵀx
//! subject to A x (≤ | ≥) b,   l ≤ x ≤ u
//! ```
//!
//! and solved by a two-phase bounded-variable primal simplex method with a
//! dense explicit basis inverse. Every iteration is either a pivot (basis
//! change) or a bound flip of the entering variable; both are counted and
//! priced with [`predict_ops`].

mod canonical;
mod certify;
mod dump;
mod simplex;

pub use canonical::{canonicalize, CanonicalLp};
pub use certify::{certify, CertificateReport};
pub use simplex::{solve, solve_from, PivotRule, SolveOptions, StartPoint};

use nalgebra::DMatrix;
use thiserror::Error;

/// Direction of a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `aᵢᵀx ≤ bᵢ`
    Le,
    /// `aᵢᵀx ≥ bᵢ`
    Ge,
}

impl Sense {
    pub fn flipped(self) -> Sense {
        match self {
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
        }
    }

    /// Sign of the slack column in `aᵢᵀx ± sᵢ = bᵢ`, `sᵢ ≥ 0`.
    pub fn slack_sign(self) -> f64 {
        match self {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid bounds for variable {index}: [{lower}, {upper}]")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("variable {0} has no finite bound")]
    FreeVariable(usize),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("iteration limit reached after {} iterations", .0.iterations)]
    IterationLimit(Box<LpSolution>),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("malformed LP dump at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An LP in inequality form with variable bounds; the objective is maximized.
///
/// Construction validates the shape and the bounds, so a value of this type
/// always satisfies `l ≤ u` and has at least one finite bound per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    c: Vec<f64>,
    a: DMatrix<f64>,
    b: Vec<f64>,
    senses: Vec<Sense>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        c: Vec<f64>,
        a: DMatrix<f64>,
        b: Vec<f64>,
        senses: Vec<Sense>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let n = c.len();
        let m = b.len();
        if a.nrows() != m || a.ncols() != n {
            return Err(LpError::DimensionMismatch(format!(
                "A is {}x{}, expected {}x{}",
                a.nrows(),
                a.ncols(),
                m,
                n
            )));
        }
        if senses.len() != m {
            return Err(LpError::DimensionMismatch(format!(
                "{} senses for {} rows",
                senses.len(),
                m
            )));
        }
        if lower.len() != n || upper.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "bounds have lengths {}/{}, expected {}",
                lower.len(),
                upper.len(),
                n
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("constraint matrix"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("right-hand side"));
        }
        for (j, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidBounds {
                    index: j,
                    lower: l,
                    upper: u,
                });
            }
            if l == f64::NEG_INFINITY && u == f64::INFINITY {
                return Err(LpError::FreeVariable(j));
            }
        }
        Ok(LpProblem {
            c,
            a,
            b,
            senses,
            lower,
            upper,
        })
    }

    /// Convenience constructor for problems whose rows are all `≤`.
    pub fn less_equal(
        c: Vec<f64>,
        a: DMatrix<f64>,
        b: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let senses = vec![Sense::Le; b.len()];
        LpProblem::new(c, a, b, senses, lower, upper)
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Row activities `A x`.
    pub fn activity(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_rows())
            .map(|i| self.a.row(i).iter().zip(x).map(|(a, x)| a * x).sum())
            .collect()
    }
}

/// Terminal state of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A column of the enlarged problem that is basic at termination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasicVar {
    Structural(usize),
    /// Slack or surplus of the given row.
    Slack(usize),
    /// Artificial variable of the given row; only left in the basis at zero
    /// level when the row is redundant.
    Artificial(usize),
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Simplex iterations over both phases (pivots plus bound flips).
    pub iterations: usize,
    pub pivots: usize,
    pub bound_flips: usize,
    /// Multiply-add pairs, accumulated per iteration with [`predict_ops`].
    pub op_count: u64,
    /// Number of artificial variables introduced for phase one.
    pub artificials: usize,
    pub basis: Vec<BasicVar>,
    /// Phase-two objective after every iteration, when requested.
    pub trace: Vec<f64>,
}

/// Multiply-add pairs of one simplex iteration on an `m`-row problem with
/// `n` structural and `a` artificial variables.
pub fn predict_ops(m: usize, n: usize, a: usize, pivoted: bool) -> u64 {
    let (m, n, a) = (m as u64, n as u64, a as u64);
    if pivoted {
        (m + 1) * (n + a + 1) + 2 * m
    } else {
        3 * m
    }
}
