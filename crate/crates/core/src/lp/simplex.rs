use nalgebra::{DMatrix, DVector};

use super::canonical::canonicalize;
use super::{predict_ops, BasicVar, LpError, LpProblem, LpSolution, LpStatus};

/// Entering-variable selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    /// Largest reduced cost, with a fall back to Bland's rule after a run of
    /// degenerate pivots.
    Dantzig,
    /// Smallest eligible index throughout.
    Bland,
}

/// Where nonbasic structural variables start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartPoint {
    /// At the lower bound when it is finite, otherwise at the upper bound.
    Bounds,
    /// At the point of the bound box nearest the origin. Variables whose
    /// box strictly contains zero start between their bounds and are moved
    /// to a bound the first time they enter.
    Origin,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Primal feasibility tolerance.
    pub feas_tol: f64,
    /// Reduced-cost tolerance.
    pub opt_tol: f64,
    /// Iteration cap over both phases; `None` means `50·(m + n)`.
    pub max_iters: Option<usize>,
    pub pivot_rule: PivotRule,
    /// Consecutive degenerate pivots before Dantzig pricing gives way to
    /// Bland's rule.
    pub bland_after: usize,
    /// Pivots between recomputations of the basis inverse.
    pub refactor_every: usize,
    pub start: StartPoint,
    /// Record the phase-two objective after every iteration.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            max_iters: None,
            pivot_rule: PivotRule::Dantzig,
            bland_after: 50,
            refactor_every: 100,
            start: StartPoint::Bounds,
            trace: false,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic strictly inside its bounds (only from [`StartPoint::Origin`]).
    Between,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Structural(usize),
    Slack(usize),
    Artificial(usize),
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Engine<'o> {
    opts: &'o SolveOptions,
    m: usize,
    n: usize,
    artificials: usize,
    cols: DMatrix<f64>,
    /// Nonzeros of each column of `cols`.
    sparse: Vec<Vec<(usize, f64)>>,
    rhs: DVector<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    kind: Vec<Column>,
    state: Vec<State>,
    x: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    iterations: usize,
    pivots: usize,
    flips: usize,
    ops: u64,
    max_iters: usize,
    since_refactor: usize,
    degenerate_run: usize,
    trace: Vec<f64>,
}

/// Solves `problem` (maximization) with the bounded two-phase simplex method.
pub fn solve(problem: &LpProblem, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    solve_from(problem, opts, None)
}

/// As [`solve`], with every structural variable starting at the bound
/// nearest `hint[j]` instead of the point given by `opts.start`.
pub fn solve_from(
    problem: &LpProblem,
    opts: &SolveOptions,
    hint: Option<&[f64]>,
) -> Result<LpSolution, LpError> {
    if let Some(h) = hint {
        if h.len() != problem.num_vars() {
            return Err(LpError::DimensionMismatch(format!(
                "start hint has {} entries for {} variables",
                h.len(),
                problem.num_vars()
            )));
        }
    }
    let mut engine = Engine::new(problem, opts, hint);

    if engine.artificials > 0 {
        for (j, kind) in engine.kind.iter().enumerate() {
            engine.cost[j] = if matches!(kind, Column::Artificial(_)) { -1.0 } else { 0.0 };
        }
        match engine.run(false)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => {
                return Err(LpError::NumericalBreakdown(
                    "phase one reported an unbounded ray".into(),
                ))
            }
        }
        engine.refactor()?;
        let infeasibility: f64 = engine
            .kind
            .iter()
            .zip(&engine.x)
            .filter(|(k, _)| matches!(k, Column::Artificial(_)))
            .map(|(_, v)| v.max(0.0))
            .sum();
        let scale = 1.0 + engine.rhs.amax();
        if infeasibility > opts.feas_tol * scale {
            return Ok(engine.finish(LpStatus::Infeasible));
        }
        // Artificials are pinned at zero for phase two; basic ones leave the
        // basis as soon as a ratio test touches them.
        for j in 0..engine.kind.len() {
            if matches!(engine.kind[j], Column::Artificial(_)) {
                engine.upper[j] = 0.0;
                if engine.state[j] != State::Basic {
                    engine.state[j] = State::Lower;
                    engine.x[j] = 0.0;
                }
            }
        }
    }

    for (j, kind) in engine.kind.iter().enumerate() {
        engine.cost[j] = match kind {
            Column::Structural(k) => problem.objective()[*k],
            _ => 0.0,
        };
    }
    engine.degenerate_run = 0;
    let end = engine.run(true)?;
    engine.refactor()?;
    Ok(engine.finish(match end {
        PhaseEnd::Optimal => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
    }))
}

impl<'o> Engine<'o> {
    fn new(problem: &LpProblem, opts: &'o SolveOptions, hint: Option<&[f64]>) -> Self {
        let canon = canonicalize(problem);
        let (m, n) = (canon.m, canon.n);

        let mut x = vec![0.0; n + m];
        let mut state = vec![State::Lower; n + m];
        for j in 0..n {
            let (l, u) = (canon.l_bar[j], canon.u_bar[j]);
            if let Some(h) = hint {
                let nearer_upper = u.is_finite() && (l.is_infinite() || (h[j] - u).abs() < (h[j] - l).abs());
                (x[j], state[j]) = if nearer_upper { (u, State::Upper) } else { (l, State::Lower) };
                continue;
            }
            let (value, st) = match opts.start {
                StartPoint::Bounds if l.is_finite() => (l, State::Lower),
                StartPoint::Bounds => (u, State::Upper),
                StartPoint::Origin if l >= 0.0 => (l, State::Lower),
                StartPoint::Origin if u <= 0.0 => (u, State::Upper),
                StartPoint::Origin => (0.0, State::Between),
            };
            x[j] = value;
            state[j] = st;
        }

        // Residual of each row with the structural part fixed at the start
        // point decides whether its slack can be basic or an artificial is
        // needed.
        let mut residual = canon.b_tilde.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for i in 0..m {
                    residual[i] -= canon.a_bar[(i, j)] * x[j];
                }
            }
        }

        let mut basis = vec![0; m];
        let mut art_coef = Vec::new();
        let mut binv_diag = vec![1.0; m];
        for i in 0..m {
            let slack_value = canon.slack_signs[i] * residual[i];
            if slack_value >= 0.0 {
                basis[i] = n + i;
                state[n + i] = State::Basic;
                x[n + i] = slack_value;
                binv_diag[i] = canon.slack_signs[i];
            } else {
                let coef = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                art_coef.push((i, coef));
                basis[i] = n + m + art_coef.len() - 1;
                binv_diag[i] = coef;
            }
        }
        let a = art_coef.len();

        let mut cols = DMatrix::zeros(m, n + m + a);
        cols.columns_mut(0, n + m)
            .copy_from(&canon.a_bar.columns(0, n + m));
        let mut kind: Vec<Column> = (0..n)
            .map(Column::Structural)
            .chain((0..m).map(Column::Slack))
            .collect();
        let mut lower = canon.l_bar[..n + m].to_vec();
        let mut upper = canon.u_bar[..n + m].to_vec();
        for (k, &(i, coef)) in art_coef.iter().enumerate() {
            cols[(i, n + m + k)] = coef;
            kind.push(Column::Artificial(i));
            lower.push(0.0);
            upper.push(f64::INFINITY);
            state.push(State::Basic);
            x.push(residual[i].abs());
        }

        let binv = DMatrix::from_diagonal(&DVector::from_vec(binv_diag));
        let sparse = (0..cols.ncols())
            .map(|j| {
                cols.column(j)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (i, *v))
                    .collect()
            })
            .collect();
        let max_iters = opts.max_iters.unwrap_or(50 * (m + n).max(1));

        Engine {
            opts,
            m,
            n,
            artificials: a,
            cols,
            sparse,
            rhs: DVector::from_vec(canon.b_tilde),
            lower,
            upper,
            kind,
            state,
            x,
            cost: vec![0.0; n + m + a],
            basis,
            binv,
            iterations: 0,
            pivots: 0,
            flips: 0,
            ops: 0,
            max_iters,
            since_refactor: 0,
            degenerate_run: 0,
            trace: Vec::new(),
        }
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn run(&mut self, phase_two: bool) -> Result<PhaseEnd, LpError> {
        let total = self.kind.len();
        let mut d = vec![0.0; total];
        loop {
            if self.iterations >= self.max_iters {
                let status = if phase_two {
                    LpStatus::Optimal
                } else {
                    LpStatus::Infeasible
                };
                let partial = self.finish(status);
                return Err(LpError::IterationLimit(Box::new(partial)));
            }

            // Simplex multipliers y = B⁻ᵀ c_B and reduced costs d = c - Aᵀy.
            let c_b = DVector::from_iterator(self.m, self.basis.iter().map(|&j| self.cost[j]));
            let y = self.binv.tr_mul(&c_b);
            let bland = self.opts.pivot_rule == PivotRule::Bland
                || self.degenerate_run >= self.opts.bland_after;

            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..total {
                let st = self.state[j];
                if st == State::Basic || self.upper[j] <= self.lower[j] {
                    continue;
                }
                d[j] = self.cost[j] - self.sparse[j].iter().map(|&(i, v)| v * y[i]).sum::<f64>();
                let dir = match st {
                    State::Lower if d[j] > self.opts.opt_tol => 1.0,
                    State::Upper if d[j] < -self.opts.opt_tol => -1.0,
                    State::Between if d[j].abs() > self.opts.opt_tol => d[j].signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d[j].abs() > best {
                    best = d[j].abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let alpha = self.binv_times(q);

            // Ratio test: basic variable i moves at rate -dir·αᵢ.
            let mut step = f64::INFINITY;
            for i in 0..self.m {
                if let Some(t) = self.row_limit(i, dir * alpha[i]) {
                    step = step.min(t);
                }
            }
            let mut leave: Option<usize> = None;
            if step.is_finite() {
                let slack = DEGENERATE_STEP.max(step * 1e-12);
                let mut best_pivot = 0.0;
                for i in 0..self.m {
                    let Some(t) = self.row_limit(i, dir * alpha[i]) else {
                        continue;
                    };
                    if t > step + slack {
                        continue;
                    }
                    let better = match leave {
                        None => true,
                        Some(r) if bland => self.basis[i] < self.basis[r],
                        Some(_) => alpha[i].abs() > best_pivot,
                    };
                    if better {
                        leave = Some(i);
                        best_pivot = alpha[i].abs();
                    }
                }
            }

            let own = if dir > 0.0 {
                self.upper[q] - self.x[q]
            } else {
                self.x[q] - self.lower[q]
            };

            if own.is_infinite() && step.is_infinite() {
                return Ok(PhaseEnd::Unbounded);
            }

            let pivoted = leave.is_some() && step < own;
            let t = if pivoted { step } else { own };

            self.x[q] += dir * t;
            for i in 0..self.m {
                let j = self.basis[i];
                self.x[j] -= dir * t * alpha[i];
            }

            if pivoted {
                let r = leave.unwrap();
                let out = self.basis[r];
                let falling = dir * alpha[r] > 0.0;
                if falling {
                    self.x[out] = self.lower[out];
                    self.state[out] = State::Lower;
                } else {
                    self.x[out] = self.upper[out];
                    self.state[out] = State::Upper;
                }
                self.state[q] = State::Basic;
                self.basis[r] = q;
                self.update_inverse(r, &alpha);
                self.pivots += 1;
                self.since_refactor += 1;
                if self.since_refactor >= self.opts.refactor_every {
                    self.refactor()?;
                }
            } else {
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                self.flips += 1;
            }

            if t <= DEGENERATE_STEP {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            self.iterations += 1;
            self.ops += predict_ops(self.m, self.n, self.artificials, pivoted);
            if phase_two && self.opts.trace {
                self.trace.push(self.objective());
            }
        }
    }

    /// Step length at which basic variable `i` hits a bound when it changes
    /// at rate `-rate` per unit step, or `None` if it never does.
    fn row_limit(&self, i: usize, rate: f64) -> Option<f64> {
        if rate.abs() <= PIVOT_TOL {
            return None;
        }
        let j = self.basis[i];
        let t = if rate > 0.0 {
            // decreasing
            if self.lower[j].is_infinite() {
                return None;
            }
            (self.x[j] - self.lower[j]) / rate
        } else {
            if self.upper[j].is_infinite() {
                return None;
            }
            (self.upper[j] - self.x[j]) / -rate
        };
        Some(t.max(0.0))
    }

    fn update_inverse(&mut self, r: usize, alpha: &DVector<f64>) {
        let pivot = alpha[r];
        for k in 0..self.m {
            let mut col = self.binv.column_mut(k);
            let scaled = col[r] / pivot;
            if scaled != 0.0 {
                col.axpy(-scaled, alpha, 1.0);
            }
            col[r] = scaled;
        }
    }

    /// `B⁻¹ a_q` from the sparse column.
    fn binv_times(&self, q: usize) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for &(i, v) in &self.sparse[q] {
            out.axpy(v, &self.binv.column(i), 1.0);
        }
        out
    }

    /// Recomputes the basis inverse from scratch and the basic values from
    /// the nonbasic ones.
    ///
    /// Basic slack and artificial columns are signed unit vectors. With the
    /// rows they cover split off, only the square block of the remaining
    /// basic columns on the remaining rows needs a dense inverse.
    fn refactor(&mut self) -> Result<(), LpError> {
        self.since_refactor = 0;
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        let mut unit_at: Vec<Option<usize>> = vec![None; m];
        let mut dense = Vec::new();
        for (k, &j) in self.basis.iter().enumerate() {
            match self.kind[j] {
                Column::Slack(i) | Column::Artificial(i) if unit_at[i].is_none() => {
                    unit_at[i] = Some(k)
                }
                _ => dense.push(k),
            }
        }
        let free_rows: Vec<usize> = (0..m).filter(|&i| unit_at[i].is_none()).collect();
        let singular = || LpError::NumericalBreakdown("singular basis".into());

        if free_rows.len() != dense.len() {
            let mut b = DMatrix::zeros(m, m);
            for (k, &j) in self.basis.iter().enumerate() {
                b.set_column(k, &self.cols.column(j));
            }
            self.binv = b.try_inverse().ok_or_else(singular)?;
        } else {
            let r = dense.len();
            let mut binv = DMatrix::zeros(m, m);
            let inner = if r > 0 {
                let block = DMatrix::from_fn(r, r, |a, b| {
                    self.cols[(free_rows[a], self.basis[dense[b]])]
                });
                block.try_inverse().ok_or_else(singular)?
            } else {
                DMatrix::zeros(0, 0)
            };
            for a in 0..r {
                for b in 0..r {
                    binv[(dense[a], free_rows[b])] = inner[(a, b)];
                }
            }
            for i in 0..m {
                let Some(k) = unit_at[i] else { continue };
                let sign = self.cols[(i, self.basis[k])];
                binv[(k, i)] = 1.0 / sign;
                for b in 0..r {
                    let mut acc = 0.0;
                    for a in 0..r {
                        acc += self.cols[(i, self.basis[dense[a]])] * inner[(a, b)];
                    }
                    binv[(k, free_rows[b])] = -acc / sign;
                }
            }
            self.binv = binv;
        }

        let mut rhs = self.rhs.clone();
        for j in 0..self.kind.len() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(i, v) in &self.sparse[j] {
                    rhs[i] -= v * self.x[j];
                }
            }
        }
        let xb = &self.binv * rhs;
        for (k, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[k];
        }
        Ok(())
    }

    fn finish(&self, status: LpStatus) -> LpSolution {
        let x = self.x[..self.n].to_vec();
        let objective = self
            .kind
            .iter()
            .zip(&self.x)
            .zip(&self.cost)
            .filter(|((k, _), _)| matches!(k, Column::Structural(_)))
            .map(|((_, x), c)| c * x)
            .sum();
        let basis = self
            .basis
            .iter()
            .map(|&j| match self.kind[j] {
                Column::Structural(k) => BasicVar::Structural(k),
                Column::Slack(i) => BasicVar::Slack(i),
                Column::Artificial(i) => BasicVar::Artificial(i),
            })
            .collect();
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
            pivots: self.pivots,
            bound_flips: self.flips,
            op_count: self.ops,
            artificials: self.artificials,
            basis,
            trace: self.trace.clone(),
        }
    }
}
