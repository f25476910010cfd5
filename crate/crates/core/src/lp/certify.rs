use nalgebra::{DMatrix, DVector};

use super::{BasicVar, LpProblem, LpSolution, Sense};

/// Optimality residuals of a claimed solution, computed from the original
/// problem data and duals reconstructed from the reported basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    /// Largest violation of a constraint row.
    pub primal_infeasibility: f64,
    /// Largest violation of a variable bound.
    pub bound_violation: f64,
    /// Largest reduced cost or row dual with the wrong sign.
    pub dual_infeasibility: f64,
    /// Largest product of a dual value and the distance from its bound.
    pub complementarity: f64,
    pub passed: bool,
}

pub fn certify(problem: &LpProblem, solution: &LpSolution, tol: f64) -> CertificateReport {
    let x = &solution.x;
    let n = problem.num_vars();
    let m = problem.num_rows();
    let activity = problem.activity(x);

    let mut primal_infeasibility: f64 = 0.0;
    for i in 0..m {
        let gap = activity[i] - problem.rhs()[i];
        let violation = match problem.senses()[i] {
            Sense::Le => gap,
            Sense::Ge => -gap,
        };
        primal_infeasibility = primal_infeasibility.max(violation);
    }

    let mut bound_violation: f64 = 0.0;
    for j in 0..n {
        let v = (problem.lower()[j] - x[j]).max(x[j] - problem.upper()[j]);
        bound_violation = bound_violation.max(v);
    }

    let duals = reconstruct_duals(problem, &solution.basis);
    let (dual_infeasibility, complementarity) = match duals {
        Some(y) => dual_residuals(problem, x, &activity, &y, tol),
        None => (f64::INFINITY, f64::INFINITY),
    };

    let passed = primal_infeasibility <= tol
        && bound_violation <= tol
        && dual_infeasibility <= tol
        && complementarity <= tol;
    CertificateReport {
        primal_infeasibility,
        bound_violation,
        dual_infeasibility,
        complementarity,
        passed,
    }
}

/// Solves `Bᵀy = c_B` for the basis written in the original row orientation:
/// `A x + s = b` for `≤` rows, `A x - s = b` for `≥` rows.
fn reconstruct_duals(problem: &LpProblem, basis: &[BasicVar]) -> Option<DVector<f64>> {
    let m = problem.num_rows();
    if basis.len() != m {
        return None;
    }
    if m == 0 {
        return Some(DVector::zeros(0));
    }
    let mut b = DMatrix::zeros(m, m);
    let mut c_b = DVector::zeros(m);
    for (k, var) in basis.iter().enumerate() {
        match *var {
            BasicVar::Structural(j) => {
                b.set_column(k, &problem.matrix().column(j));
                c_b[k] = problem.objective()[j];
            }
            BasicVar::Slack(i) => b[(i, k)] = problem.senses()[i].slack_sign(),
            BasicVar::Artificial(i) => b[(i, k)] = 1.0,
        }
    }
    b.transpose().lu().solve(&c_b)
}

fn dual_residuals(
    problem: &LpProblem,
    x: &[f64],
    activity: &[f64],
    y: &DVector<f64>,
    tol: f64,
) -> (f64, f64) {
    let mut dual_inf: f64 = 0.0;
    let mut comp: f64 = 0.0;

    // Row duals of a maximization: y ≥ 0 on ≤ rows, y ≤ 0 on ≥ rows.
    for i in 0..problem.num_rows() {
        let wrong_sign = match problem.senses()[i] {
            Sense::Le => -y[i],
            Sense::Ge => y[i],
        };
        dual_inf = dual_inf.max(wrong_sign);
        comp = comp.max((y[i] * (problem.rhs()[i] - activity[i])).abs());
    }

    for j in 0..problem.num_vars() {
        let d = problem.objective()[j] - problem.matrix().column(j).dot(y);
        let (l, u) = (problem.lower()[j], problem.upper()[j]);
        let at_lower = (x[j] - l).abs() <= tol;
        let at_upper = (u - x[j]).abs() <= tol;
        let wrong = match (at_lower, at_upper) {
            (true, true) => 0.0,
            (true, false) => d,
            (false, true) => -d,
            (false, false) => d.abs(),
        };
        dual_inf = dual_inf.max(wrong);
        let dist = (x[j] - l).abs().min((u - x[j]).abs());
        if d.abs() > tol {
            comp = comp.max(d.abs() * dist);
        }
    }
    (dual_inf, comp)
}
