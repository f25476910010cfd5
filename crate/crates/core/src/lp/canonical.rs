use nalgebra::DMatrix;

use super::{LpProblem, Sense};

/// Equality form `Ā x̄ = b̃`, `l̄ ≤ x̄ ≤ ū` of an [`LpProblem`].
///
/// Rows with a negative right-hand side are negated so that `b̃ ≥ 0`. Every
/// row gets one slack (`+1`) or surplus (`-1`) column, and every row whose
/// final sense is `≥` gets an artificial column, so that the columns of
/// `[A_s  I_a]` contain an `m × m` identity.
#[derive(Clone, Debug)]
pub struct CanonicalLp {
    /// `m × (n + m + a)`: structural, slack and artificial columns.
    pub a_bar: DMatrix<f64>,
    pub b_tilde: Vec<f64>,
    pub c_bar: Vec<f64>,
    pub l_bar: Vec<f64>,
    pub u_bar: Vec<f64>,
    /// Diagonal of `A_s`.
    pub slack_signs: Vec<f64>,
    /// Rows negated to make `b̃` non-negative.
    pub flipped: Vec<bool>,
    /// Row of each artificial column, in column order.
    pub artificial_rows: Vec<usize>,
    pub n: usize,
    pub m: usize,
}

impl CanonicalLp {
    pub fn num_artificials(&self) -> usize {
        self.artificial_rows.len()
    }

    /// Sense of row `i` after the sign flip.
    pub fn sense(&self, i: usize) -> Sense {
        if self.slack_signs[i] > 0.0 {
            Sense::Le
        } else {
            Sense::Ge
        }
    }
}

pub fn canonicalize(problem: &LpProblem) -> CanonicalLp {
    let n = problem.num_vars();
    let m = problem.num_rows();

    let mut flipped = vec![false; m];
    let mut b_tilde = problem.rhs().to_vec();
    let mut senses = problem.senses().to_vec();
    for i in 0..m {
        if b_tilde[i] < 0.0 {
            flipped[i] = true;
            b_tilde[i] = -b_tilde[i];
            senses[i] = senses[i].flipped();
        }
    }
    let slack_signs: Vec<f64> = senses.iter().map(|s| s.slack_sign()).collect();
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| senses[i] == Sense::Ge).collect();
    let a = artificial_rows.len();

    let mut a_bar = DMatrix::zeros(m, n + m + a);
    for i in 0..m {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            a_bar[(i, j)] = sign * problem.matrix()[(i, j)];
        }
        a_bar[(i, n + i)] = slack_signs[i];
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        a_bar[(i, n + m + k)] = 1.0;
    }

    let mut c_bar = problem.objective().to_vec();
    c_bar.resize(n + m + a, 0.0);
    let mut l_bar = problem.lower().to_vec();
    l_bar.resize(n + m + a, 0.0);
    let mut u_bar = problem.upper().to_vec();
    u_bar.resize(n + m + a, f64::INFINITY);

    CanonicalLp {
        a_bar,
        b_tilde,
        c_bar,
        l_bar,
        u_bar,
        slack_signs,
        flipped,
        artificial_rows,
        n,
        m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(a: DMatrix<f64>, b: Vec<f64>, senses: Vec<Sense>) -> LpProblem {
        let n = a.ncols();
        LpProblem::new(vec![1.0; n], a, b, senses, vec![0.0; n], vec![1.0; n]).unwrap()
    }

    #[test]
    fn nonnegative_le_rows_need_no_artificials() {
        let p = unit_box(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), vec![1.0], vec![Sense::Le]);
        let c = canonicalize(&p);
        assert_eq!(c.num_artificials(), 0);
        assert_eq!(c.slack_signs, vec![1.0]);
        assert_eq!(c.a_bar.ncols(), 3);
        assert_eq!(c.a_bar[(0, 2)], 1.0);
    }

    #[test]
    fn negative_rhs_row_is_flipped() {
        // x1 >= -2 becomes -x1 <= 2
        let p = unit_box(DMatrix::from_row_slice(1, 1, &[1.0]), vec![-2.0], vec![Sense::Ge]);
        let c = canonicalize(&p);
        assert!(c.flipped[0]);
        assert_eq!(c.b_tilde, vec![2.0]);
        assert_eq!(c.a_bar[(0, 0)], -1.0);
        assert_eq!(c.slack_signs, vec![1.0]);
        assert_eq!(c.sense(0), Sense::Le);
        assert_eq!(c.num_artificials(), 0);
    }

    #[test]
    fn ge_rows_get_artificials_and_identity_exists() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 1.0, 3.0, 0.5]);
        let p = unit_box(a, vec![1.0, -1.0, 2.0], vec![Sense::Ge, Sense::Le, Sense::Le]);
        let c = canonicalize(&p);
        // row 0: >= stays >=; row 1: <= with b<0 flips to >=; row 2: <=
        assert_eq!(c.slack_signs, vec![-1.0, -1.0, 1.0]);
        assert_eq!(c.artificial_rows, vec![0, 1]);
        assert_eq!(c.num_artificials(), c.slack_signs.iter().filter(|s| **s < 0.0).count());
        assert!(c.b_tilde.iter().all(|b| *b >= 0.0));
        // identity: artificial columns for rows 0,1 and the slack for row 2
        let cols = [c.n + c.m, c.n + c.m + 1, c.n + 2];
        for (row, &col) in cols.iter().enumerate() {
            for i in 0..c.m {
                let expect = if i == row { 1.0 } else { 0.0 };
                assert_eq!(c.a_bar[(i, col)], expect);
            }
        }
        assert_eq!(c.l_bar.len(), c.n + c.m + 2);
        assert!(c.u_bar[c.n..].iter().all(|u| u.is_infinite()));
    }
}
