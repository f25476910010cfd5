//! Plain-text LP dump for debugging.
//!
//! ```text
//! # lp-dump v1
//! max 1 0
//! 1 1 <= 1
//! bounds 0 1
//! bounds 0 inf
//! ```
//!
//! One `max` line with the objective, one line per row (coefficients, sense,
//! right-hand side), then one `bounds` line per variable. Infinite bounds are
//! written `inf` / `-inf`. Values use the shortest round-tripping decimal form.

use std::fmt::Write;

use nalgebra::DMatrix;

use super::{LpError, LpProblem, Sense};

const HEADER: &str = "# lp-dump v1";

impl LpProblem {
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        out.push_str("max");
        for c in self.objective() {
            write!(out, " {c}").unwrap();
        }
        out.push('\n');
        for i in 0..self.num_rows() {
            for a in self.matrix().row(i).iter() {
                write!(out, "{a} ").unwrap();
            }
            let sense = match self.senses()[i] {
                Sense::Le => "<=",
                Sense::Ge => ">=",
            };
            writeln!(out, "{sense} {}", self.rhs()[i]).unwrap();
        }
        for (l, u) in self.lower().iter().zip(self.upper()) {
            writeln!(out, "bounds {l} {u}").unwrap();
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<LpProblem, LpError> {
        let mut objective: Option<Vec<f64>> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut senses = Vec::new();
        let mut rhs = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| LpError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let mut tokens = line.split_whitespace();
            let first = tokens.next().unwrap();
            match first {
                "max" => {
                    if objective.is_some() {
                        return Err(err("duplicate objective"));
                    }
                    objective = Some(parse_numbers(tokens, line_no)?);
                }
                "bounds" => {
                    let v = parse_numbers(tokens, line_no)?;
                    if v.len() != 2 {
                        return Err(err("expected `bounds <lower> <upper>`"));
                    }
                    lower.push(v[0]);
                    upper.push(v[1]);
                }
                _ => {
                    let all: Vec<&str> = line.split_whitespace().collect();
                    if all.len() < 2 {
                        return Err(err("row needs a sense and a right-hand side"));
                    }
                    let sense = match all[all.len() - 2] {
                        "<=" => Sense::Le,
                        ">=" => Sense::Ge,
                        _ => return Err(err("row sense must be <= or >=")),
                    };
                    let coeffs = parse_numbers(all[..all.len() - 2].iter().copied(), line_no)?;
                    let b = parse_numbers(std::iter::once(all[all.len() - 1]), line_no)?;
                    rows.push(coeffs);
                    senses.push(sense);
                    rhs.push(b[0]);
                }
            }
        }

        let c = objective.ok_or(LpError::Parse {
            line: 0,
            msg: "missing objective".into(),
        })?;
        let n = c.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(LpError::DimensionMismatch(format!(
                "row {bad} has {} coefficients, objective has {n}",
                rows[bad].len()
            )));
        }
        let m = rows.len();
        let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        LpProblem::new(c, a, rhs, senses, lower, upper)
    }
}

fn parse_numbers<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<Vec<f64>, LpError> {
    tokens
        .map(|t| {
            t.parse::<f64>().map_err(|_| LpError::Parse {
                line,
                msg: format!("not a number: {t}"),
            })
        })
        .collect()
}
