// Copyright 2026 The fenchelkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `min {(c|x) : x ≥ 0, Ax ≤ b}` with primal–dual certificates.

use serde::{Deserialize, Serialize};

use super::simplex::{Outcome, PivotRule, Tableau};
use crate::linalg::{dot, mat_t_vec, mat_vec};
use crate::{Error, ExtReal, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Primal and dual solutions. Values are `+∞` for infeasible and `-∞` for
/// unbounded problems; `x` and `y` are only meaningful when optimal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `((Ax - b)·y, (Aᵀy + c)·x)`.
    pub slack_residuals: (f64, f64),
    pub pivots: usize,
}

impl LpProblem {
    pub fn new(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let p = LpProblem { c, a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.b.len(), self.c.len());
        if m == 0 || n == 0 {
            return Err(Error::dim("linear programs need at least one variable and one row"));
        }
        if self.a.len() != m || self.a.iter().any(|r| r.len() != n) {
            return Err(Error::dim(format!("A must be {m}x{n}")));
        }
        if self.c.iter().chain(&self.b).chain(self.a.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("linear program data must be finite"));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }
}

/// Solves the program by two-phase simplex with Bland's rule. The dual
/// vector is read from the reduced costs of the slack columns.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let (m, n) = (p.rows(), p.cols());
    let flipped: Vec<usize> = (0..m).filter(|&i| p.b[i] < 0.0).collect();
    let width = n + m + flipped.len();

    // columns: x (n), slacks (m), one artificial per row with b_i < 0
    let mut rows = vec![vec![0.0; width]; m];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if p.b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            rows[i][j] = sign * p.a[i][j];
        }
        rows[i][n + i] = sign;
        rhs[i] = sign * p.b[i];
        if sign < 0.0 {
            rows[i][n + m + art] = 1.0;
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut t = Tableau::new(&rows, &rhs, basis);

    if !flipped.is_empty() {
        let mut cost = vec![0.0; width];
        for c in cost.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        t.set_objective(&cost);
        t.optimize(PivotRule::Bland)?;
        if t.objective_value() > 1e-9 {
            return Ok(unsolved(LpStatus::Infeasible, n, m, t.pivots));
        }
        // drive zero-level artificials out of the basis
        for r in 0..m {
            if t.basis()[r] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| t.at(r, j).abs() > 1e-9) {
                    t.pivot(r, j);
                }
            }
        }
        for j in n + m..width {
            t.forbid(j);
        }
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&p.c);
    t.set_objective(&cost);
    if let Outcome::Unbounded(_) = t.optimize(PivotRule::Bland)? {
        return Ok(unsolved(LpStatus::Unbounded, n, m, t.pivots));
    }

    let z = t.solution();
    let x: Vec<f64> = z[..n].to_vec();
    let y: Vec<f64> = (0..m).map(|i| t.reduced_cost(n + i)).collect();
    let primal_value = dot(&p.c, &x);
    let dual_value = -dot(&p.b, &y);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        slack_residuals: complementarity_products(p, &x, &y),
        x,
        y,
        primal_value,
        dual_value,
        pivots: t.pivots,
    })
}

fn unsolved(status: LpStatus, n: usize, m: usize, pivots: usize) -> LpSolution {
    let v = if status == LpStatus::Infeasible { f64::INFINITY } else { f64::NEG_INFINITY };
    LpSolution {
        status,
        x: vec![0.0; n],
        y: vec![0.0; m],
        primal_value: v,
        dual_value: v,
        slack_residuals: (0.0, 0.0),
        pivots,
    }
}

fn complementarity_products(p: &LpProblem, x: &[f64], y: &[f64]) -> (f64, f64) {
    let ax = mat_vec(&p.a, x);
    let aty = mat_t_vec(&p.a, y);
    let r1: f64 = ax.iter().zip(&p.b).zip(y).map(|((u, b), v)| (u - b) * v).sum();
    let r2: f64 = aty.iter().zip(&p.c).zip(x).map(|((u, c), v)| (u + c) * v).sum();
    (r1, r2)
}

/// `max {-b·y : y ≥ 0, Aᵀy + c ≥ 0}` written as the minimization
/// `min {(b|y) : y ≥ 0, -Aᵀy ≤ c}`; its optimal value is minus the dual
/// value. Applying it twice gives back `p`.
pub fn dual_of(p: &LpProblem) -> LpProblem {
    let (m, n) = (p.rows(), p.cols());
    let mut a = vec![vec![0.0; m]; n];
    for (i, row) in p.a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[j][i] = -v;
        }
    }
    LpProblem { c: p.b.clone(), a, b: p.c.clone() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityReport {
    pub passed: bool,
    /// `(Ax - b)·y`.
    pub primal_slack: f64,
    /// `(Aᵀy + c)·x`.
    pub dual_slack: f64,
    /// `c·x + b·y`, zero exactly when both products vanish for feasible pairs.
    pub value_gap: f64,
    /// Largest violation of `x ≥ 0`, `y ≥ 0`, `Ax ≤ b`, `Aᵀy + c ≥ 0`.
    pub infeasibility: f64,
}

pub fn verify_complementarity(p: &LpProblem, x: &[f64], y: &[f64], tol: f64) -> Result<ComplementarityReport> {
    p.validate()?;
    if x.len() != p.cols() || y.len() != p.rows() {
        return Err(Error::dim("x and y must match the columns and rows of A"));
    }
    let (primal_slack, dual_slack) = complementarity_products(p, x, y);
    let ax = mat_vec(&p.a, x);
    let aty = mat_t_vec(&p.a, y);
    let mut infeasibility: f64 = 0.0;
    for v in x.iter().chain(y) {
        infeasibility = infeasibility.max(-v);
    }
    for (u, b) in ax.iter().zip(&p.b) {
        infeasibility = infeasibility.max(u - b);
    }
    for (u, c) in aty.iter().zip(&p.c) {
        infeasibility = infeasibility.max(-(u + c));
    }
    let value_gap = dot(&p.c, x) + dot(&p.b, y);
    Ok(ComplementarityReport {
        passed: primal_slack.abs() <= tol && dual_slack.abs() <= tol && infeasibility <= tol,
        primal_slack,
        dual_slack,
        value_gap,
        infeasibility,
    })
}

/// `h(q) = inf {(c|x) : x ≥ 0, Ax + q ≤ b}`; `+∞` when infeasible.
pub fn value_function(p: &LpProblem, perturbation: &[f64]) -> Result<ExtReal> {
    if perturbation.len() != p.rows() {
        return Err(Error::dim("perturbation must have one entry per row"));
    }
    let shifted = LpProblem {
        c: p.c.clone(),
        a: p.a.clone(),
        b: p.b.iter().zip(perturbation).map(|(b, q)| b - q).collect(),
    };
    let s = solve_lp(&shifted)?;
    match s.status {
        LpStatus::Optimal => Ok(ExtReal::finite(s.primal_value)),
        LpStatus::Infeasible => Ok(ExtReal::PosInf),
        LpStatus::Unbounded => Err(Error::invalid("value function is -inf: the perturbed program is unbounded")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], a: &[&[f64]], b: &[f64]) -> LpProblem {
        LpProblem::new(c.to_vec(), a.iter().map(|r| r.to_vec()).collect(), b.to_vec()).unwrap()
    }

    #[test]
    fn covering_example() {
        let p = lp(&[1.0, 1.0], &[&[-1.0, -1.0]], &[-1.0]);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal_value - 1.0).abs() < 1e-12);
        assert!((s.dual_value - 1.0).abs() < 1e-12);
        assert!((s.y[0] - 1.0).abs() < 1e-12);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_infeasible() {
        assert_eq!(solve_lp(&lp(&[-1.0], &[&[0.0]], &[1.0])).unwrap().status, LpStatus::Unbounded);
        assert_eq!(solve_lp(&lp(&[0.0], &[&[1.0]], &[-1.0])).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn dual_is_an_involution() {
        let p = lp(&[1.0, 2.0], &[&[-1.0, 0.5], &[3.0, -1.0]], &[4.0, -2.0]);
        assert_eq!(dual_of(&dual_of(&p)), p);
    }

    #[test]
    fn value_function_shifts_the_right_hand_side() {
        let p = lp(&[1.0, 1.0], &[&[-1.0, -1.0]], &[-1.0]);
        assert!((value_function(&p, &[0.5]).unwrap().to_f64() - 1.5).abs() < 1e-12);
        let q = lp(&[1.0], &[&[1.0]], &[1.0]);
        assert_eq!(value_function(&q, &[2.0]).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn interior_point_breaks_complementarity() {
        let p = lp(&[1.0, 1.0], &[&[-1.0, -1.0]], &[-1.0]);
        let r = verify_complementarity(&p, &[1.0, 1.0], &[1.0], 1e-9).unwrap();
        assert!(!r.passed && r.primal_slack.abs() > 0.5);
    }
}
