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

//! Dense tableau simplex for `min c·z` subject to equality rows, `z ≥ 0`.
//!
//! The tableau stores the current canonical form `B⁻¹[A | b]` and the
//! reduced-cost row. Callers set up a starting basis (slacks, artificials,
//! or any set of columns that is then pivoted into canonical form).

use crate::{Error, Result};

pub(crate) const PIVOT_EPS: f64 = 1e-10;
pub(crate) const ITERATION_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Most negative reduced cost, falling back to Bland for good after a
    /// run of degenerate pivots.
    Dantzig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    /// Entering column with no positive entry: the objective is unbounded.
    Unbounded(usize),
}

const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Debug)]
pub(crate) struct Tableau {
    m: usize,
    n: usize,
    /// `m` rows of `n` coefficients followed by the right-hand side.
    a: Vec<f64>,
    /// Reduced costs, then minus the current objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    allowed: Vec<bool>,
    pub pivots: usize,
}

impl Tableau {
    /// `rows[i] · z = rhs[i]` with `rhs ≥ 0`; `basis[i]` must be a unit
    /// column for row `i`.
    pub fn new(rows: &[Vec<f64>], rhs: &[f64], basis: Vec<usize>) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut a = Vec::with_capacity(m * (n + 1));
        for (row, b) in rows.iter().zip(rhs) {
            a.extend_from_slice(row);
            a.push(*b);
        }
        Tableau { m, n, a, obj: vec![0.0; n + 1], basis, allowed: vec![true; n], pivots: 0 }
    }

    /// Builds the canonical form for an arbitrary nonsingular set of basis
    /// columns by Gauss–Jordan elimination with partial pivoting.
    pub fn with_basis_columns(rows: &[Vec<f64>], rhs: &[f64], columns: &[usize]) -> Result<Self> {
        let mut t = Tableau::new(rows, rhs, vec![usize::MAX; rows.len()]);
        let mut assigned = vec![false; t.m];
        for &j in columns {
            let mut best: Option<(usize, f64)> = None;
            for r in (0..t.m).filter(|&r| !assigned[r]) {
                let v = t.at(r, j).abs();
                if v > PIVOT_EPS && best.is_none_or(|(_, b)| v > b) {
                    best = Some((r, v));
                }
            }
            let (r, _) = best.ok_or_else(|| Error::invalid("starting basis is singular"))?;
            assigned[r] = true;
            t.pivot(r, j);
        }
        t.pivots = 0;
        Ok(t)
    }

    #[inline]
    pub fn at(&self, r: usize, j: usize) -> f64 {
        self.a[r * (self.n + 1) + j]
    }

    pub fn rhs(&self, r: usize) -> f64 {
        self.a[r * (self.n + 1) + self.n]
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn reduced_cost(&self, j: usize) -> f64 {
        self.obj[j]
    }

    pub fn forbid(&mut self, j: usize) {
        self.allowed[j] = false;
    }

    /// Primal values of all columns.
    pub fn solution(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        for (r, &j) in self.basis.iter().enumerate() {
            z[j] = self.rhs(r);
        }
        z
    }

    /// Installs the cost vector and prices out the basic columns.
    pub fn set_objective(&mut self, cost: &[f64]) {
        let w = self.n + 1;
        self.obj[..self.n].copy_from_slice(cost);
        self.obj[self.n] = 0.0;
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * w..(r + 1) * w];
                for (o, v) in self.obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
    }

    pub fn objective_value(&self) -> f64 {
        -self.obj[self.n]
    }

    pub fn pivot(&mut self, r: usize, j: usize) {
        let w = self.n + 1;
        let p = self.at(r, j);
        {
            let row = &mut self.a[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[j] = 1.0;
        }
        let pivot_row: Vec<f64> = self.a[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * w + j];
            if f != 0.0 {
                let row = &mut self.a[i * w..(i + 1) * w];
                for (v, q) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * q;
                }
                row[j] = 0.0;
            }
        }
        let f = self.obj[j];
        if f != 0.0 {
            for (v, q) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * q;
            }
            self.obj[j] = 0.0;
        }
        self.basis[r] = j;
        self.pivots += 1;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            let d = self.obj[j];
            if !self.allowed[j] || d >= -PIVOT_EPS {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, j: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.m {
            let v = self.at(r, j);
            if v <= PIVOT_EPS {
                continue;
            }
            let ratio = self.rhs(r).max(0.0) / v;
            best = match best {
                None => Some((r, ratio)),
                Some((b, q)) => {
                    let tie = (ratio - q).abs() <= 1e-12 * (1.0 + q.abs());
                    if (tie && self.basis[r] < self.basis[b]) || (!tie && ratio < q) {
                        Some((r, ratio))
                    } else {
                        Some((b, q))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Runs simplex iterations until optimality or unboundedness.
    pub fn optimize(&mut self, rule: PivotRule) -> Result<Outcome> {
        let mut bland = rule == PivotRule::Bland;
        let mut degenerate = 0;
        loop {
            let Some(j) = self.entering(bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(r) = self.leaving(j) else {
                return Ok(Outcome::Unbounded(j));
            };
            if self.pivots >= ITERATION_CAP {
                return Err(Error::PivotLimit(self.pivots));
            }
            if self.rhs(r).abs() <= PIVOT_EPS {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_equality_program() {
        // min -x - y  s.t. x + s1 = 1, y + s2 = 2
        let rows = vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 1.0]];
        let mut t = Tableau::new(&rows, &[1.0, 2.0], vec![2, 3]);
        t.set_objective(&[-1.0, -1.0, 0.0, 0.0]);
        assert_eq!(t.optimize(PivotRule::Bland).unwrap(), Outcome::Optimal);
        assert_eq!(t.objective_value(), -3.0);
        assert_eq!(&t.solution()[..2], &[1.0, 2.0]);
    }

    #[test]
    fn unbounded_column_is_reported() {
        let rows = vec![vec![-1.0, 1.0]];
        let mut t = Tableau::new(&rows, &[1.0], vec![1]);
        t.set_objective(&[-1.0, 0.0]);
        assert_eq!(t.optimize(PivotRule::Dantzig).unwrap(), Outcome::Unbounded(0));
    }

    #[test]
    fn arbitrary_basis_is_canonicalized() {
        let rows = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let t = Tableau::with_basis_columns(&rows, &[3.0, 1.0], &[0, 1]).unwrap();
        let z = t.solution();
        assert!((z[0] - 2.0).abs() < 1e-15 && (z[1] - 1.0).abs() < 1e-15);
    }
}
