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

//! The transportation LP, warm-started from the northwest-corner rule.

use serde::{Deserialize, Serialize};

use super::CostMatrix;
use crate::programs::simplex::{Outcome, PivotRule, Tableau};
use crate::{Error, Result};

/// Mass tolerance between the two marginals.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub gamma: Vec<Vec<f64>>,
    /// `max_i |Σ_j γ_ij - a_i|`.
    pub row_residual: f64,
    /// `max_j |Σ_i γ_ij - b_j|`.
    pub col_residual: f64,
    pub value: f64,
    /// Simplex multipliers `(φ, ψ)` of the final basis, `φ + ψ = c` on it,
    /// normalized by `φ_0 = 0`.
    pub lp_potentials: Option<(Vec<f64>, Vec<f64>)>,
}

/// Northwest-corner basic cells: a spanning tree of the bipartite graph
/// with `n + m - 1` cells.
fn northwest_corner(a: &[f64], b: &[f64]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    let mut cells = Vec::with_capacity(n + m - 1);
    loop {
        let q = ra[i].min(rb[j]);
        ra[i] -= q;
        rb[j] -= q;
        cells.push((i, j));
        if i + 1 == n && j + 1 == m {
            break;
        }
        if j + 1 == m || (i + 1 < n && ra[i] <= rb[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

/// `min Σ c_ij γ_ij` over `γ ≥ 0` with row sums `a` and column sums `b`.
pub fn transport_lp(a: &[f64], b: &[f64], cost: &CostMatrix) -> Result<TransportPlan> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 || cost.rows() != n || cost.cols() != m {
        return Err(Error::dim(format!("cost is {}x{}, marginals have {n} and {m} atoms", cost.rows(), cost.cols())));
    }
    if a.iter().chain(b).any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("marginal weights must be finite and nonnegative"));
    }
    let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
    if (sa - sb).abs() > MASS_TOL * sa.max(sb).max(1.0) {
        return Err(Error::MarginalMismatch(sa, sb));
    }

    // rows: one per source, then one per target except the last
    let width = n * m;
    let mut rows = vec![vec![0.0; width]; n + m - 1];
    for i in 0..n {
        for j in 0..m {
            rows[i][i * m + j] = 1.0;
            if j + 1 < m {
                rows[n + j][i * m + j] = 1.0;
            }
        }
    }
    let rhs: Vec<f64> = a.iter().chain(&b[..m - 1]).copied().collect();
    let start: Vec<usize> = northwest_corner(a, b).into_iter().map(|(i, j)| i * m + j).collect();
    let mut t = Tableau::with_basis_columns(&rows, &rhs, &start)?;
    let flat: Vec<f64> = cost.entries().iter().flatten().copied().collect();
    t.set_objective(&flat);
    if let Outcome::Unbounded(_) = t.optimize(PivotRule::Dantzig)? {
        unreachable!("transportation problems are bounded");
    }

    let z = t.solution();
    let gamma: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| z[i * m + j].max(0.0)).collect()).collect();
    let basis: Vec<(usize, usize)> = t.basis().iter().map(|&k| (k / m, k % m)).collect();
    let potentials = tree_potentials(cost, &basis, n, m);
    Ok(finish(gamma, a, b, cost, potentials))
}

pub(crate) fn finish(
    gamma: Vec<Vec<f64>>,
    a: &[f64],
    b: &[f64],
    cost: &CostMatrix,
    lp_potentials: Option<(Vec<f64>, Vec<f64>)>,
) -> TransportPlan {
    let row_residual = gamma.iter().zip(a).map(|(r, ai)| (r.iter().sum::<f64>() - ai).abs()).fold(0.0, f64::max);
    let col_residual = (0..b.len())
        .map(|j| (gamma.iter().map(|r| r[j]).sum::<f64>() - b[j]).abs())
        .fold(0.0, f64::max);
    let value = gamma.iter().zip(cost.entries()).map(|(g, c)| g.iter().zip(c).map(|(x, y)| x * y).sum::<f64>()).sum();
    TransportPlan { gamma, row_residual, col_residual, value, lp_potentials }
}

/// Solves `φ_i + ψ_j = c_ij` on the basic cells by traversing the spanning
/// tree from `ψ_{m-1} = 0`, then shifts so that `φ_0 = 0`.
fn tree_potentials(cost: &CostMatrix, basis: &[(usize, usize)], n: usize, m: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut by_row = vec![Vec::new(); n];
    let mut by_col = vec![Vec::new(); m];
    for &(i, j) in basis {
        by_row[i].push(j);
        by_col[j].push(i);
    }
    let mut phi = vec![f64::NAN; n];
    let mut psi = vec![f64::NAN; m];
    psi[m - 1] = 0.0;
    // stack entries: (is_row, index)
    let mut stack = vec![(false, m - 1)];
    while let Some((is_row, k)) = stack.pop() {
        if is_row {
            for &j in &by_row[k] {
                if psi[j].is_nan() {
                    psi[j] = cost.entries()[k][j] - phi[k];
                    stack.push((false, j));
                }
            }
        } else {
            for &i in &by_col[k] {
                if phi[i].is_nan() {
                    phi[i] = cost.entries()[i][k] - psi[k];
                    stack.push((true, i));
                }
            }
        }
    }
    if phi.iter().chain(&psi).any(|v| v.is_nan()) {
        return None;
    }
    let shift = phi[0];
    phi.iter_mut().for_each(|v| *v -= shift);
    psi.iter_mut().for_each(|v| *v += shift);
    Some((phi, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::CostKind;

    #[test]
    fn northwest_corner_is_a_spanning_tree() {
        let cells = northwest_corner(&[0.5, 0.5], &[0.25, 0.25, 0.5]);
        assert_eq!(cells.len(), 4);
        assert_eq!(cells, vec![(0, 0), (0, 1), (1, 1), (1, 2)]);
    }

    #[test]
    fn degenerate_masses_still_give_n_plus_m_minus_one_cells() {
        let cells = northwest_corner(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(cells.len(), 3);
    }

    #[test]
    fn two_by_two_prefers_the_cheap_diagonal() {
        let c = CostMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], CostKind::Euclidean).unwrap();
        let p = transport_lp(&[0.5, 0.5], &[0.5, 0.5], &c).unwrap();
        assert_eq!(p.value, 0.0);
        let (phi, psi) = p.lp_potentials.unwrap();
        assert_eq!(phi[0], 0.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!(phi[i] + psi[j] <= c.entries()[i][j] + 1e-12);
            }
        }
    }

    #[test]
    fn unbalanced_masses() {
        let c = CostMatrix::new(vec![vec![1.0]], CostKind::Euclidean).unwrap();
        assert!(matches!(transport_lp(&[1.0], &[0.5], &c), Err(Error::MarginalMismatch(..))));
    }
}
