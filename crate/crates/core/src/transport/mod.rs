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

//! Discrete Monge–Kantorovich transport: costs, the transportation LP,
//! c-transforms and conjugate potentials, the distance case and the
//! quadratic-cost structure on the line.

mod geodesic;
mod kantorovich;

pub use geodesic::GeodesicSpec;
pub use kantorovich::{transport_lp, TransportPlan, MASS_TOL};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Finitely supported probability measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Atoms with zero weight are dropped. Weights must sum to one within
    /// `1e-12`.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(Error::dim("a measure needs one weight per point and at least one atom"));
        }
        let d = points[0].len();
        if !(1..=2).contains(&d) || points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::dim("points must be finite and all of dimension 1 or 2"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        let (points, weights) = points.into_iter().zip(weights).filter(|(_, w)| *w > 0.0).unzip();
        Ok(DiscreteMeasure { points, weights })
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        DiscreteMeasure { points: vec![point], weights: vec![1.0] }
    }

    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let mut weights = vec![w; points.len()];
        // put the rounding error on the last atom so the total is exactly one
        let rest: f64 = weights[..weights.len() - 1].iter().sum();
        *weights.last_mut().unwrap() = 1.0 - rest;
        DiscreteMeasure::new(points, weights)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    /// `|x - y|`.
    Euclidean,
    /// `½|x - y|²`.
    SqEuclidean,
    /// Grid geodesic distance with free set.
    Geodesic,
    /// Given entry by entry.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    entries: Vec<Vec<f64>>,
    kind: CostKind,
}

impl CostMatrix {
    pub fn new(entries: Vec<Vec<f64>>, kind: CostKind) -> Result<Self> {
        let cols = entries.first().map_or(0, Vec::len);
        if cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("cost matrix must be nonempty and rectangular"));
        }
        if entries.iter().flatten().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::invalid("costs must be finite and nonnegative"));
        }
        Ok(CostMatrix { entries, kind })
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    /// Symmetry, zero diagonal and the triangle inequality on a square
    /// matrix, by exhaustive scan (at most 60 points).
    pub fn check_semi_distance(&self) -> Result<()> {
        let n = self.rows();
        if n != self.cols() {
            return Err(Error::NotSemiDistance("matrix is not square".into()));
        }
        if n > 60 {
            return Err(Error::invalid("metric verification is limited to 60 points"));
        }
        let c = &self.entries;
        let scale = c.iter().flatten().fold(1.0_f64, |a, v| a.max(*v));
        let tol = 1e-12 * scale;
        for i in 0..n {
            if c[i][i] > tol {
                return Err(Error::NotSemiDistance(format!("c[{i}][{i}] = {} is not zero", c[i][i])));
            }
            for j in 0..n {
                if (c[i][j] - c[j][i]).abs() > tol {
                    return Err(Error::NotSemiDistance(format!("c[{i}][{j}] != c[{j}][{i}]")));
                }
                for k in 0..n {
                    if c[i][k] > c[i][j] + c[j][k] + tol {
                        return Err(Error::NotSemiDistance(format!("triangle inequality fails for ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cost between two point sets. Geodesic costs snap points to the nodes
/// of `spec` and combine the graph distance with the free set `Σ`.
pub fn build_cost(x: &[Vec<f64>], y: &[Vec<f64>], kind: CostKind, spec: Option<&GeodesicSpec>) -> Result<CostMatrix> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::dim("cost needs points on both sides"));
    }
    let dist = |p: &[f64], q: &[f64]| -> Result<f64> {
        if p.len() != q.len() {
            return Err(Error::dim("points of different dimensions"));
        }
        Ok(p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    };
    let entries = match kind {
        CostKind::Explicit => return Err(Error::invalid("explicit costs are built with CostMatrix::new")),
        CostKind::Euclidean | CostKind::SqEuclidean => {
            let mut rows = Vec::with_capacity(x.len());
            for p in x {
                let mut row = Vec::with_capacity(y.len());
                for q in y {
                    let d = dist(p, q)?;
                    row.push(if kind == CostKind::Euclidean { d } else { 0.5 * d * d });
                }
                rows.push(row);
            }
            rows
        }
        CostKind::Geodesic => {
            let spec = spec.ok_or_else(|| Error::invalid("geodesic costs need a grid specification"))?;
            spec.validate()?;
            let xs: Vec<usize> = x.iter().map(|p| spec.node_of(p)).collect::<Result<_>>()?;
            let ys: Vec<usize> = y.iter().map(|p| spec.node_of(p)).collect::<Result<_>>()?;
            let to_sigma = spec.distance_to_sigma();
            xs.iter()
                .map(|&s| {
                    let d = spec.distances_from(&[s]);
                    ys.iter().map(|&t| d[t].min(to_sigma[s] + to_sigma[t])).collect()
                })
                .collect()
        }
    };
    CostMatrix::new(entries, kind)
}

/// Optimal plan and value of the Kantorovich problem.
pub fn solve_kantorovich(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &CostMatrix) -> Result<(TransportPlan, f64)> {
    let plan = transport_lp(mu.weights(), nu.weights(), cost)?;
    let value = plan.value;
    Ok((plan, value))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `φ^c(y_j) = min_i c_ij - φ_i`.
    ToTargets,
    /// `ψ^c(x_i) = min_j c_ij - ψ_j`.
    ToSources,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CTransform {
    pub values: Vec<f64>,
    /// Attaining index, smallest among ties.
    pub argmin: Vec<usize>,
}

pub fn c_transform(phi: &[f64], cost: &CostMatrix, direction: Direction) -> Result<CTransform> {
    let c = cost.entries();
    let (outer, inner) = match direction {
        Direction::ToTargets => (cost.cols(), cost.rows()),
        Direction::ToSources => (cost.rows(), cost.cols()),
    };
    if phi.len() != inner {
        return Err(Error::dim(format!("potential has {} entries, expected {inner}", phi.len())));
    }
    let at = |k: usize, l: usize| match direction {
        Direction::ToTargets => c[l][k],
        Direction::ToSources => c[k][l],
    };
    let mut values = Vec::with_capacity(outer);
    let mut argmin = Vec::with_capacity(outer);
    for k in 0..outer {
        let mut best = (f64::INFINITY, 0);
        for (l, p) in phi.iter().enumerate() {
            let v = at(k, l) - p;
            if v < best.0 {
                best = (v, l);
            }
        }
        values.push(best.0);
        argmin.push(best.1);
    }
    Ok(CTransform { values, argmin })
}

/// Conjugate pair `ψ = φ^c`, `φ = ψ^c` with certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPotentials {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// `min_ij c_ij - φ_i - ψ_j`.
    pub feasibility_slack: f64,
    /// `max |φ_i + ψ_j - c_ij|` over plan entries above `1e-12`.
    pub support_residual: f64,
    pub support_ok: bool,
    pub dual_value: f64,
    pub sweeps: usize,
}

pub const SUPPORT_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 5;

/// Potentials certifying `plan`: started from the plan's LP multipliers
/// (zero when absent), regularized by alternating c-transforms, normalized
/// by `φ_0 = 0`.
pub fn dual_potentials(a: &[f64], b: &[f64], cost: &CostMatrix, plan: &TransportPlan) -> Result<DualPotentials> {
    let (n, m) = (cost.rows(), cost.cols());
    if a.len() != n || b.len() != m || plan.gamma.len() != n || plan.gamma.iter().any(|r| r.len() != m) {
        return Err(Error::dim("marginals, plan and cost disagree in size"));
    }
    let mut phi = match &plan.lp_potentials {
        Some((phi, _)) => phi.clone(),
        None => vec![0.0; n],
    };
    let mut psi = c_transform(&phi, cost, Direction::ToTargets)?.values;
    let mut sweeps = 1;
    for _ in 0..MAX_SWEEPS {
        let next_phi = c_transform(&psi, cost, Direction::ToSources)?.values;
        let next_psi = c_transform(&next_phi, cost, Direction::ToTargets)?.values;
        let same = next_phi == phi && next_psi == psi;
        phi = next_phi;
        psi = next_psi;
        if same {
            break;
        }
        sweeps += 1;
    }
    // the pair is (ψ^c, ψ) with ψ = φ^c for the previous φ; recompute so that
    // both identities hold for the returned vectors
    phi = c_transform(&psi, cost, Direction::ToSources)?.values;
    let shift = phi[0];
    phi.iter_mut().for_each(|v| *v -= shift);
    psi.iter_mut().for_each(|v| *v += shift);

    let c = cost.entries();
    let mut feasibility_slack = f64::INFINITY;
    let mut support_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..m {
            let r = c[i][j] - phi[i] - psi[j];
            feasibility_slack = feasibility_slack.min(r);
            if plan.gamma[i][j] > 1e-12 {
                support_residual = support_residual.max(r.abs());
            }
        }
    }
    let dual_value = a.iter().zip(&phi).map(|(w, p)| w * p).sum::<f64>() + b.iter().zip(&psi).map(|(w, p)| w * p).sum::<f64>();
    Ok(DualPotentials {
        phi,
        psi,
        feasibility_slack,
        support_residual,
        support_ok: support_residual <= SUPPORT_TOL,
        dual_value,
        sweeps,
    })
}

/// Distance-case duality on a common support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrResult {
    pub value: f64,
    /// `∫ u d(μ - ν)` for the returned potential.
    pub dual_value: f64,
    pub u: Vec<f64>,
    /// `max_ij (u_i - u_j - c_ij)`, nonpositive up to rounding for 1-Lipschitz `u`.
    pub lipschitz_violation: f64,
    /// `max |u^c + u|`, zero when `u^c = -u`.
    pub antisymmetry_residual: f64,
    pub plan: TransportPlan,
}

/// `max {∫ u d(μ - ν) : u_i - u_j ≤ c_ij}` with `μ`, `ν` given as weights on
/// the points indexing the square metric `cost`.
pub fn kantorovich_rubinstein(mu: &[f64], nu: &[f64], cost: &CostMatrix) -> Result<KrResult> {
    cost.check_semi_distance()?;
    let plan = transport_lp(mu, nu, cost)?;
    let pot = dual_potentials(mu, nu, cost, &plan)?;
    let u = pot.phi.clone();
    let n = u.len();
    let c = cost.entries();
    let mut lipschitz_violation = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            lipschitz_violation = lipschitz_violation.max(u[i] - u[j] - c[i][j]);
        }
    }
    let uc = c_transform(&u, cost, Direction::ToTargets)?.values;
    let antisymmetry_residual = uc.iter().zip(&u).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    let dual_value = mu.iter().zip(nu).zip(&u).map(|((p, q), v)| (p - q) * v).sum();
    Ok(KrResult { value: plan.value, dual_value, u, lipschitz_violation, antisymmetry_residual, plan })
}

/// `N(f) = T_c(f⁺, f⁻)` for a zero-average signed measure given by its
/// positive and negative parts on the points of the square metric `cost`.
pub fn kantorovich_norm(f_plus: &[f64], f_minus: &[f64], cost: &CostMatrix) -> Result<f64> {
    cost.check_semi_distance()?;
    if f_plus.len() != cost.rows() || f_minus.len() != cost.rows() {
        return Err(Error::dim("signed measure and metric disagree in size"));
    }
    if f_plus.iter().chain(f_minus).any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("positive and negative parts must be nonnegative"));
    }
    let (sp, sm) = (f_plus.iter().sum::<f64>(), f_minus.iter().sum::<f64>());
    if (sp - sm).abs() > MASS_TOL * sp.max(sm).max(1.0) {
        return Err(Error::MarginalMismatch(sp, sm));
    }
    if sp == 0.0 {
        return Ok(0.0);
    }
    let a: Vec<f64> = f_plus.iter().map(|w| w / sp).collect();
    let b: Vec<f64> = f_minus.iter().map(|w| w / sm).collect();
    Ok(sp * transport_lp(&a, &b, cost)?.value)
}

/// Checks of the quadratic-cost structure on the line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrenierReport {
    pub passed: bool,
    /// Slopes of `φ₀ = x²/2 - φ̄` over the sorted support are nondecreasing.
    pub convex: bool,
    /// `max φ₀(x_i) + φ₀*(y_j) - x_i y_j` over plan entries above `1e-12`.
    pub fenchel_residual: f64,
    /// First pair of plan entries `((i, j), (k, l))` with `x_i < x_k` but
    /// `y_j > y_l`.
    pub crossing: Option<((usize, usize), (usize, usize))>,
}

pub fn brenier_check(plan: &TransportPlan, mu: &DiscreteMeasure, nu: &DiscreteMeasure, phi: &[f64]) -> Result<BrenierReport> {
    if mu.points().iter().chain(nu.points()).any(|p| p.len() != 1) {
        return Err(Error::dim("the Brenier check is one-dimensional"));
    }
    let (n, m) = (mu.len(), nu.len());
    if phi.len() != n || plan.gamma.len() != n || plan.gamma.iter().any(|r| r.len() != m) {
        return Err(Error::dim("plan, potential and measures disagree in size"));
    }
    let xs: Vec<f64> = mu.points().iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = nu.points().iter().map(|p| p[0]).collect();
    let phi0: Vec<f64> = xs.iter().zip(phi).map(|(x, p)| 0.5 * x * x - p).collect();
    let scale = 1.0 + xs.iter().chain(&ys).fold(0.0_f64, |a, v| a.max(v.abs())).powi(2);
    let tol = 1e-9 * scale;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let slopes: Vec<f64> = order
        .windows(2)
        .filter(|w| xs[w[1]] > xs[w[0]])
        .map(|w| (phi0[w[1]] - phi0[w[0]]) / (xs[w[1]] - xs[w[0]]))
        .collect();
    let convex = slopes.windows(2).all(|s| s[1] >= s[0] - tol);

    let conj = |y: f64| xs.iter().zip(&phi0).map(|(x, p)| x * y - p).fold(f64::NEG_INFINITY, f64::max);
    let active: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|&(i, j)| plan.gamma[i][j] > 1e-12).collect();
    let fenchel_residual = active.iter().map(|&(i, j)| phi0[i] + conj(ys[j]) - xs[i] * ys[j]).fold(0.0, f64::max);

    let mut crossing = None;
    'outer: for &(i, j) in &active {
        for &(k, l) in &active {
            if xs[i] < xs[k] && ys[j] > ys[l] {
                crossing = Some(((i, j), (k, l)));
                break 'outer;
            }
        }
    }
    Ok(BrenierReport { passed: convex && fenchel_residual <= tol && crossing.is_none(), convex, fenchel_residual, crossing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_measure(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(points.iter().map(|p| vec![*p]).collect(), weights.to_vec()).unwrap()
    }

    #[test]
    fn zero_weight_atoms_are_dropped() {
        let m = line_measure(&[0.0, 1.0, 2.0], &[0.5, 0.0, 0.5]);
        assert_eq!(m.len(), 2);
        assert!(DiscreteMeasure::new(vec![vec![0.0]], vec![0.9]).is_err());
    }

    #[test]
    fn two_atom_shift_costs_two() {
        let mu = line_measure(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = line_measure(&[2.0, 3.0], &[0.5, 0.5]);
        let c = build_cost(mu.points(), nu.points(), CostKind::Euclidean, None).unwrap();
        let (plan, value) = solve_kantorovich(&mu, &nu, &c).unwrap();
        assert!((value - 2.0).abs() < 1e-12);
        let d = dual_potentials(mu.weights(), nu.weights(), &c, &plan).unwrap();
        assert!((d.dual_value - 2.0).abs() < 1e-12 && d.support_ok && d.feasibility_slack >= -1e-12);
    }

    #[test]
    fn single_atoms() {
        let mu = DiscreteMeasure::dirac(vec![0.0]);
        let nu = DiscreteMeasure::dirac(vec![3.0]);
        let c = build_cost(mu.points(), nu.points(), CostKind::Euclidean, None).unwrap();
        let (plan, value) = solve_kantorovich(&mu, &nu, &c).unwrap();
        assert_eq!(value, 3.0);
        let d = dual_potentials(&[1.0], &[1.0], &c, &plan).unwrap();
        assert_eq!((d.phi[0], d.psi[0]), (0.0, 3.0));
    }

    #[test]
    fn c_transform_ties_take_the_smallest_index() {
        let c = CostMatrix::new(vec![vec![1.0], vec![1.0]], CostKind::Euclidean).unwrap();
        let t = c_transform(&[0.0, 0.0], &c, Direction::ToTargets).unwrap();
        assert_eq!(t.argmin, vec![0]);
    }

    #[test]
    fn two_point_distance_case() {
        let c = CostMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], CostKind::Euclidean).unwrap();
        let kr = kantorovich_rubinstein(&[1.0, 0.0], &[0.0, 1.0], &c).unwrap();
        assert!((kr.value - 1.0).abs() < 1e-12 && (kr.dual_value - 1.0).abs() < 1e-12);
        assert!((kr.u[0] - kr.u[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_metric_cost_is_rejected() {
        let c = CostMatrix::new(vec![vec![0.0, 5.0, 1.0], vec![5.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]], CostKind::Euclidean).unwrap();
        assert!(matches!(kantorovich_rubinstein(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &c), Err(Error::NotSemiDistance(_))));
    }

    #[test]
    fn kantorovich_norm_is_homogeneous() {
        let c = CostMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], CostKind::Euclidean).unwrap();
        assert_eq!(kantorovich_norm(&[0.0, 0.0], &[0.0, 0.0], &c).unwrap(), 0.0);
        assert!((kantorovich_norm(&[2.0, 0.0], &[0.0, 2.0], &c).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crossed_plan_is_caught() {
        let mu = line_measure(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = line_measure(&[0.0, 1.0], &[0.5, 0.5]);
        let c = build_cost(mu.points(), nu.points(), CostKind::SqEuclidean, None).unwrap();
        let crossed = kantorovich::finish(vec![vec![0.0, 0.5], vec![0.5, 0.0]], mu.weights(), nu.weights(), &c, None);
        let r = brenier_check(&crossed, &mu, &nu, &[0.0, 0.0]).unwrap();
        assert_eq!(r.crossing, Some(((0, 1), (1, 0))));
        assert!(!r.passed);
    }
}
