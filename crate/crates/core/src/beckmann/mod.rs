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

//! Minimal flows on a grid: staggered divergence and gradient, the graph
//! p-Laplacian solved by damped Newton, continuation in `p` towards the
//! 1-Lipschitz / minimal-flux pair, and the optimality-system residuals.
//!
//! Potentials live on nodes and fluxes on edges. Every node carries the
//! measure `h^d` and every edge the weight `h^d`; the gradient on an edge is
//! the difference quotient over its length. Divergence is defined as minus
//! the adjoint of the gradient, so discrete integration by parts is exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conjugate::NormKind;
use crate::transport::GeodesicSpec;
use crate::{Error, Result};

/// Which neighbours are joined by an edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// Horizontal and vertical edges only.
    Axis,
    /// Axis edges plus diagonals (the geodesic neighbourhood).
    #[default]
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    /// Unit vector from tail to head.
    pub direction: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridDomain {
    geometry: GeodesicSpec,
    source: Vec<f64>,
    stencil: Stencil,
    edges: Vec<Edge>,
    measure: f64,
}

/// Flux per edge, in the order of [`GridDomain::edges`]. A positive value
/// flows from tail to head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowField {
    pub values: Vec<f64>,
}

/// Node potential, zero on `Σ` and outside `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    pub values: Vec<f64>,
}

impl GridDomain {
    /// `ny == 1` is a path. Without a free set the source must be balanced.
    pub fn new(geometry: GeodesicSpec, source: Vec<f64>, stencil: Stencil) -> Result<Self> {
        geometry.validate()?;
        let count = geometry.nx * geometry.ny;
        if source.len() != count {
            return Err(Error::dim(format!("source has {} entries, expected {count}", source.len())));
        }
        if source.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("source must be finite"));
        }
        if source.iter().zip(&geometry.omega).any(|(v, o)| *v != 0.0 && !*o) {
            return Err(Error::invalid("source is nonzero outside the domain"));
        }
        let h = geometry.h;
        let measure = if geometry.ny == 1 { h } else { h * h };
        if !geometry.has_sigma() {
            let total: f64 = source.iter().sum::<f64>() * measure;
            let scale: f64 = source.iter().map(|v| v.abs()).sum::<f64>() * measure;
            if total.abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::invalid(format!("without a free set the source must be balanced, total mass {total}")));
            }
        }
        let mut edges = Vec::new();
        for k in 0..count {
            if !geometry.omega[k] {
                continue;
            }
            for (l, length) in geometry.neighbours(k) {
                let (dx, dy) = ((l % geometry.nx) as f64 - (k % geometry.nx) as f64, (l / geometry.nx) as f64 - (k / geometry.nx) as f64);
                if l < k || (stencil == Stencil::Axis && dx != 0.0 && dy != 0.0) {
                    continue;
                }
                let norm = dx.hypot(dy);
                edges.push(Edge { tail: k, head: l, length, direction: [dx / norm, dy / norm] });
            }
        }
        Ok(GridDomain { geometry, source, stencil, edges, measure })
    }

    /// Full rectangle, no free set.
    pub fn rectangle(nx: usize, ny: usize, h: f64, source: Vec<f64>, stencil: Stencil) -> Result<Self> {
        GridDomain::new(GeodesicSpec::full(nx, ny, h), source, stencil)
    }

    pub fn with_source(&self, source: Vec<f64>) -> Result<Self> {
        GridDomain::new(self.geometry.clone(), source, self.stencil)
    }

    pub fn geometry(&self) -> &GeodesicSpec {
        &self.geometry
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.source.len()
    }

    /// `h^d`, shared by nodes and edges.
    pub fn node_measure(&self) -> f64 {
        self.measure
    }

    pub fn in_omega(&self, k: usize) -> bool {
        self.geometry.omega[k]
    }

    pub fn in_sigma(&self, k: usize) -> bool {
        self.geometry.sigma.get(k).copied().unwrap_or(false)
    }

    pub fn has_sigma(&self) -> bool {
        self.geometry.has_sigma()
    }

    /// Node whose potential is fixed to zero when `Σ` is empty.
    fn pinned(&self) -> Option<usize> {
        if self.has_sigma() {
            None
        } else {
            self.geometry.omega.iter().position(|o| *o)
        }
    }

    fn is_fixed(&self, k: usize) -> bool {
        !self.in_omega(k) || self.in_sigma(k) || self.pinned() == Some(k)
    }

    pub fn grad(&self, u: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|e| (u[e.head] - u[e.tail]) / e.length).collect()
    }

    pub fn divergence(&self, flow: &FlowField) -> Vec<f64> {
        let mut div = vec![0.0; self.node_count()];
        for (e, s) in self.edges.iter().zip(&flow.values) {
            // edge weight equals the node measure, so only the length remains
            let q = s / e.length;
            div[e.tail] += q;
            div[e.head] -= q;
        }
        div
    }

    /// `Σ_e h^d |σ_e|`.
    pub fn total_variation(&self, flow: &FlowField) -> f64 {
        flow.values.iter().map(|s| s.abs()).sum::<f64>() * self.measure
    }

    /// `Σ_k f_k u_k h^d`.
    pub fn pairing(&self, u: &[f64]) -> f64 {
        self.source.iter().zip(u).map(|(f, v)| f * v).sum::<f64>() * self.measure
    }

    /// `‖div σ + f‖∞` over nodes of `Ω ∖ Σ`.
    pub fn balance_residual(&self, flow: &FlowField) -> f64 {
        let div = self.divergence(flow);
        (0..self.node_count())
            .filter(|&k| self.in_omega(k) && !self.in_sigma(k))
            .map(|k| (div[k] + self.source[k]).abs())
            .fold(0.0, f64::max)
    }

    /// `max_e |u_head - u_tail| / ℓ_e - 1`.
    pub fn lipschitz_violation(&self, u: &[f64]) -> f64 {
        self.grad(u).iter().map(|g| g.abs() - 1.0).fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_flow(&self, flow: &FlowField) -> Result<()> {
        if flow.values.len() != self.edges.len() {
            return Err(Error::dim(format!("flow has {} entries, the domain {} edges", flow.values.len(), self.edges.len())));
        }
        Ok(())
    }

    fn check_potential(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.node_count() {
            return Err(Error::dim(format!("potential has {} entries, the domain {} nodes", u.len(), self.node_count())));
        }
        Ok(())
    }

    /// Min-plus relaxation `v_k = min_j (labels_j + δ(k, j))` along the
    /// stencil edges.
    fn relax(&self, labels: &[f64]) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        let mut adjacency = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adjacency[e.tail].push((e.head, e.length));
            adjacency[e.head].push((e.tail, e.length));
        }
        let mut dist = labels.to_vec();
        let mut heap: BinaryHeap<Entry> = dist.iter().enumerate().filter(|(_, d)| d.is_finite()).map(|(k, d)| Entry(*d, k)).collect();
        while let Some(Entry(d, k)) = heap.pop() {
            if d > dist[k] {
                continue;
            }
            for &(l, len) in &adjacency[k] {
                if d + len < dist[l] {
                    dist[l] = d + len;
                    heap.push(Entry(dist[l], l));
                }
            }
        }
        dist
    }
}

pub fn divergence(flow: &FlowField, dom: &GridDomain) -> Result<Vec<f64>> {
    dom.check_flow(flow)?;
    Ok(dom.divergence(flow))
}

/// 1-Lipschitz potential vanishing on `Σ`, obtained from `u` by clamping to
/// `|u| ≤ δ(·, Σ)` and taking the largest 1-Lipschitz minorant. Without a
/// free set the result is shifted to vanish at the pinned node.
pub fn lip1_projection(u: &PotentialField, dom: &GridDomain) -> Result<PotentialField> {
    dom.check_potential(&u.values)?;
    let n = dom.node_count();
    let mut labels: Vec<f64> = (0..n).map(|k| if dom.in_omega(k) { u.values[k] } else { f64::INFINITY }).collect();
    if dom.has_sigma() {
        let sigma_labels: Vec<f64> = (0..n).map(|k| if dom.in_sigma(k) { 0.0 } else { f64::INFINITY }).collect();
        let to_sigma = dom.relax(&sigma_labels);
        for k in 0..n {
            labels[k] = labels[k].clamp(-to_sigma[k], to_sigma[k]);
        }
    }
    let mut v = dom.relax(&labels);
    if let Some(k0) = dom.pinned() {
        let shift = v[k0];
        v.iter_mut().for_each(|x| *x -= shift);
    }
    for k in 0..n {
        if !dom.in_omega(k) || dom.in_sigma(k) {
            v[k] = 0.0;
        }
    }
    Ok(PotentialField { values: v })
}

/// Converged p-Laplace solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PSolution {
    pub p: f64,
    pub u: PotentialField,
    /// `σ_e = |∇u|_e^{p-2} (∇u)_e`.
    pub sigma: FlowField,
    /// `‖div σ + f‖∞` on `Ω ∖ Σ`.
    pub residual: f64,
    pub newton_iterations: usize,
}

pub const NEWTON_DELTA: f64 = 1e-8;
pub const NEWTON_CAP: usize = 200;
pub const MAX_P: f64 = 1024.0;

/// Minimizer of `(1/p) Σ_e |∇u|_e^p h^d - Σ_k f_k u_k h^d` with `u = 0` on `Σ`.
pub fn solve_p_laplace(dom: &GridDomain, p: f64, tol: f64) -> Result<PSolution> {
    newton(dom, p, tol, &vec![0.0; dom.node_count()])
}

fn flux(g: f64, p: f64) -> f64 {
    g.abs().powf(p - 2.0) * g
}

fn newton(dom: &GridDomain, p: f64, tol: f64, start: &[f64]) -> Result<PSolution> {
    if !(2.0..=MAX_P).contains(&p) {
        return Err(Error::invalid(format!("p = {p} is outside [2, {MAX_P}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = dom.node_count();
    let mut index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for k in 0..n {
        if !dom.is_fixed(k) {
            index[k] = free.len();
            free.push(k);
        }
    }
    let mut u: Vec<f64> = (0..n).map(|k| if dom.is_fixed(k) { 0.0 } else { start[k] }).collect();
    let m = dom.node_measure();
    // energy and a bound on its rounding error
    let energy = |u: &[f64]| -> (f64, f64) {
        let e: f64 = dom.grad(u).iter().map(|g| g.abs().powf(p)).sum::<f64>() / p;
        let w: f64 = dom.source.iter().zip(u).map(|(f, v)| f * v).sum();
        let a: f64 = dom.source.iter().zip(u).map(|(f, v)| (f * v).abs()).sum();
        ((e - w) * m, 1e-15 * (e + a) * m)
    };
    let sigma_of = |u: &[f64]| FlowField { values: dom.grad(u).iter().map(|g| flux(*g, p)).collect() };
    // the pinned node's residual is fixed by the balance of the others
    let residual_of = |sigma: &FlowField| dom.balance_residual(sigma);

    let mut iterations = 0;
    loop {
        let sigma = sigma_of(&u);
        let residual = residual_of(&sigma);
        if residual <= tol || free.is_empty() {
            return Ok(PSolution { p, u: PotentialField { values: u }, sigma, residual, newton_iterations: iterations });
        }
        if iterations == NEWTON_CAP {
            return Err(Error::PSolveFailed { p, residual });
        }
        iterations += 1;

        let div = dom.divergence(&sigma);
        // gradient of the energy is -(div σ + f) h^d
        let grad = DVector::from_iterator(free.len(), free.iter().map(|&k| -(div[k] + dom.source[k]) * m));
        let mut hess = DMatrix::<f64>::zeros(free.len(), free.len());
        for (e, g) in dom.edges.iter().zip(dom.grad(&u)) {
            let c = (p - 1.0) * (g * g + NEWTON_DELTA * NEWTON_DELTA).powf((p - 2.0) / 2.0) * m / (e.length * e.length);
            let (a, b) = (index[e.tail], index[e.head]);
            if a != usize::MAX {
                hess[(a, a)] += c;
            }
            if b != usize::MAX {
                hess[(b, b)] += c;
            }
            if a != usize::MAX && b != usize::MAX {
                hess[(a, b)] -= c;
                hess[(b, a)] -= c;
            }
        }
        let diag_max = hess.diagonal().iter().fold(0.0_f64, |a, v| a.max(*v));
        let mut shift = 1e-13 * diag_max + f64::MIN_POSITIVE;
        let step = loop {
            let mut shifted = hess.clone();
            for i in 0..free.len() {
                shifted[(i, i)] += shift;
            }
            if let Some(ch) = shifted.cholesky() {
                break -ch.solve(&grad);
            }
            shift *= 100.0;
            if shift > diag_max {
                return Err(Error::PSolveFailed { p, residual });
            }
        };
        let slope = grad.dot(&step);
        let trial = |t: f64| -> Vec<f64> {
            let mut v = u.clone();
            for (i, &k) in free.iter().enumerate() {
                v[k] += t * step[i];
            }
            v
        };
        let (e0, noise) = energy(&u);
        if -slope <= 1e3 * noise {
            // energy differences are below rounding; judge by the residual
            let v = trial(1.0);
            if residual_of(&sigma_of(&v)) < residual {
                u = v;
                continue;
            }
            return Err(Error::PSolveFailed { p, residual });
        }
        let mut t = 1.0;
        loop {
            let v = trial(t);
            if energy(&v).0 <= e0 + 1e-4 * t * slope {
                u = v;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::PSolveFailed { p, residual });
            }
        }
    }
}

/// One stage of the continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub p: f64,
    /// `Σ h^d |σ_p|`.
    pub flux_value: f64,
    /// `Σ f u h^d` for the Lip-1 projection of `u_p`.
    pub potential_value: f64,
    pub gap: f64,
    pub residual: f64,
    pub newton_iterations: usize,
    /// Weak duality holds up to this bound on `|⟨div σ + f, u⟩|`.
    pub balance_error: f64,
    pub sigma: FlowField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Continuation {
    /// Lip-1 potential vanishing on `Σ`.
    pub u: PotentialField,
    /// Final flux.
    pub sigma: FlowField,
    /// Unprojected potential of the last stage.
    pub u_raw: PotentialField,
    /// `Σ h^d |σ|` of the final flux.
    pub value: f64,
    /// `Σ f u h^d` of the projected potential; at most `value` up to the
    /// balance error.
    pub potential_value: f64,
    pub gap: f64,
    pub stages: Vec<StageRecord>,
}

pub const DEFAULT_SCHEDULE: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Warm-started p-solves along an increasing schedule.
pub fn continuation_to_w1(dom: &GridDomain, schedule: &[f64], tol: f64) -> Result<Continuation> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("p schedule must be nonempty and increasing"));
    }
    let mut u = vec![0.0; dom.node_count()];
    let mut stages = Vec::with_capacity(schedule.len());
    let mut last = None;
    for &p in schedule {
        let sol = newton(dom, p, tol, &u)?;
        let lip = lip1_projection(&sol.u, dom)?;
        let flux_value = dom.total_variation(&sol.sigma);
        let potential_value = dom.pairing(&lip.values);
        let div = dom.divergence(&sol.sigma);
        let balance_error = (0..dom.node_count())
            .filter(|&k| dom.in_omega(k) && !dom.in_sigma(k))
            .map(|k| ((div[k] + dom.source[k]) * lip.values[k]).abs())
            .sum::<f64>()
            * dom.node_measure();
        debug_assert!(potential_value <= flux_value + balance_error + 1e-9 * flux_value.max(1.0));
        stages.push(StageRecord {
            p,
            flux_value,
            potential_value,
            gap: flux_value - potential_value,
            residual: sol.residual,
            newton_iterations: sol.newton_iterations,
            balance_error,
            sigma: sol.sigma.clone(),
        });
        u = sol.u.values.clone();
        last = Some((sol, lip));
    }
    let (sol, lip) = last.expect("schedule is nonempty");
    let stage = stages.last().expect("schedule is nonempty");
    Ok(Continuation {
        value: stage.flux_value,
        potential_value: stage.potential_value,
        gap: stage.gap,
        u: lip,
        sigma: sol.sigma,
        u_raw: sol.u,
        stages,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    /// `a_e = |σ_e| / max(|∇u|_e, eps)`.
    pub diffusion_coefficient: Vec<f64>,
    /// `‖div σ + f‖∞` on `Ω ∖ Σ`.
    pub balance_residual: f64,
    /// `‖div(a ∇u) + f‖∞` on `Ω ∖ Σ`.
    pub diffusion_residual: f64,
    /// `max ||∇u|_e - 1|` over edges with `|σ_e| > eps`; zero when none.
    pub eikonal_residual: f64,
    pub active_edges: usize,
    /// `max |u|` on `Σ`.
    pub dirichlet_residual: f64,
    /// `max(0, max_e |∇u|_e - 1)`.
    pub lipschitz_violation: f64,
}

/// Residuals of the diffusion / eikonal system. The zero normal flux on the
/// boundary outside `Σ` holds by construction: no edge leaves `Ω`.
pub fn optimality_residuals(u: &PotentialField, sigma: &FlowField, dom: &GridDomain, eps: f64) -> Result<OptimalityReport> {
    dom.check_potential(&u.values)?;
    dom.check_flow(sigma)?;
    let grad = dom.grad(&u.values);
    let a: Vec<f64> = sigma.values.iter().zip(&grad).map(|(s, g)| s.abs() / g.abs().max(eps)).collect();
    let diffused = FlowField { values: a.iter().zip(&grad).map(|(a, g)| a * g).collect() };
    let mut eikonal_residual: f64 = 0.0;
    let mut active_edges = 0;
    for (s, g) in sigma.values.iter().zip(&grad) {
        if s.abs() > eps {
            active_edges += 1;
            eikonal_residual = eikonal_residual.max((g.abs() - 1.0).abs());
        }
    }
    let dirichlet_residual = (0..dom.node_count()).filter(|&k| dom.in_sigma(k)).map(|k| u.values[k].abs()).fold(0.0, f64::max);
    Ok(OptimalityReport {
        balance_residual: dom.balance_residual(sigma),
        diffusion_residual: dom.balance_residual(&diffused),
        diffusion_coefficient: a,
        eikonal_residual,
        active_edges,
        dirichlet_residual,
        lipschitz_violation: dom.lipschitz_violation(&u.values).max(0.0),
    })
}

/// `Σ_e |σ_e| log |σ_e| h^d` with `0 log 0 = 0`.
pub fn entropy_functional(sigma: &FlowField, dom: &GridDomain) -> Result<f64> {
    dom.check_flow(sigma)?;
    let sum: f64 = sigma.values.iter().map(|s| s.abs()).filter(|s| *s > 0.0).map(|s| s * s.ln()).sum();
    Ok(sum * dom.node_measure())
}

/// `Σ_e ρ⁰_K(σ_e t_e) h^d` for `K` the unit ball of `gauge`, where `t_e` is
/// the edge direction and `ρ⁰_K` the support function of `K` (the dual norm).
pub fn rho_k_functional(flow: &FlowField, dom: &GridDomain, gauge: NormKind) -> Result<f64> {
    dom.check_flow(flow)?;
    let dual = gauge.dual();
    let sum: f64 = flow
        .values
        .iter()
        .zip(&dom.edges)
        .map(|(s, e)| dual.norm(&[s * e.direction[0], s * e.direction[1]]))
        .sum();
    Ok(sum * dom.node_measure())
}
