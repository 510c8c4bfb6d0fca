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

//! Minimization of `u ↦ f(u) + g(Mu)` for the descriptor combinations the
//! duality layer supports.

use super::LinearMap;
use crate::conjugate::{FunctionDescriptor, NormKind};
use crate::linalg::{norm2, spectral_norm};
use crate::programs::{solve_lp, LpProblem, LpStatus};
use crate::{Error, ExtReal, Result};
use FunctionDescriptor as F;

const PG_ITERATIONS: usize = 10_000;
const PG_STEP_TOL: f64 = 1e-10;
const SEARCH_HALF_WIDTH: f64 = 10.0;

#[derive(Clone, Debug)]
pub(crate) struct CompositeMin {
    pub point: Vec<f64>,
    /// `inf`, `-∞` when unbounded below, `+∞` when infeasible.
    pub value: f64,
    /// An element of `∂g(Mū)` when the strategy produces one.
    pub multiplier: Option<Vec<f64>>,
}

pub(crate) fn objective(f: &FunctionDescriptor, g: &FunctionDescriptor, m: &LinearMap, u: &[f64]) -> ExtReal {
    f.eval(u) + g.eval(&m.apply(u))
}

/// Picks the first applicable strategy: projected gradient for smooth `g`
/// with a projectable or quadratic `f`, linear programming for boxes with
/// linear terms, and grid search with zooming in dimension one and two.
pub(crate) fn minimize(f: &FunctionDescriptor, g: &FunctionDescriptor, m: &LinearMap) -> Result<CompositeMin> {
    let (f, g) = (f.simplified(), g.simplified());
    if let Some(r) = projected_gradient(&f, &g, m) {
        return Ok(r);
    }
    if let Some(r) = linear_program(&f, &g, m)? {
        return Ok(r);
    }
    if m.cols() <= 2 {
        return grid_search(&f, &g, m);
    }
    Err(Error::invalid("no solver for this descriptor combination above dimension 2"))
}

/// Quadratic data `(A, b)` of a smooth part, `None` when not quadratic.
fn quadratic(f: &FunctionDescriptor) -> Option<(&[Vec<f64>], &[f64])> {
    match f {
        F::Quadratic { a, b, .. } => Some((a, b)),
        _ => None,
    }
}

/// Projection onto the domain of an indicator, with the linear part of a
/// tilt split off.
enum Constraint<'a> {
    Free,
    Interval(f64, f64),
    Box(&'a [f64], &'a [f64]),
    Ball(f64, NormKind),
}

impl Constraint<'_> {
    fn project(&self, u: &mut [f64]) {
        match self {
            Constraint::Free => {}
            Constraint::Interval(a, b) => u.iter_mut().for_each(|v| *v = v.clamp(*a, *b)),
            Constraint::Box(l, h) => {
                for ((v, l), h) in u.iter_mut().zip(*l).zip(*h) {
                    *v = v.clamp(*l, *h);
                }
            }
            Constraint::Ball(r, NormKind::L2) => {
                let n = norm2(u);
                if n > *r {
                    u.iter_mut().for_each(|v| *v *= r / n);
                }
            }
            Constraint::Ball(r, NormKind::Linf) => u.iter_mut().for_each(|v| *v = v.clamp(-r, *r)),
            Constraint::Ball(_, NormKind::L1) => unreachable!(),
        }
    }
}

fn base_constraint(f: &FunctionDescriptor) -> Option<Constraint<'_>> {
    match f {
        F::IndicatorInterval { a, b } => Some(Constraint::Interval(*a, *b)),
        F::IndicatorBox { lower, upper } => Some(Constraint::Box(lower, upper)),
        F::IndicatorBall { radius, norm } if *norm != NormKind::L1 => Some(Constraint::Ball(*radius, *norm)),
        _ => None,
    }
}

fn constraint_of(f: &FunctionDescriptor) -> Option<(Constraint<'_>, Option<&[f64]>)> {
    let base = base_constraint;
    match f {
        F::AffineTilt { inner, slope, .. } => base(inner).map(|c| (c, Some(slope.as_slice()))),
        other => base(other).map(|c| (c, None)),
    }
}

fn projected_gradient(f: &FunctionDescriptor, g: &FunctionDescriptor, m: &LinearMap) -> Option<CompositeMin> {
    let (ga, gb) = quadratic(g)?;
    if ga.len() != m.rows() {
        return None;
    }
    let n = m.cols();
    let (constraint, tilt, fq) = match quadratic(f) {
        Some(q) => (Constraint::Free, None, Some(q)),
        None => {
            let (c, t) = constraint_of(f)?;
            (c, t, None)
        }
    };
    let lf = fq.map_or(0.0, |(a, _)| spectral_norm(a));
    let l = lf + m.spectral_norm().powi(2) * spectral_norm(ga);
    if !(l > 0.0) {
        return None;
    }
    let gradient = |u: &[f64]| -> Vec<f64> {
        let mu = m.apply(u);
        let inner: Vec<f64> = crate::linalg::mat_vec(ga, &mu).iter().zip(gb).map(|(x, y)| x + y).collect();
        let mut grad = m.apply_transpose(&inner);
        if let Some((a, b)) = fq {
            for ((gv, av), bv) in grad.iter_mut().zip(crate::linalg::mat_vec(a, u)).zip(b) {
                *gv += av + bv;
            }
        }
        if let Some(s) = tilt {
            grad.iter_mut().zip(s).for_each(|(gv, sv)| *gv += sv);
        }
        grad
    };
    let mut u = vec![0.0; n];
    constraint.project(&mut u);
    for _ in 0..PG_ITERATIONS {
        let grad = gradient(&u);
        let mut next: Vec<f64> = u.iter().zip(&grad).map(|(x, d)| x - d / l).collect();
        constraint.project(&mut next);
        let step = norm2(&next.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
        u = next;
        if step <= PG_STEP_TOL {
            break;
        }
    }
    let value = objective(f, g, m, &u).to_f64();
    let multiplier = g.gradient(&m.apply(&u));
    Some(CompositeMin { point: u, value, multiplier })
}

/// Box bounds and linear cost of a polyhedral term: a (tilted) interval or
/// box indicator, or a linear function.
fn polyhedral(f: &FunctionDescriptor, dim: usize) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (inner, slope) = match f {
        F::AffineTilt { inner, slope, .. } => (inner.as_ref(), slope.clone()),
        other => (other, vec![0.0; dim]),
    };
    let (lo, hi) = match inner {
        F::IndicatorInterval { a, b } => (vec![*a; dim], vec![*b; dim]),
        F::IndicatorBox { lower, upper } => (lower.clone(), upper.clone()),
        F::IndicatorBall { radius, norm: NormKind::Linf } => (vec![-radius; dim], vec![*radius; dim]),
        F::Quadratic { a, b, .. } if a.iter().flatten().all(|v| *v == 0.0) => {
            let s = b.iter().zip(&slope).map(|(x, y)| x + y).collect();
            return Some((vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim], s));
        }
        _ => return None,
    };
    (lo.len() == dim && slope.len() == dim).then_some((lo, hi, slope))
}

/// `min s·u + t·Mu` over `l_f ≤ u ≤ h_f`, `l_g ≤ Mu ≤ h_g`, with `u = p - q`
/// split into nonnegative parts.
fn linear_program(f: &FunctionDescriptor, g: &FunctionDescriptor, m: &LinearMap) -> Result<Option<CompositeMin>> {
    let (n, k) = (m.cols(), m.rows());
    let (Some((lf, hf, s)), Some((lg, hg, t))) = (polyhedral(f, n), polyhedral(g, k)) else {
        return Ok(None);
    };
    let mt = m.apply_transpose(&t);
    let cost: Vec<f64> = s.iter().zip(&mt).map(|(a, b)| a + b).collect();
    let mut c = cost.clone();
    c.extend(cost.iter().map(|v| -v));
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    // rows of Mu keep their index so that the multipliers can be read back
    let mut mu_rows: Vec<(usize, usize, f64)> = Vec::new();
    let push = |coef: Vec<f64>, bound: f64, rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>| {
        let mut r = coef.clone();
        r.extend(coef.iter().map(|v| -v));
        rows.push(r);
        rhs.push(bound);
    };
    for i in 0..n {
        let e: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
        if hf[i].is_finite() {
            push(e.clone(), hf[i], &mut rows, &mut rhs);
        }
        if lf[i].is_finite() {
            push(e.iter().map(|v| -v).collect(), -lf[i], &mut rows, &mut rhs);
        }
    }
    for i in 0..k {
        let row = m.matrix()[i].clone();
        if hg[i].is_finite() {
            mu_rows.push((rows.len(), i, 1.0));
            push(row.clone(), hg[i], &mut rows, &mut rhs);
        }
        if lg[i].is_finite() {
            mu_rows.push((rows.len(), i, -1.0));
            push(row.iter().map(|v| -v).collect(), -lg[i], &mut rows, &mut rhs);
        }
    }
    if rows.is_empty() {
        // unconstrained linear objective
        let value = if cost.iter().all(|v| *v == 0.0) { 0.0 } else { f64::NEG_INFINITY };
        let offset = objective(f, g, m, &vec![0.0; n]).to_f64();
        return Ok(Some(CompositeMin { point: vec![0.0; n], value: value + offset, multiplier: Some(t) }));
    }
    let sol = solve_lp(&LpProblem { c, a: rows, b: rhs })?;
    Ok(Some(match sol.status {
        LpStatus::Optimal => {
            let u: Vec<f64> = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
            let mut sigma = t.clone();
            for (row, i, sign) in mu_rows {
                sigma[i] += sign * sol.y[row];
            }
            let value = objective(f, g, m, &u).to_f64();
            CompositeMin { point: u, value, multiplier: Some(sigma) }
        }
        LpStatus::Infeasible => CompositeMin { point: vec![0.0; n], value: f64::INFINITY, multiplier: None },
        LpStatus::Unbounded => CompositeMin { point: vec![0.0; n], value: f64::NEG_INFINITY, multiplier: None },
    }))
}

/// Known bounding box of the effective domain, per coordinate.
pub(crate) fn domain_box(f: &FunctionDescriptor, dim: usize) -> Option<Vec<(f64, f64)>> {
    match f {
        F::IndicatorInterval { a, b } => Some(vec![(*a, *b); dim]),
        F::IndicatorBox { lower, upper } => Some(lower.iter().zip(upper).map(|(l, h)| (*l, *h)).collect()),
        F::IndicatorBall { radius, .. } => Some(vec![(-radius, *radius); dim]),
        F::Sampled { function } => Some(function.axes().iter().map(|g| (g.lo(), g.hi())).collect()),
        F::AffineTilt { inner, .. } => domain_box(inner, dim),
        F::Conjugate { of } => match of.as_ref() {
            F::MinimalSurface => Some(vec![(-1.0, 1.0); dim]),
            F::AbsValue => Some(vec![(-1.0, 1.0); dim]),
            F::Norm { .. } => Some(vec![(-1.0, 1.0); dim]),
            _ => None,
        },
        _ => None,
    }
}

fn grid_search(f: &FunctionDescriptor, g: &FunctionDescriptor, m: &LinearMap) -> Result<CompositeMin> {
    let n = m.cols();
    let mut window: Vec<(f64, f64)> = vec![(-SEARCH_HALF_WIDTH, SEARCH_HALF_WIDTH); n];
    if let Some(b) = domain_box(f, n) {
        for (w, (lo, hi)) in window.iter_mut().zip(b) {
            w.0 = if lo.is_finite() { lo } else { w.0.min(hi - 2.0 * SEARCH_HALF_WIDTH) };
            w.1 = if hi.is_finite() { hi } else { w.1.max(lo + 2.0 * SEARCH_HALF_WIDTH) };
        }
    } else if let (Some(b), true) = (domain_box(g, m.rows()), m.rows() == n) {
        // invertible diagonal maps carry the domain of g back to u
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m.matrix()[i][j] == 0.0) && m.matrix()[i][i] != 0.0);
        if diagonal {
            for (i, (lo, hi)) in b.into_iter().enumerate() {
                let d = m.matrix()[i][i];
                if lo.is_finite() && hi.is_finite() {
                    let (p, q) = (lo / d, hi / d);
                    window[i] = (p.min(q), p.max(q));
                }
            }
        }
    }
    let per_axis = if n == 1 { 2001 } else { 201 };
    let value_at = |u: &[f64]| objective(f, g, m, u);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let consider = |u: Vec<f64>, best: &mut Option<(Vec<f64>, f64)>| {
        if let ExtReal::Finite(v) = value_at(&u) {
            if best.as_ref().is_none_or(|b| v < b.1) {
                *best = Some((u, v));
            }
        }
    };
    let axis = |i: usize, k: usize| {
        let (lo, hi) = window[i];
        if k + 1 == per_axis {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (per_axis - 1) as f64
        }
    };
    if n == 1 {
        for k in 0..per_axis {
            consider(vec![axis(0, k)], &mut best);
        }
    } else {
        for k in 0..per_axis {
            for l in 0..per_axis {
                consider(vec![axis(0, k), axis(1, l)], &mut best);
            }
        }
    }
    let Some((mut u, mut v)) = best else {
        return Ok(CompositeMin { point: vec![0.0; n], value: f64::INFINITY, multiplier: None });
    };
    let mut radius: Vec<f64> = window.iter().map(|(lo, hi)| 2.0 * (hi - lo) / (per_axis - 1) as f64).collect();
    let steps = 10i32;
    for _ in 0..80 {
        let center = u.clone();
        let offsets: Vec<Vec<f64>> = if n == 1 {
            (-steps..=steps).map(|k| vec![radius[0] * f64::from(k) / f64::from(steps)]).collect()
        } else {
            let mut o = Vec::new();
            for k in -steps..=steps {
                for l in -steps..=steps {
                    o.push(vec![radius[0] * f64::from(k) / f64::from(steps), radius[1] * f64::from(l) / f64::from(steps)]);
                }
            }
            o
        };
        for o in offsets {
            let y: Vec<f64> = center.iter().zip(&o).map(|(c, d)| c + d).collect();
            if let ExtReal::Finite(w) = value_at(&y) {
                if w < v {
                    v = w;
                    u = y;
                }
            }
        }
        radius.iter_mut().for_each(|r| *r *= 0.5);
        if radius.iter().all(|r| *r < 1e-13) {
            break;
        }
    }
    let multiplier = g.gradient(&m.apply(&u));
    Ok(CompositeMin { point: u, value: v, multiplier })
}
