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

use serde::{Deserialize, Serialize};

use super::{default_dual_grid, sample_conjugate, FunctionDescriptor, NormKind};
use crate::linalg::dot;
use crate::{Error, ExtReal, Grid1D, Result};
use FunctionDescriptor as F;

/// Why a subdifferential came back empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    OutOfDomain,
    NoSubgradient,
}

/// A subdifferential `∂f(x)` in 1D (interval, possibly unbounded) or 2D
/// (polygon given by its vertices in counter-clockwise order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubdiffSet {
    Singleton { point: Vec<f64> },
    Interval { lo: f64, hi: f64, tol: f64 },
    Polytope { vertices: Vec<[f64; 2]>, tol: f64 },
    Empty { reason: EmptyReason },
}

impl SubdiffSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SubdiffSet::Empty { .. })
    }

    /// Membership with an absolute slack.
    pub fn contains(&self, y: &[f64], slack: f64) -> bool {
        match self {
            SubdiffSet::Singleton { point } => {
                point.len() == y.len() && point.iter().zip(y).all(|(p, q)| (p - q).abs() <= slack)
            }
            SubdiffSet::Interval { lo, hi, .. } => y.len() == 1 && y[0] >= lo - slack && y[0] <= hi + slack,
            SubdiffSet::Polytope { vertices, .. } => y.len() == 2 && polygon_contains(vertices, [y[0], y[1]], slack),
            SubdiffSet::Empty { .. } => false,
        }
    }
}

/// `∂f(x)`.
///
/// Closed forms return exact sets: the gradient where `f` is differentiable,
/// and the known interval, box or normal cone at kinks. Other cases return
/// the level set `{y : f(x) + f*(y) - ⟨x, y⟩ ≤ tol}`: exactly for 1D
/// samples (clipped to the default dual grid range), and by scanning the
/// nodes of a dual grid otherwise.
pub fn subdifferential(f: &FunctionDescriptor, x: &[f64], tol: f64) -> Result<SubdiffSet> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("subdifferential tolerance must be positive"));
    }
    f.validate()?;
    f.check_point(x)?;
    if !f.is_proper() || f.eval(x).is_inf() {
        return Ok(SubdiffSet::Empty { reason: EmptyReason::OutOfDomain });
    }
    if let Some(set) = exact(&f.simplified(), x, tol) {
        return Ok(set);
    }
    if let Some(g) = f.gradient(x) {
        return Ok(SubdiffSet::Singleton { point: g });
    }
    scan(f, x, tol)
}

fn exact(f: &FunctionDescriptor, x: &[f64], tol: f64) -> Option<SubdiffSet> {
    let d = x.len();
    match f {
        F::Sampled { function } if function.dim() == 1 => Some(sampled_level_set(function, x[0], tol)),
        F::AffineTilt { inner, slope, .. } => {
            let base = exact(inner, x, tol).or_else(|| inner.gradient(x).map(|point| SubdiffSet::Singleton { point }))?;
            Some(shift(base, slope))
        }
        F::AbsValue | F::Norm { kind: NormKind::L1 } if x.contains(&0.0) => {
            let sides: Vec<(f64, f64)> =
                x.iter().map(|&v| if v == 0.0 { (-1.0, 1.0) } else { (v.signum(), v.signum()) }).collect();
            Some(product(&sides))
        }
        F::Norm { .. } if d == 1 && x[0] == 0.0 => Some(SubdiffSet::Interval { lo: -1.0, hi: 1.0, tol: 0.0 }),
        F::Norm { kind: NormKind::Linf } if d == 2 && x.iter().all(|v| *v == 0.0) => Some(SubdiffSet::Polytope {
            vertices: vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            tol: 0.0,
        }),
        F::IndicatorInterval { a, b } => {
            let sides: Vec<(f64, f64)> = x.iter().map(|&v| normal_cone(v, *a, *b)).collect();
            Some(product(&sides))
        }
        F::IndicatorBox { lower, upper } => {
            let sides: Vec<(f64, f64)> =
                x.iter().zip(lower.iter().zip(upper)).map(|(&v, (&l, &u))| normal_cone(v, l, u)).collect();
            Some(product(&sides))
        }
        F::IndicatorBall { radius, .. } if d == 1 => Some(product(&[normal_cone(x[0], -radius, *radius)])),
        F::Conjugate { of } if d == 1 && x[0] == 0.0 => match of.as_ref() {
            F::IndicatorInterval { a, b } => Some(SubdiffSet::Interval { lo: *a, hi: *b, tol: 0.0 }),
            F::IndicatorBall { radius, .. } => Some(SubdiffSet::Interval { lo: -radius, hi: *radius, tol: 0.0 }),
            _ => None,
        },
        _ => None,
    }
}

/// Normal cone of `[a, b]` at `v`, as an interval of multipliers.
fn normal_cone(v: f64, a: f64, b: f64) -> (f64, f64) {
    let near = |p: f64| p.is_finite() && (v - p).abs() <= super::MEMBERSHIP_TOL * (1.0 + p.abs());
    let lo = if near(a) { f64::NEG_INFINITY } else { 0.0 };
    let hi = if near(b) { f64::INFINITY } else { 0.0 };
    (lo, hi)
}

fn product(sides: &[(f64, f64)]) -> SubdiffSet {
    if sides.iter().all(|(l, h)| l == h) {
        return SubdiffSet::Singleton { point: sides.iter().map(|s| s.0).collect() };
    }
    match sides {
        [(lo, hi)] => SubdiffSet::Interval { lo: *lo, hi: *hi, tol: 0.0 },
        [(l0, h0), (l1, h1)] => {
            let pts = [[*l0, *l1], [*h0, *l1], [*h0, *h1], [*l0, *h1]];
            SubdiffSet::Polytope { vertices: convex_hull(&pts), tol: 0.0 }
        }
        // only reached for boxes of dimension > 2; keep the corner sides
        _ => SubdiffSet::Singleton { point: sides.iter().map(|s| 0.5 * (s.0 + s.1)).collect() },
    }
}

fn shift(set: SubdiffSet, s: &[f64]) -> SubdiffSet {
    match set {
        SubdiffSet::Singleton { point } => SubdiffSet::Singleton { point: point.iter().zip(s).map(|(a, b)| a + b).collect() },
        SubdiffSet::Interval { lo, hi, tol } => SubdiffSet::Interval { lo: lo + s[0], hi: hi + s[0], tol },
        SubdiffSet::Polytope { vertices, tol } => SubdiffSet::Polytope {
            vertices: vertices.iter().map(|v| [v[0] + s[0], v[1] + s[1]]).collect(),
            tol,
        },
        empty => empty,
    }
}

/// `{y : f(x) + max_i (x_i y - f_i) - x y ≤ tol}` for 1D samples. Every
/// finite node contributes one half-line constraint on `y`.
fn sampled_level_set(f: &crate::GridFunction, x: f64, tol: f64) -> SubdiffSet {
    let fx = f.eval(&[x]).to_f64();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (k, v) in f.values().iter().enumerate() {
        let Some(fk) = v.value() else { continue };
        let xk = f.grid().node(k);
        let bound = (tol + fk - fx) / (xk - x);
        if xk > x {
            hi = hi.min(bound);
        } else if xk < x {
            lo = lo.max(bound);
        } else if fx - fk > tol {
            lo = f64::INFINITY;
        }
    }
    let range = default_dual_grid(f)[0];
    let (lo, hi) = (lo.max(range.lo()), hi.min(range.hi()));
    if lo > hi {
        SubdiffSet::Empty { reason: EmptyReason::NoSubgradient }
    } else {
        SubdiffSet::Interval { lo, hi, tol }
    }
}

fn scan(f: &FunctionDescriptor, x: &[f64], tol: f64) -> Result<SubdiffSet> {
    let d = x.len();
    if d > 2 {
        return Err(Error::dim("subdifferential scans are limited to 1D and 2D"));
    }
    let dual: Vec<Grid1D> = match f.resampled() {
        Some(F::Sampled { function }) => default_dual_grid(&function),
        _ => {
            let r = 10.0 * (1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
            let n = if d == 1 { 4001 } else { 201 };
            vec![Grid1D::new(-r, r, n)?; d]
        }
    };
    let star = sample_conjugate(f, &dual)?;
    let fx = f.eval(x).to_f64();
    let mut passing: Vec<Vec<f64>> = Vec::new();
    for (k, s) in star.values().iter().enumerate() {
        if let ExtReal::Finite(s) = s {
            let y = star.node(k);
            if fx + s - dot(x, &y) <= tol {
                passing.push(y);
            }
        }
    }
    if passing.is_empty() {
        return Ok(SubdiffSet::Empty { reason: EmptyReason::NoSubgradient });
    }
    Ok(if d == 1 {
        let lo = passing.iter().map(|y| y[0]).fold(f64::INFINITY, f64::min);
        let hi = passing.iter().map(|y| y[0]).fold(f64::NEG_INFINITY, f64::max);
        SubdiffSet::Interval { lo, hi, tol }
    } else {
        let pts: Vec<[f64; 2]> = passing.iter().map(|y| [y[0], y[1]]).collect();
        SubdiffSet::Polytope { vertices: convex_hull(&pts), tol }
    })
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
pub(crate) fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn polygon_contains(vertices: &[[f64; 2]], p: [f64; 2], slack: f64) -> bool {
    match vertices.len() {
        0 => false,
        1 => (vertices[0][0] - p[0]).abs() <= slack && (vertices[0][1] - p[1]).abs() <= slack,
        n => (0..n).all(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            n == 2 && segment_distance(a, b, p) <= slack || n > 2 && cross(a, b, p) >= -slack * len
        }),
    }
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((a[0] + t * dx - p[0]).powi(2) + (a[1] + t * dy - p[1]).powi(2)).sqrt()
}
