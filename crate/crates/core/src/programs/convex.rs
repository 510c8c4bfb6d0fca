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

//! `inf {f(x) : g_j(x) ≤ 0}` on a box in dimension one or two, solved by
//! ascent on the Lagrangian dual `q(λ) = inf_x f(x) + Σ λ_j g_j(x)`.

use serde::{Deserialize, Serialize};

use crate::conjugate::FunctionDescriptor;
use crate::{Error, ExtReal, Grid1D, Result};

/// Objective, constraints `g_j ≤ 0`, and the search box (one grid per
/// coordinate) used for the inner minimizations and the Slater scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexProgram {
    pub f: FunctionDescriptor,
    pub g: Vec<FunctionDescriptor>,
    pub domain: Vec<Grid1D>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    pub x_bar: Vec<f64>,
    pub lambda_bar: Vec<f64>,
    /// Norm of the smallest subgradient of `f + Σ λ̄_j g_j` at `x̄`.
    pub stationarity_residual: f64,
    /// `|λ̄_j g_j(x̄)|` per constraint.
    pub complementarity_residuals: Vec<f64>,
    /// `max(0, max_j g_j(x̄))`.
    pub feasibility_residual: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub slater_point: Vec<f64>,
    pub warnings: Vec<String>,
}

const ASCENT_STEPS: usize = 200;
const BISECTION_STEPS: usize = 200;
const POLISH_CYCLES: usize = 50;

impl ConvexProgram {
    pub fn validate(&self) -> Result<()> {
        let d = self.domain.len();
        if d == 0 || d > 2 {
            return Err(Error::dim("convex programs are solved in dimension 1 or 2"));
        }
        for h in std::iter::once(&self.f).chain(&self.g) {
            h.validate()?;
            if let Some(k) = h.dim() {
                if k != d {
                    return Err(Error::dim(format!("{k}-dimensional function in a {d}-dimensional program")));
                }
            }
            check_sampled_convexity(h)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    fn lagrangian(&self, x: &[f64], lambda: &[f64]) -> ExtReal {
        let mut v = self.f.eval(x);
        for (g, l) in self.g.iter().zip(lambda) {
            if *l != 0.0 {
                match g.eval(x) {
                    ExtReal::Finite(gx) => v = v + l * gx,
                    ExtReal::PosInf => return ExtReal::PosInf,
                }
            } else if g.eval(x).is_inf() {
                return ExtReal::PosInf;
            }
        }
        v
    }

    fn nodes(&self) -> Vec<Vec<f64>> {
        match self.domain.as_slice() {
            [a] => a.nodes().into_iter().map(|x| vec![x]).collect(),
            [a, b] => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for x in a.nodes() {
                    for y in b.nodes() {
                        out.push(vec![x, y]);
                    }
                }
                out
            }
            _ => unreachable!(),
        }
    }

    /// Minimizes `x ↦ L(x, λ)` over the box: best grid node, then repeated
    /// zooming onto a shrinking local grid around the incumbent.
    fn inner_min(&self, lambda: &[f64]) -> Option<(Vec<f64>, f64)> {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for x in self.nodes() {
            if let ExtReal::Finite(v) = self.lagrangian(&x, lambda) {
                if best.as_ref().is_none_or(|b| v < b.1) {
                    best = Some((x, v));
                }
            }
        }
        let (mut x, mut v) = best?;
        let mut radius: Vec<f64> = self.domain.iter().map(|g| 2.0 * g.spacing()).collect();
        let steps = 10i32;
        for _ in 0..80 {
            let center = x.clone();
            let mut offsets = vec![vec![]];
            for r in &radius {
                let mut next = Vec::new();
                for o in &offsets {
                    for k in -steps..=steps {
                        let mut o2: Vec<f64> = o.clone();
                        o2.push(r * f64::from(k) / f64::from(steps));
                        next.push(o2);
                    }
                }
                offsets = next;
            }
            for o in offsets {
                let y: Vec<f64> = center
                    .iter()
                    .zip(&o)
                    .zip(&self.domain)
                    .map(|((c, d), g)| (c + d).clamp(g.lo(), g.hi()))
                    .collect();
                if let ExtReal::Finite(w) = self.lagrangian(&y, lambda) {
                    if w < v {
                        v = w;
                        x = y;
                    }
                }
            }
            for r in radius.iter_mut() {
                *r *= 0.5;
            }
            if radius.iter().all(|r| *r < 1e-13) {
                break;
            }
        }
        Some((x, v))
    }

    fn supergradient(&self, x: &[f64]) -> Vec<f64> {
        self.g.iter().map(|g| g.eval(x).to_f64()).collect()
    }
}

/// Second differences of sampled descriptors along each axis must be
/// nonnegative (up to rounding).
fn check_sampled_convexity(h: &FunctionDescriptor) -> Result<()> {
    let Some(FunctionDescriptor::Sampled { function }) = h.resampled() else {
        return Ok(());
    };
    let v = function.values();
    let check = |a: ExtReal, b: ExtReal, c: ExtReal| -> Result<()> {
        if let (Some(a), Some(b), Some(c)) = (a.value(), b.value(), c.value()) {
            if a + c - 2.0 * b < -1e-9 * (1.0 + a.abs() + b.abs() + c.abs()) {
                return Err(Error::invalid("sampled program data is not convex"));
            }
        }
        Ok(())
    };
    match function.axes() {
        [a] => {
            for i in 0..a.len() - 2 {
                check(v[i], v[i + 1], v[i + 2])?;
            }
        }
        [a, b] => {
            let nb = b.len();
            for i in 0..a.len() {
                for j in 0..nb {
                    let k = i * nb + j;
                    if j + 2 < nb {
                        check(v[k], v[k + 1], v[k + 2])?;
                    }
                    if i + 2 < a.len() {
                        check(v[k], v[k + nb], v[k + 2 * nb])?;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Grid node with every `g_j < -1e-9` and `f` finite at the node and its
/// grid neighbours, maximizing `min_j -g_j`; `None` when there is none.
pub fn slater_check(cp: &ConvexProgram) -> Option<Vec<f64>> {
    let nodes = cp.nodes();
    let spacing: Vec<f64> = cp.domain.iter().map(Grid1D::spacing).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x in nodes {
        let mut margin = f64::INFINITY;
        for g in &cp.g {
            margin = margin.min(-g.eval(&x).to_f64());
        }
        if cp.g.is_empty() {
            margin = 0.0;
        } else if !(margin > 1e-9) {
            continue;
        }
        let finite_near = (0..x.len()).all(|i| {
            [-1.0, 1.0].iter().all(|s| {
                let mut y = x.clone();
                y[i] = (y[i] + s * spacing[i]).clamp(cp.domain[i].lo(), cp.domain[i].hi());
                cp.f.eval(&y).is_finite()
            })
        });
        if finite_near && cp.f.eval(&x).is_finite() && best.as_ref().is_none_or(|b| margin > b.1) {
            best = Some((x, margin));
        }
    }
    best.map(|b| b.0)
}

/// `q(λ) = inf_x L(x, λ)` over the search box and a minimizer.
pub fn lagrangian_dual_value(cp: &ConvexProgram, lambda: &[f64]) -> Result<(f64, Vec<f64>)> {
    cp.validate()?;
    if lambda.len() != cp.g.len() || lambda.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::invalid("multipliers must be nonnegative, one per constraint"));
    }
    cp.inner_min(lambda).map(|(x, v)| (v, x)).ok_or(Error::Improper)
}

/// Certifies the program through its Lagrangian dual.
///
/// A short projected supergradient ascent with steps `1/k` locates the
/// multipliers; each coordinate is then polished by bisection on the sign
/// of its supergradient, which is monotone along a coordinate because `q`
/// is concave.
pub fn solve_convex_program(cp: &ConvexProgram) -> Result<KktCertificate> {
    cp.validate()?;
    let slater = slater_check(cp).ok_or(Error::SlaterNotVerified)?;
    let m = cp.g.len();
    let mut lambda = vec![0.0; m];
    let inner = |l: &[f64]| cp.inner_min(l).ok_or(Error::Improper);

    for k in 1..=ASCENT_STEPS {
        let (x, _) = inner(&lambda)?;
        let s = cp.supergradient(&x);
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for (l, g) in lambda.iter_mut().zip(&s) {
            *l = (*l + g / (k as f64 * norm)).max(0.0);
        }
    }

    for _ in 0..POLISH_CYCLES {
        let before = lambda.clone();
        for j in 0..m {
            lambda[j] = bisect_coordinate(cp, &lambda, j)?;
        }
        let moved = lambda.iter().zip(&before).fold(0.0_f64, |a, (u, v)| a.max((u - v).abs()));
        if moved <= 1e-12 * (1.0 + lambda.iter().fold(0.0_f64, |a, v| a.max(v.abs()))) {
            break;
        }
    }

    let (x_bar, dual_value) = inner(&lambda)?;
    let gx = cp.supergradient(&x_bar);
    let primal_value = cp.f.eval(&x_bar).to_f64();
    let mut warnings = Vec::new();
    for (i, g) in cp.domain.iter().enumerate() {
        if (x_bar[i] - g.lo()).abs() < g.spacing() || (x_bar[i] - g.hi()).abs() < g.spacing() {
            warnings.push(format!(
                "coercivity: the minimizer touches the search box in coordinate {i}; the box may truncate the program"
            ));
        }
    }
    Ok(KktCertificate {
        stationarity_residual: stationarity(cp, &x_bar, &lambda),
        complementarity_residuals: lambda.iter().zip(&gx).map(|(l, g)| (l * g).abs()).collect(),
        feasibility_residual: gx.iter().fold(0.0_f64, |a, g| a.max(*g)),
        gap: primal_value - dual_value,
        x_bar,
        lambda_bar: lambda,
        primal_value,
        dual_value,
        slater_point: slater,
        warnings,
    })
}

/// Maximizes `q` along coordinate `j`: the `j`-th supergradient
/// `g_j(x(λ))` is nonincreasing in `λ_j`, so its sign change is bracketed
/// and bisected.
fn bisect_coordinate(cp: &ConvexProgram, lambda: &[f64], j: usize) -> Result<f64> {
    let slope = |t: f64| -> Result<f64> {
        let mut l = lambda.to_vec();
        l[j] = t;
        let (x, _) = cp.inner_min(&l).ok_or(Error::Improper)?;
        Ok(cp.g[j].eval(&x).to_f64())
    };
    if slope(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = lambda[j].max(1.0);
    while slope(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::invalid("multiplier diverges: the program looks infeasible"));
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * (1.0 + hi) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `max(0, -min_{|d| = 1} L'(x; d))`, the norm of the least-norm
/// subgradient, from one-sided difference quotients along sampled unit
/// directions.
fn stationarity(cp: &ConvexProgram, x: &[f64], lambda: &[f64]) -> f64 {
    let base = cp.lagrangian(x, lambda).to_f64();
    let t = 1e-7;
    let directions: Vec<Vec<f64>> = if x.len() == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..720)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 360.0;
                vec![a.cos(), a.sin()]
            })
            .collect()
    };
    let mut worst: f64 = 0.0;
    for d in directions {
        let y: Vec<f64> = x.iter().zip(&d).map(|(u, v)| u + t * v).collect();
        if let ExtReal::Finite(v) = cp.lagrangian(&y, lambda) {
            worst = worst.max(-(v - base) / t);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::NormKind;

    fn line(lo: f64, hi: f64, n: usize) -> Grid1D {
        Grid1D::new(lo, hi, n).unwrap()
    }

    #[test]
    fn active_affine_constraint() {
        let cp = ConvexProgram {
            f: FunctionDescriptor::quadratic_1d(2.0, 0.0, 0.0),
            g: vec![FunctionDescriptor::quadratic_1d(0.0, -1.0, 1.0)],
            domain: vec![line(0.0, 3.0, 31)],
        };
        let k = solve_convex_program(&cp).unwrap();
        assert!((k.x_bar[0] - 1.0).abs() < 1e-6, "{k:?}");
        assert!((k.lambda_bar[0] - 2.0).abs() < 1e-6, "{k:?}");
        assert!(k.stationarity_residual < 1e-4 && k.complementarity_residuals[0] < 1e-4);
    }

    #[test]
    fn inactive_constraint_has_zero_multiplier() {
        let cp = ConvexProgram {
            f: FunctionDescriptor::quadratic_1d(2.0, 0.0, 0.0),
            g: vec![FunctionDescriptor::quadratic_1d(0.0, 1.0, -1.0)],
            domain: vec![line(-3.0, 3.0, 61)],
        };
        let k = solve_convex_program(&cp).unwrap();
        assert_eq!(k.lambda_bar, vec![0.0]);
        assert!(k.x_bar[0].abs() < 1e-9);
    }

    #[test]
    fn slater_fails_for_a_touching_constraint() {
        let cp = ConvexProgram {
            f: FunctionDescriptor::quadratic_1d(2.0, 0.0, 0.0),
            g: vec![FunctionDescriptor::quadratic_1d(2.0, 0.0, 0.0)],
            domain: vec![line(-1.0, 1.0, 21)],
        };
        assert!(slater_check(&cp).is_none());
        assert_eq!(solve_convex_program(&cp).unwrap_err(), Error::SlaterNotVerified);
    }

    #[test]
    fn box_constraint_in_the_plane_has_origin_as_slater_point() {
        let cp = ConvexProgram {
            f: FunctionDescriptor::quadratic(vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![-4.0, -4.0], 8.0).unwrap(),
            g: vec![FunctionDescriptor::tilt(FunctionDescriptor::Norm { kind: NormKind::Linf }, vec![0.0, 0.0], -1.0)],
            domain: vec![line(-3.0, 3.0, 31), line(-3.0, 3.0, 31)],
        };
        assert_eq!(slater_check(&cp).unwrap(), vec![0.0, 0.0]);
    }
}
