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

//! Legendre–Fenchel conjugates, biconjugates and subdifferentials.

mod descriptor;
mod legendre;
mod subdiff;

use serde::{Deserialize, Serialize};

pub use descriptor::{FunctionDescriptor, NormKind, MEMBERSHIP_TOL};
pub use subdiff::{subdifferential, EmptyReason, SubdiffSet};


use crate::linalg::{dot, sym_eigen};
use crate::{Error, ExtReal, Grid1D, GridFunction, Result};
use FunctionDescriptor as F;

/// Conjugate of `f`.
///
/// Closed forms map to their known conjugates (wrapped in
/// [`FunctionDescriptor::Conjugate`] when there is no named variant).
/// Sampled functions are transformed onto `dual_grid`, or onto
/// [`default_dual_grid`] when it is absent.
pub fn conjugate(f: &FunctionDescriptor, dual_grid: Option<&[Grid1D]>) -> Result<FunctionDescriptor> {
    f.validate()?;
    if !f.is_proper() {
        return Err(Error::Improper);
    }
    if f.is_sampled() {
        let Some(F::Sampled { function }) = f.resampled() else {
            // conjugate of a conjugate of samples: the closed convex envelope
            return match f {
                F::Conjugate { of } => biconjugate(of),
                _ => Err(Error::invalid("unsupported combination of sampled descriptors")),
            };
        };
        let dual = match dual_grid {
            Some(axes) => axes.to_vec(),
            None => default_dual_grid(&function),
        };
        return legendre::conjugate_grid(&function, &dual).map(F::sampled);
    }
    conjugate_closed(f)
}

pub(crate) fn conjugate_closed(f: &FunctionDescriptor) -> Result<FunctionDescriptor> {
    let wrap = || F::Conjugate { of: Box::new(f.clone()) };
    Ok(match f.simplified() {
        F::PlusInfinity => return Err(Error::Improper),
        F::Quadratic { a, b, c } => quadratic_conjugate(&a, &b, c).unwrap_or_else(wrap),
        F::NormPower { p, weight } => {
            let q = p / (p - 1.0);
            F::NormPower { p: q, weight: weight.powf(1.0 - q) }
        }
        F::AbsValue => F::IndicatorInterval { a: -1.0, b: 1.0 },
        F::Norm { kind } => F::IndicatorBall { radius: 1.0, norm: kind.dual() },
        F::IndicatorBall { radius, norm } if radius == 1.0 => F::Norm { kind: norm.dual() },
        F::IndicatorInterval { a, b } if a == -1.0 && b == 1.0 => F::AbsValue,
        F::Conjugate { of } => *of,
        _ => wrap(),
    })
}

/// Conjugate descriptor without sampling onto a dual grid: closed forms as
/// in [`conjugate`], samples wrapped lazily (evaluated by exact suprema).
pub(crate) fn conjugate_closed_or_lazy(f: &FunctionDescriptor) -> Result<FunctionDescriptor> {
    if f.is_sampled() {
        return Ok(F::Conjugate { of: Box::new(f.clone()) });
    }
    conjugate_closed(f)
}

/// Closed-form conjugate of `½(Ax|x) + (b|x) + c`: a quadratic when `A` is
/// positive definite, `+∞` when `A` has a negative eigenvalue, and `None`
/// (lazy evaluation) in the singular positive semidefinite case.
fn quadratic_conjugate(a: &[Vec<f64>], b: &[f64], c: f64) -> Option<FunctionDescriptor> {
    let d = a.len();
    let tol = 1e-12 * crate::linalg::max_abs_entry(a).max(1.0);
    let (values, vectors) = sym_eigen(a);
    if values[0] < -tol {
        return Some(F::PlusInfinity);
    }
    if values[0] <= tol {
        return None;
    }
    let mut inv = vec![vec![0.0; d]; d];
    for (k, lambda) in values.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                inv[i][j] += vectors[(i, k)] * vectors[(j, k)] / lambda;
            }
        }
    }
    if d == 1 {
        inv[0][0] = 1.0 / a[0][0];
    }
    for i in 0..d {
        for j in 0..i {
            let m = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = m;
            inv[j][i] = m;
        }
    }
    let inv_b = crate::linalg::mat_vec(&inv, b);
    Some(F::Quadratic {
        b: inv_b.iter().map(|v| -v).collect(),
        c: 0.5 * dot(b, &inv_b) - c,
        a: inv,
    })
}

/// Dual grid covering the slopes of `f`: the hull slope range (1D) or the
/// finite-difference slope range per axis (2D), widened by 10%, with the
/// primal node count.
pub fn default_dual_grid(f: &GridFunction) -> Vec<Grid1D> {
    legendre::default_dual_axes(f)
}

/// Discrete Legendre transform of samples onto a dual grid.
pub fn conjugate_samples(f: &GridFunction, dual: &[Grid1D]) -> Result<GridFunction> {
    legendre::conjugate_grid(f, dual)
}

/// Samples `f*` on the nodes of `dual`, through the closed form when there
/// is one and the discrete transform otherwise.
pub fn sample_conjugate(f: &FunctionDescriptor, dual: &[Grid1D]) -> Result<GridFunction> {
    if let Some(F::Sampled { function }) = f.resampled() {
        return legendre::conjugate_grid(&function, dual);
    }
    if !f.is_proper() {
        return Err(Error::Improper);
    }
    let values = match dual {
        [g] => g.nodes().iter().map(|&y| f.eval_conjugate(&[y])).collect(),
        [g0, g1] => {
            let mut v = Vec::with_capacity(g0.len() * g1.len());
            for y0 in g0.nodes() {
                for y1 in g1.nodes() {
                    v.push(f.eval_conjugate(&[y0, y1]));
                }
            }
            v
        }
        _ => return Err(Error::dim("dual grids are 1D or 2D")),
    };
    GridFunction::new(dual.to_vec(), values)
}

/// Lower convex envelope of 1D samples on their own grid: the hull
/// interpolated at every node between the outermost finite nodes, `+∞`
/// outside them. This is the biconjugate of the samples.
pub fn convex_envelope(f: &GridFunction) -> Result<GridFunction> {
    let grid = *f.grid();
    let xs = grid.nodes();
    let hull = legendre::lower_hull(&xs, f.values());
    let fv = |i: usize| f.values()[i].to_f64();
    let mut out = vec![ExtReal::PosInf; xs.len()];
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        out[i] = f.values()[i];
        for (k, slot) in out.iter_mut().enumerate().take(j).skip(i + 1) {
            let t = (xs[k] - xs[i]) / (xs[j] - xs[i]);
            *slot = ExtReal::finite(fv(i) + t * (fv(j) - fv(i)));
        }
    }
    let last = *hull.last().ok_or(Error::Improper)?;
    out[last] = f.values()[last];
    GridFunction::on_line(grid, out)
}

/// `f**`, the closed convex envelope of `f`.
///
/// 1D samples get the exact envelope on their own grid; 2D samples are
/// conjugated twice through default dual grids and read back on the primal
/// grid, which is exact up to the dual grid resolution.
pub fn biconjugate(f: &FunctionDescriptor) -> Result<FunctionDescriptor> {
    f.validate()?;
    if !f.is_proper() {
        return Err(Error::Improper);
    }
    if let Some(F::Sampled { function }) = f.resampled() {
        if function.dim() == 1 {
            return convex_envelope(&function).map(F::sampled);
        }
        let dual = default_dual_grid(&function);
        let star = legendre::conjugate_grid(&function, &dual)?;
        return legendre::conjugate_grid(&star, function.axes()).map(F::sampled);
    }
    match conjugate_closed(f)? {
        F::PlusInfinity => Err(Error::NoAffineMinorant),
        star => conjugate_closed(&star),
    }
}

/// `f(x) + f*(y) - ⟨x, y⟩`, `+∞` when either term is.
pub fn fenchel_gap(f: &FunctionDescriptor, x: &[f64], y: &[f64]) -> ExtReal {
    if !f.is_proper() {
        return ExtReal::PosInf;
    }
    let fx = f.eval(x);
    if fx.is_inf() {
        return ExtReal::PosInf;
    }
    match f.eval_conjugate(y) {
        ExtReal::PosInf => ExtReal::PosInf,
        ExtReal::Finite(s) => fx + (s - dot(x, y)),
    }
}

/// `f*(0) = -inf f`, with a flag telling whether `f` is bounded below.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinViaConjugate {
    pub value: ExtReal,
    pub bounded_below: bool,
}

pub fn check_min_via_conjugate(f: &FunctionDescriptor) -> Result<MinViaConjugate> {
    f.validate()?;
    if !f.is_proper() {
        return Err(Error::Improper);
    }
    let zero = vec![0.0; f.dim().unwrap_or(1)];
    let value = f.eval_conjugate(&zero);
    Ok(MinViaConjugate { value, bounded_below: value.is_finite() })
}
