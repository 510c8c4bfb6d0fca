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

use super::legendre;
use crate::linalg::{dot, max_abs_entry, norm2, sym_eigen};
use crate::{Error, ExtReal, GridFunction, Result};

/// Relative slack used when testing membership in a closed set, so that
/// points produced by floating-point solvers on the boundary stay inside.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
            NormKind::L2 => norm2(x),
            NormKind::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn dual(self) -> NormKind {
        match self {
            NormKind::L1 => NormKind::Linf,
            NormKind::L2 => NormKind::L2,
            NormKind::Linf => NormKind::L1,
        }
    }
}

/// An extended-real function `R^d → R ∪ {+∞}`, either in closed form or
/// sampled on a grid.
///
/// Separable variants (`AbsValue`, `Entropy`, interval indicators) act on
/// every coordinate and sum the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionDescriptor {
    /// `½(Ax|x) + (b|x) + c` with `A` symmetric.
    Quadratic { a: Vec<Vec<f64>>, b: Vec<f64>, c: f64 },
    /// `(weight/p)‖x‖₂^p`, `p > 1`.
    NormPower { p: f64, weight: f64 },
    /// `Σ|x_i|`.
    AbsValue,
    /// `‖x‖` for the chosen norm.
    Norm { kind: NormKind },
    /// `Σ x_i log x_i` on `x ≥ 0`.
    Entropy,
    /// `√(1 + |x|²)`.
    MinimalSurface,
    /// Indicator of `[a, b]` in every coordinate.
    IndicatorInterval { a: f64, b: f64 },
    /// Indicator of a product of intervals; unbounded sides are `null` in JSON.
    IndicatorBox {
        #[serde(with = "bounds")]
        lower: Vec<f64>,
        #[serde(with = "bounds")]
        upper: Vec<f64>,
    },
    /// Indicator of `{‖x‖ ≤ radius}`.
    IndicatorBall { radius: f64, norm: NormKind },
    /// Values on grid nodes, interpolated between them.
    Sampled { function: GridFunction },
    /// `inner(x) + (slope|x) + offset`.
    AffineTilt { inner: Box<FunctionDescriptor>, slope: Vec<f64>, offset: f64 },
    /// The conjugate of `of`, evaluated through `of`'s closed-form conjugate.
    Conjugate { of: Box<FunctionDescriptor> },
    /// The improper constant `+∞`.
    PlusInfinity,
}

mod bounds {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            if x.is_finite() {
                seq.serialize_element(&Some(*x))?;
            } else {
                seq.serialize_element(&None::<f64>)?;
            }
        }
        seq.end()
    }

    // `null` is read as -inf in lower bounds and +inf in upper bounds; the
    // sign is fixed up by `FunctionDescriptor::validate`.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
    }
}

use FunctionDescriptor as F;

impl FunctionDescriptor {
    pub fn quadratic(a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> Result<Self> {
        let f = F::Quadratic { a, b, c };
        f.validate()?;
        Ok(f)
    }

    /// `½ a x² + b x + c` on the line.
    pub fn quadratic_1d(a: f64, b: f64, c: f64) -> Self {
        F::Quadratic { a: vec![vec![a]], b: vec![b], c }
    }

    pub fn sampled(function: GridFunction) -> Self {
        F::Sampled { function }
    }

    pub fn tilt(inner: FunctionDescriptor, slope: Vec<f64>, offset: f64) -> Self {
        F::AffineTilt { inner: Box::new(inner), slope, offset }
    }

    pub fn indicator_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let mut f = F::IndicatorBox { lower, upper };
        f.normalize_bounds();
        f.validate()?;
        Ok(f)
    }

    fn normalize_bounds(&mut self) {
        if let F::IndicatorBox { lower, upper } = self {
            for l in lower.iter_mut().filter(|l| l.is_nan()) {
                *l = f64::NEG_INFINITY;
            }
            for u in upper.iter_mut().filter(|u| u.is_nan()) {
                *u = f64::INFINITY;
            }
        }
        match self {
            F::AffineTilt { inner, .. } | F::Conjugate { of: inner } => inner.normalize_bounds(),
            _ => {}
        }
    }

    /// Checks the structural invariants of every variant, and replaces JSON
    /// `null` box bounds by the matching infinities.
    pub fn validated(mut self) -> Result<Self> {
        self.normalize_bounds();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            F::Quadratic { a, b, c } => {
                let d = a.len();
                if d == 0 || a.iter().any(|row| row.len() != d) || b.len() != d {
                    return Err(Error::dim("quadratic needs a square matrix A and matching b"));
                }
                if !c.is_finite() || a.iter().flatten().chain(b).any(|v| !v.is_finite()) {
                    return Err(Error::invalid("quadratic coefficients must be finite"));
                }
                let mut asym: f64 = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        asym = asym.max((a[i][j] - a[j][i]).abs());
                    }
                }
                if asym > 1e-12 {
                    return Err(Error::invalid(format!("matrix A is not symmetric (|A - A^T| = {asym:e})")));
                }
            }
            F::NormPower { p, weight } => {
                if !(p.is_finite() && *p > 1.0) || !(weight.is_finite() && *weight > 0.0) {
                    return Err(Error::invalid("norm power needs finite p > 1 and weight > 0"));
                }
            }
            F::IndicatorInterval { a, b } => {
                if !(a.is_finite() && b.is_finite()) || a > b {
                    return Err(Error::invalid(format!("interval [{a}, {b}] is not a finite interval with a <= b")));
                }
            }
            F::IndicatorBox { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() {
                    return Err(Error::dim("box bounds must have equal, nonzero length"));
                }
                for (l, u) in lower.iter().zip(upper) {
                    if l.is_nan() || u.is_nan() || *l == f64::INFINITY || *u == f64::NEG_INFINITY || l > u {
                        return Err(Error::invalid(format!("invalid box side [{l}, {u}]")));
                    }
                }
            }
            F::IndicatorBall { radius, .. } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::invalid("ball radius must be finite and nonnegative"));
                }
            }
            F::AffineTilt { inner, slope, offset } => {
                inner.validate()?;
                if !offset.is_finite() || slope.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("affine tilt must be finite"));
                }
                if let Some(d) = inner.dim() {
                    if d != slope.len() {
                        return Err(Error::dim(format!("tilt slope has {} entries for a {d}-dimensional function", slope.len())));
                    }
                }
            }
            F::Conjugate { of } => of.validate()?,
            F::AbsValue | F::Norm { .. } | F::Entropy | F::MinimalSurface | F::Sampled { .. } | F::PlusInfinity => {}
        }
        Ok(())
    }

    /// Fixed dimension of the domain, or `None` for dimension-free variants.
    pub fn dim(&self) -> Option<usize> {
        match self {
            F::Quadratic { a, .. } => Some(a.len()),
            F::IndicatorBox { lower, .. } => Some(lower.len()),
            F::Sampled { function } => Some(function.dim()),
            F::AffineTilt { slope, .. } => Some(slope.len()),
            F::Conjugate { of } => of.dim(),
            _ => None,
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        match self.dim() {
            Some(d) if d != x.len() => Err(Error::dim(format!("point of dimension {} for a {d}-dimensional function", x.len()))),
            _ if x.is_empty() => Err(Error::dim("empty point")),
            _ if x.iter().any(|v| !v.is_finite()) => Err(Error::invalid("point coordinates must be finite")),
            _ => Ok(()),
        }
    }

    pub fn is_proper(&self) -> bool {
        match self {
            F::PlusInfinity => false,
            F::AffineTilt { inner, .. } | F::Conjugate { of: inner } => inner.is_proper(),
            _ => true,
        }
    }

    pub fn is_sampled(&self) -> bool {
        match self {
            F::Sampled { .. } => true,
            F::AffineTilt { inner, .. } | F::Conjugate { of: inner } => inner.is_sampled(),
            _ => false,
        }
    }

    /// Folds an affine tilt of a quadratic into a single quadratic.
    pub fn simplified(&self) -> FunctionDescriptor {
        match self {
            F::AffineTilt { inner, slope, offset } => match inner.simplified() {
                F::Quadratic { a, b, c } => F::Quadratic {
                    a,
                    b: b.iter().zip(slope).map(|(x, y)| x + y).collect(),
                    c: c + offset,
                },
                F::AffineTilt { inner, slope: s2, offset: o2 } => F::AffineTilt {
                    inner,
                    slope: s2.iter().zip(slope).map(|(x, y)| x + y).collect(),
                    offset: o2 + offset,
                },
                other => F::AffineTilt { inner: Box::new(other), slope: slope.clone(), offset: *offset },
            },
            other => other.clone(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> ExtReal {
        match self {
            F::Quadratic { a, b, c } => {
                let ax = crate::linalg::mat_vec(a, x);
                ExtReal::finite(0.5 * dot(&ax, x) + dot(b, x) + c)
            }
            F::NormPower { p, weight } => ExtReal::finite(weight / p * norm2(x).powf(*p)),
            F::AbsValue => ExtReal::finite(x.iter().map(|v| v.abs()).sum()),
            F::Norm { kind } => ExtReal::finite(kind.norm(x)),
            F::Entropy => {
                let mut s = 0.0;
                for &v in x {
                    if v < 0.0 {
                        return ExtReal::PosInf;
                    }
                    if v > 0.0 {
                        s += v * v.ln();
                    }
                }
                ExtReal::finite(s)
            }
            F::MinimalSurface => ExtReal::finite((1.0 + dot(x, x)).sqrt()),
            F::IndicatorInterval { a, b } => indicator(x.iter().all(|&v| in_interval(v, *a, *b))),
            F::IndicatorBox { lower, upper } => {
                indicator(x.iter().zip(lower.iter().zip(upper)).all(|(&v, (&l, &u))| in_interval(v, l, u)))
            }
            F::IndicatorBall { radius, norm } => {
                indicator(norm.norm(x) <= radius + MEMBERSHIP_TOL * (1.0 + radius))
            }
            F::Sampled { function } => function.eval(x),
            F::AffineTilt { inner, slope, offset } => inner.eval(x) + (dot(slope, x) + offset),
            F::Conjugate { of } => of.eval_conjugate(x),
            F::PlusInfinity => ExtReal::PosInf,
        }
    }

    /// `f*(y) = sup_x ⟨x, y⟩ - f(x)`.
    ///
    /// Closed forms use their known conjugates; sampled functions take the
    /// exact supremum over grid nodes. Panics on the improper constant `+∞`,
    /// whose conjugate is `-∞`.
    pub fn eval_conjugate(&self, y: &[f64]) -> ExtReal {
        match self {
            F::Quadratic { a, b, c } => quadratic_conjugate(a, b, *c, y),
            F::NormPower { p, weight } => {
                let q = p / (p - 1.0);
                ExtReal::finite(weight.powf(1.0 - q) / q * norm2(y).powf(q))
            }
            F::AbsValue => indicator(y.iter().all(|&v| in_interval(v, -1.0, 1.0))),
            F::Norm { kind } => indicator(kind.dual().norm(y) <= 1.0 + 2.0 * MEMBERSHIP_TOL),
            F::Entropy => ExtReal::finite(y.iter().map(|v| (v - 1.0).exp()).sum()),
            F::MinimalSurface => {
                let r2 = dot(y, y);
                if r2 <= 1.0 {
                    ExtReal::finite(-(1.0 - r2).sqrt())
                } else {
                    ExtReal::PosInf
                }
            }
            F::IndicatorInterval { a, b } => ExtReal::finite(y.iter().map(|v| (a * v).max(b * v)).sum()),
            F::IndicatorBox { lower, upper } => box_support(lower, upper, y),
            F::IndicatorBall { radius, norm } => ExtReal::finite(radius * norm.dual().norm(y)),
            F::Sampled { function } => sampled_conjugate(function, y),
            F::AffineTilt { inner, slope, offset } => {
                let shifted: Vec<f64> = y.iter().zip(slope).map(|(a, b)| a - b).collect();
                inner.eval_conjugate(&shifted) - *offset
            }
            F::Conjugate { of } => match of.as_ref() {
                F::Sampled { function } => sampled_envelope(function, y),
                other if other.is_sampled() => {
                    // tilts of sampled data: fold the tilt into the samples
                    let inner = other.resampled().expect("sampled descriptor resamples");
                    F::Conjugate { of: Box::new(inner) }.eval_conjugate(y)
                }
                other => other.eval(y),
            },
            F::PlusInfinity => panic!("the conjugate of the constant +inf is -inf"),
        }
    }

    /// Evaluates a descriptor built on sampled data onto its own grid, so
    /// that tilts and conjugate wrappers of samples become plain samples.
    pub(crate) fn resampled(&self) -> Option<FunctionDescriptor> {
        match self {
            F::Sampled { .. } => Some(self.clone()),
            F::AffineTilt { inner, .. } => {
                let F::Sampled { function } = inner.resampled()? else { return None };
                let values = (0..function.len()).map(|k| self.eval(&function.node(k))).collect();
                GridFunction::new(function.axes().to_vec(), values).ok().map(F::sampled)
            }
            _ => None,
        }
    }

    /// Gradient at `x` when the function is differentiable there.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            F::Quadratic { a, b, .. } => {
                Some(crate::linalg::mat_vec(a, x).iter().zip(b).map(|(u, v)| u + v).collect())
            }
            F::NormPower { p, weight } => {
                let r = norm2(x);
                if r == 0.0 {
                    return Some(vec![0.0; x.len()]);
                }
                let s = weight * r.powf(p - 2.0);
                Some(x.iter().map(|v| s * v).collect())
            }
            F::AbsValue => x.iter().all(|v| *v != 0.0).then(|| x.iter().map(|v| v.signum()).collect()),
            F::Norm { kind } => norm_gradient(*kind, x),
            F::Entropy => x.iter().all(|v| *v > 0.0).then(|| x.iter().map(|v| v.ln() + 1.0).collect()),
            F::MinimalSurface => {
                let s = (1.0 + dot(x, x)).sqrt();
                Some(x.iter().map(|v| v / s).collect())
            }
            F::IndicatorInterval { a, b } => {
                x.iter().all(|v| v > a && v < b).then(|| vec![0.0; x.len()])
            }
            F::IndicatorBox { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| v > l && v < u)
                .then(|| vec![0.0; x.len()]),
            F::IndicatorBall { radius, norm } => (norm.norm(x) < *radius).then(|| vec![0.0; x.len()]),
            F::AffineTilt { inner, slope, .. } => {
                inner.gradient(x).map(|g| g.iter().zip(slope).map(|(u, v)| u + v).collect())
            }
            F::Conjugate { of } => match of.as_ref() {
                F::Entropy => Some(x.iter().map(|v| (v - 1.0).exp()).collect()),
                F::MinimalSurface => {
                    let r2 = dot(x, x);
                    (r2 < 1.0).then(|| x.iter().map(|v| v / (1.0 - r2).sqrt()).collect())
                }
                F::IndicatorInterval { a, b } => {
                    x.iter().all(|v| *v != 0.0 || a == b).then(|| x.iter().map(|&v| if v > 0.0 { *b } else { *a }).collect())
                }
                F::Quadratic { .. } | F::NormPower { .. } | F::AffineTilt { .. } => {
                    match super::conjugate_closed(of).ok()? {
                        F::Conjugate { .. } | F::PlusInfinity => None,
                        named => named.gradient(x),
                    }
                }
                _ => None,
            },
            F::Sampled { .. } | F::PlusInfinity => None,
        }
    }
}

fn indicator(inside: bool) -> ExtReal {
    if inside {
        ExtReal::ZERO
    } else {
        ExtReal::PosInf
    }
}

fn in_interval(v: f64, a: f64, b: f64) -> bool {
    let lo = if a.is_finite() { a - MEMBERSHIP_TOL * (1.0 + a.abs()) } else { a };
    let hi = if b.is_finite() { b + MEMBERSHIP_TOL * (1.0 + b.abs()) } else { b };
    v >= lo && v <= hi
}

fn norm_gradient(kind: NormKind, x: &[f64]) -> Option<Vec<f64>> {
    match kind {
        NormKind::L2 => {
            let r = norm2(x);
            (r > 0.0).then(|| x.iter().map(|v| v / r).collect())
        }
        NormKind::L1 => x.iter().all(|v| *v != 0.0).then(|| x.iter().map(|v| v.signum()).collect()),
        NormKind::Linf => {
            let m = NormKind::Linf.norm(x);
            let hits: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() == m).collect();
            if m == 0.0 || hits.len() != 1 {
                return None;
            }
            let mut g = vec![0.0; x.len()];
            g[hits[0]] = x[hits[0]].signum();
            Some(g)
        }
    }
}

/// Support function of a box. Unbounded sides only tolerate directions that
/// vanish up to floating-point noise.
fn box_support(lower: &[f64], upper: &[f64], y: &[f64]) -> ExtReal {
    let scale = 1.0 + y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut s = 0.0;
    for ((&l, &u), &v) in lower.iter().zip(upper).zip(y) {
        if v.abs() <= MEMBERSHIP_TOL * scale && !(l.is_finite() && u.is_finite()) {
            continue;
        }
        let bound = if v > 0.0 { u } else { l };
        if !bound.is_finite() {
            return ExtReal::PosInf;
        }
        s += bound * v;
    }
    ExtReal::finite(s)
}

fn quadratic_conjugate(a: &[Vec<f64>], b: &[f64], c: f64, y: &[f64]) -> ExtReal {
    let z: Vec<f64> = y.iter().zip(b).map(|(u, v)| u - v).collect();
    let tol = 1e-12 * max_abs_entry(a).max(1.0);
    if a.len() == 1 {
        let a = a[0][0];
        return if a < -tol {
            ExtReal::PosInf
        } else if a > tol {
            ExtReal::finite(0.5 * z[0] * z[0] / a - c)
        } else if z[0].abs() <= 1e-9 * (1.0 + y[0].abs()) {
            ExtReal::finite(-c)
        } else {
            ExtReal::PosInf
        };
    }
    let (values, vectors) = sym_eigen(a);
    if values[0] < -tol {
        return ExtReal::PosInf;
    }
    let znorm = norm2(&z);
    let mut s = 0.0;
    for (k, &lambda) in values.iter().enumerate() {
        let zk: f64 = (0..z.len()).map(|r| vectors[(r, k)] * z[r]).sum();
        if lambda > tol {
            s += 0.5 * zk * zk / lambda;
        } else if zk.abs() > 1e-9 * (1.0 + znorm) {
            return ExtReal::PosInf;
        }
    }
    ExtReal::finite(s - c)
}

fn sampled_conjugate(f: &GridFunction, y: &[f64]) -> ExtReal {
    assert_eq!(y.len(), f.dim(), "dual point dimension does not match grid function");
    let mut best = f64::NEG_INFINITY;
    for (k, v) in f.values().iter().enumerate() {
        if let Some(v) = v.value() {
            best = best.max(dot(&f.node(k), y) - v);
        }
    }
    ExtReal::finite(best)
}

/// Lower convex envelope of the sampled graph points at `x` (the biconjugate
/// of the samples), `+∞` outside the hull of the finite nodes.
fn sampled_envelope(f: &GridFunction, x: &[f64]) -> ExtReal {
    match f.axes() {
        [g] => {
            let xs = g.nodes();
            let hull = legendre::lower_hull(&xs, f.values());
            let (first, last) = (xs[hull[0]], xs[*hull.last().unwrap()]);
            let t = x[0];
            if t < first - 1e-12 * (1.0 + first.abs()) || t > last + 1e-12 * (1.0 + last.abs()) {
                return ExtReal::PosInf;
            }
            let pos = hull.partition_point(|&i| xs[i] <= t);
            if pos == 0 {
                return f.values()[hull[0]];
            }
            if pos == hull.len() {
                return f.values()[hull[pos - 1]];
            }
            let (i, j) = (hull[pos - 1], hull[pos]);
            let w = (t - xs[i]) / (xs[j] - xs[i]);
            ExtReal::finite((1.0 - w) * f.values()[i].to_f64() + w * f.values()[j].to_f64())
        }
        _ => crate::programs::convex_envelope_at(f, x),
    }
}
