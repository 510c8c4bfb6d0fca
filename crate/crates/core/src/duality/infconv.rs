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

use crate::conjugate::{sample_conjugate, FunctionDescriptor};
use crate::{Error, ExtReal, Grid1D, GridFunction, Result};

/// Min-plus convolution of two sampled functions, with the attaining split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfConvolution {
    pub result: GridFunction,
    /// For each result node, the index into the first operand of the
    /// attaining `y₁` (smallest index among ties), `None` where `+∞`.
    pub split: Vec<Option<usize>>,
}

/// `y ↦ inf {f(y₁) + g(y₂) : y₁ + y₂ = y}` over pairs of nodes.
///
/// Both grids must share their spacing; the result lives on the grid from
/// `lo₁ + lo₂` with `n₁ + n₂ - 1` nodes.
pub fn inf_convolution(fstar: &GridFunction, gstar: &GridFunction) -> Result<InfConvolution> {
    if fstar.dim() != 1 || gstar.dim() != 1 {
        return Err(Error::dim("infimal convolution is implemented on 1D grids"));
    }
    let (a, b) = (fstar.grid(), gstar.grid());
    let h = a.spacing();
    if (h - b.spacing()).abs() > 1e-12 * h {
        return Err(Error::GridMismatch(format!("spacings {} and {} differ", h, b.spacing())));
    }
    let n = a.len() + b.len() - 1;
    let grid = Grid1D::with_spacing(a.lo() + b.lo(), h, n)?;
    let mut values = vec![ExtReal::PosInf; n];
    let mut split = vec![None; n];
    for (i, fi) in fstar.values().iter().enumerate() {
        let Some(fi) = fi.value() else { continue };
        for (j, gj) in gstar.values().iter().enumerate() {
            let Some(gj) = gj.value() else { continue };
            let v = ExtReal::finite(fi + gj);
            if v < values[i + j] {
                values[i + j] = v;
                split[i + j] = Some(i);
            }
        }
    }
    Ok(InfConvolution { result: GridFunction::on_line(grid, values)?, split })
}

/// `(f + g)*` on a dual grid, computed both ways.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumConjugate {
    /// `f* □ g*` read at the dual nodes.
    pub via_convolution: GridFunction,
    /// Discrete conjugate of the samples of `f + g` on the primal grid.
    pub direct: GridFunction,
    /// Primal node at which the qualification was verified.
    pub qualified_at: f64,
}

/// Conjugate of `f + g` through the infimal convolution of the conjugates.
///
/// Requires a primal node where one function is finite at the node and its
/// neighbours (a grid surrogate for continuity) and the other is finite.
pub fn conjugate_of_sum(
    f: &FunctionDescriptor,
    g: &FunctionDescriptor,
    primal: &Grid1D,
    dual: &Grid1D,
) -> Result<SumConjugate> {
    for h in [f, g] {
        h.validate()?;
        if h.dim().is_some_and(|d| d != 1) {
            return Err(Error::dim("conjugate_of_sum works on the line"));
        }
    }
    let xs = primal.nodes();
    let finite = |h: &FunctionDescriptor, k: usize| h.eval(&[xs[k]]).is_finite();
    let locally_bounded = |h: &FunctionDescriptor, k: usize| {
        finite(h, k) && (k == 0 || finite(h, k - 1)) && (k + 1 == xs.len() || finite(h, k + 1))
    };
    let qualified_at = (0..xs.len())
        .find(|&k| (locally_bounded(f, k) && finite(g, k)) || (locally_bounded(g, k) && finite(f, k)))
        .map(|k| xs[k])
        .ok_or_else(|| {
            Error::QualificationViolated("no grid node where one function is locally bounded and the other finite".into())
        })?;

    let fstar = sample_conjugate(f, &[*dual])?;
    let gstar = sample_conjugate(g, &[*dual])?;
    let conv = inf_convolution(&fstar, &gstar)?;
    let via: Vec<ExtReal> = dual.nodes().iter().map(|&y| read_node(&conv.result, y)).collect();

    let sum = GridFunction::sample(*primal, |x| f.eval(&[x]) + g.eval(&[x]))?;
    let direct = crate::conjugate::conjugate_samples(&sum, &[*dual])?;
    Ok(SumConjugate { via_convolution: GridFunction::on_line(*dual, via)?, direct, qualified_at })
}

/// Value at `y`, snapping to a node when `y` is within rounding of one.
fn read_node(f: &GridFunction, y: f64) -> ExtReal {
    let g = f.grid();
    let t = (y - g.lo()) / g.spacing();
    let k = t.round();
    if (t - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < g.len() {
        f.values()[k as usize]
    } else {
        f.eval(&[y])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64, n: usize) -> Grid1D {
        Grid1D::new(lo, hi, n).unwrap()
    }

    #[test]
    fn abs_and_unit_indicator_convolve_to_a_shifted_hinge() {
        let g = line(-3.0, 3.0, 61);
        let abs = GridFunction::sample(g, |y| ExtReal::finite(y.abs())).unwrap();
        let ind = GridFunction::sample(g, |y| if y.abs() <= 1.0 + 1e-12 { ExtReal::ZERO } else { ExtReal::PosInf }).unwrap();
        let c = inf_convolution(&abs, &ind).unwrap();
        for k in 0..c.result.len() {
            let y = c.result.grid().node(k);
            let v = c.result.values()[k];
            if y.abs() > 4.0 + 1e-9 {
                // beyond the reach of the two sampled windows
                assert_eq!(v, ExtReal::PosInf);
            } else {
                assert!((v.to_f64() - (y.abs() - 1.0).max(0.0)).abs() < 1e-12, "y={y} v={v}");
            }
        }
    }

    #[test]
    fn mismatched_spacing_is_rejected() {
        let a = GridFunction::sample(line(0.0, 1.0, 11), |_| ExtReal::ZERO).unwrap();
        let b = GridFunction::sample(line(0.0, 1.0, 21), |_| ExtReal::ZERO).unwrap();
        assert!(matches!(inf_convolution(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn delta_at_zero_is_the_identity() {
        let a = GridFunction::sample(line(-1.0, 1.0, 21), |y| ExtReal::finite(y * y)).unwrap();
        let delta = GridFunction::on_line(line(0.0, 0.1, 2), vec![ExtReal::ZERO, ExtReal::PosInf]).unwrap();
        let c = inf_convolution(&a, &delta).unwrap();
        for k in 0..a.len() {
            assert_eq!(c.result.values()[k], a.values()[k]);
        }
    }

    #[test]
    fn sum_of_two_half_squares() {
        let f = FunctionDescriptor::quadratic_1d(1.0, 0.0, 0.0);
        let s = conjugate_of_sum(&f, &f, &line(-5.0, 5.0, 201), &line(-2.0, 2.0, 81)).unwrap();
        let h = 0.05;
        for k in 0..81 {
            let y = s.via_convolution.grid().node(k);
            assert!((s.via_convolution.values()[k].to_f64() - y * y / 4.0).abs() <= 2.0 * h);
            assert!((s.direct.values()[k].to_f64() - y * y / 4.0).abs() <= 2.0 * h);
        }
    }

    #[test]
    fn disjoint_domains_fail_the_qualification() {
        let f = FunctionDescriptor::IndicatorInterval { a: -2.0, b: -1.0 };
        let g = FunctionDescriptor::IndicatorInterval { a: 1.0, b: 2.0 };
        let err = conjugate_of_sum(&f, &g, &line(-3.0, 3.0, 61), &line(-1.0, 1.0, 21)).unwrap_err();
        assert!(matches!(err, Error::QualificationViolated(_)));
    }
}
