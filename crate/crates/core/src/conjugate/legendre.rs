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

//! Discrete Legendre transform of finitely many graph points.
//!
//! `sup_i (x_i y - f_i)` is attained on the lower convex hull of the points
//! `(x_i, f_i)`. The hull is built once by a monotone chain over the sorted
//! abscissae, then each (sorted) dual abscissa is matched to its supporting
//! vertex by a single merge over the hull edge slopes.

use crate::{Error, ExtReal, Grid1D, GridFunction, Result};

/// Lower convex hull vertices of the finite points, as indices into `xs`.
/// `xs` must be strictly increasing. Collinear interior points are dropped,
/// so among equal suprema the leftmost vertex is kept.
pub(crate) fn lower_hull(xs: &[f64], fs: &[ExtReal]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let Some(fi) = f.value() else { continue };
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let (fa, fb) = (fs[a].to_f64(), fs[b].to_f64());
            // keep b only if it lies strictly below the chord a–i
            let cross = (xs[b] - xs[a]) * (fi - fa) - (fb - fa) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Slopes of consecutive hull edges (strictly increasing).
pub(crate) fn hull_slopes(xs: &[f64], fs: &[ExtReal], hull: &[usize]) -> Vec<f64> {
    hull.windows(2)
        .map(|w| (fs[w[1]].to_f64() - fs[w[0]].to_f64()) / (xs[w[1]] - xs[w[0]]))
        .collect()
}

/// Values of a discrete transform.
#[derive(Clone, Debug)]
pub(crate) struct Transform {
    pub values: Vec<f64>,
}

/// `g(y) = max_i (x_i y - f_i)` over the finite points, evaluated at `ys`
/// (any order). Errors when every `f_i` is `+∞`.
pub(crate) fn transform(xs: &[f64], fs: &[ExtReal], ys: &[f64]) -> Result<Transform> {
    let hull = lower_hull(xs, fs);
    if hull.is_empty() {
        return Err(Error::Improper);
    }
    let slopes = hull_slopes(xs, fs, &hull);

    let mut order: Vec<usize> = (0..ys.len()).collect();
    if !ys.windows(2).all(|w| w[0] <= w[1]) {
        order.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
    }

    let mut values = vec![0.0; ys.len()];
    let mut edge = 0;
    for &k in &order {
        let y = ys[k];
        // first vertex whose right edge is at least as steep as y
        while edge < slopes.len() && slopes[edge] < y {
            edge += 1;
        }
        let v = hull[edge];
        values[k] = xs[v] * y - fs[v].to_f64();
    }
    Ok(Transform { values })
}

/// Conjugate of a sampled function onto a dual grid. Exact for the discrete
/// supremum over grid nodes; 2D functions are transformed one axis at a time.
pub(crate) fn conjugate_grid(f: &GridFunction, dual: &[Grid1D]) -> Result<GridFunction> {
    if dual.len() != f.dim() {
        return Err(Error::dim(format!("{} dual axes for a {}D function", dual.len(), f.dim())));
    }
    match f.axes() {
        [a] => {
            let t = transform(&a.nodes(), f.values(), &dual[0].nodes())?;
            GridFunction::on_line(dual[0], t.values.into_iter().map(ExtReal::finite).collect())
        }
        [a, b] => {
            let (xa, xb) = (a.nodes(), b.nodes());
            let (ya, yb) = (dual[0].nodes(), dual[1].nodes());
            // inner[i][k] = -sup_j (x_j y_k - f(i, j)), +∞ for rows without finite values
            let mut inner = vec![ExtReal::PosInf; a.len() * yb.len()];
            for i in 0..a.len() {
                let row = &f.values()[i * b.len()..(i + 1) * b.len()];
                if let Ok(t) = transform(&xb, row, &yb) {
                    for (k, v) in t.values.into_iter().enumerate() {
                        inner[i * yb.len() + k] = ExtReal::finite(-v);
                    }
                }
            }
            let mut out = vec![ExtReal::ZERO; ya.len() * yb.len()];
            let mut column = vec![ExtReal::PosInf; a.len()];
            for k in 0..yb.len() {
                for (i, c) in column.iter_mut().enumerate() {
                    *c = inner[i * yb.len() + k];
                }
                let t = transform(&xa, &column, &ya)?;
                for (l, v) in t.values.into_iter().enumerate() {
                    out[l * yb.len() + k] = ExtReal::finite(v);
                }
            }
            GridFunction::new(dual.to_vec(), out)
        }
        _ => unreachable!(),
    }
}

/// Dual grid covering the slopes of the sampled function: per axis the range
/// of finite-difference slopes between finite neighbours, widened by 10% and
/// sampled with the primal node count.
pub(crate) fn default_dual_axes(f: &GridFunction) -> Vec<Grid1D> {
    let axes = f.axes();
    let mut out = Vec::with_capacity(axes.len());
    for (axis, grid) in axes.iter().enumerate() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        if axes.len() == 1 {
            let xs = grid.nodes();
            let hull = lower_hull(&xs, f.values());
            for s in hull_slopes(&xs, f.values(), &hull) {
                lo = lo.min(s);
                hi = hi.max(s);
            }
        } else {
            let (n0, n1) = (axes[0].len(), axes[1].len());
            let h = grid.spacing();
            for i in 0..n0 {
                for j in 0..n1 {
                    let (i2, j2) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
                    if i2 >= n0 || j2 >= n1 {
                        continue;
                    }
                    let (p, q) = (f.values()[i * n1 + j], f.values()[i2 * n1 + j2]);
                    if let (Some(p), Some(q)) = (p.value(), q.value()) {
                        let s = (q - p) / h;
                        lo = lo.min(s);
                        hi = hi.max(s);
                    }
                }
            }
        }
        if !(lo.is_finite() && hi.is_finite()) || hi - lo < 1e-12 {
            let c = if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 };
            lo = c - 1.0;
            hi = c + 1.0;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        out.push(Grid1D::new(lo, hi, grid.len()).expect("widened slope range is a valid grid"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(v: &[f64]) -> Vec<ExtReal> {
        v.iter().map(|&x| ExtReal::from_f64(x).unwrap()).collect()
    }

    #[test]
    fn hull_drops_points_above_and_collinear() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let fs = ext(&[0.0, 1.0, 2.0, 1.0, 0.0]);
        assert_eq!(lower_hull(&xs, &fs), vec![0, 4]);
        let fs = ext(&[4.0, 1.0, 0.0, 1.0, 4.0]);
        assert_eq!(lower_hull(&xs, &fs), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn hull_skips_infinite_values() {
        let xs = [0.0, 1.0, 2.0];
        let fs = ext(&[f64::INFINITY, 3.0, f64::INFINITY]);
        assert_eq!(lower_hull(&xs, &fs), vec![1]);
    }

    #[test]
    fn transform_matches_brute_force() {
        let xs = [-1.0, 0.0, 1.0];
        let fs = ext(&[1.0, 0.0, 1.0]);
        let ys = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0];
        let t = transform(&xs, &fs, &ys).unwrap();
        for (k, y) in ys.iter().enumerate() {
            let brute = xs.iter().zip(&fs).map(|(x, f)| x * y - f.to_f64()).fold(f64::MIN, f64::max);
            assert_eq!(t.values[k], brute);
        }
    }

    #[test]
    fn unsorted_dual_points_are_supported() {
        let xs = [0.0, 1.0, 2.0];
        let fs = ext(&[0.0, -1.0, 0.5]);
        let a = transform(&xs, &fs, &[3.0, -3.0, 0.2]).unwrap();
        let b = transform(&xs, &fs, &[-3.0, 0.2, 3.0]).unwrap();
        assert_eq!(a.values, vec![b.values[2], b.values[0], b.values[1]]);
    }
}
