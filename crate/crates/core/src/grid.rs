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

use crate::{Error, ExtReal, Result};

/// Uniform grid `lo = x_0 < x_1 < … < x_{n-1} = hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    n: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl TryFrom<RawGrid> for Grid1D {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid1D::new(raw.lo, raw.hi, raw.n)
    }
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::invalid(format!("grid needs finite lo < hi, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 nodes, got {n}")));
        }
        Ok(Grid1D { lo, hi, n })
    }

    /// Grid with spacing `h` starting at `lo`.
    pub fn with_spacing(lo: f64, h: f64, n: usize) -> Result<Self> {
        Grid1D::new(lo, lo + h * (n as f64 - 1.0), n)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n as f64 - 1.0)
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + self.spacing() * i as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Locates `x` as `(i, t)` with `x = (1-t) x_i + t x_{i+1}`, snapping
    /// to a node when within `1e-12` of the spacing. `None` outside `[lo, hi]`.
    pub(crate) fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let h = self.spacing();
        let s = (x - self.lo) / h;
        let last = (self.n - 1) as f64;
        if !(s > -1e-12 && s < last + 1e-12) {
            return None;
        }
        let s = s.clamp(0.0, last);
        let i = s.floor();
        let t = s - i;
        let i = i as usize;
        if t < 1e-12 || i + 1 == self.n {
            Some((i.min(self.n - 1), 0.0))
        } else if t > 1.0 - 1e-12 {
            Some((i + 1, 0.0))
        } else {
            Some((i, t))
        }
    }
}

/// Values of an extended-real function on the nodes of a 1D grid or of
/// the tensor product of two 1D grids (row-major, last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFunction")]
pub struct GridFunction {
    axes: Vec<Grid1D>,
    values: Vec<ExtReal>,
}

#[derive(Deserialize)]
struct RawGridFunction {
    axes: Vec<Grid1D>,
    values: Vec<ExtReal>,
}

impl TryFrom<RawGridFunction> for GridFunction {
    type Error = Error;
    fn try_from(raw: RawGridFunction) -> Result<Self> {
        GridFunction::new(raw.axes, raw.values)
    }
}

impl GridFunction {
    pub fn new(axes: Vec<Grid1D>, values: Vec<ExtReal>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::dim(format!("grid functions are 1D or 2D, got {} axes", axes.len())));
        }
        let count: usize = axes.iter().map(Grid1D::len).product();
        if count != values.len() {
            return Err(Error::dim(format!("{} values for {count} nodes", values.len())));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::Improper);
        }
        Ok(GridFunction { axes, values })
    }

    pub fn on_line(grid: Grid1D, values: Vec<ExtReal>) -> Result<Self> {
        GridFunction::new(vec![grid], values)
    }

    /// Samples `f` at every node of a 1D grid.
    pub fn sample(grid: Grid1D, f: impl Fn(f64) -> ExtReal) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        GridFunction::on_line(grid, values)
    }

    /// Samples `f` on the product grid `a × b`.
    pub fn sample_2d(a: Grid1D, b: Grid1D, f: impl Fn(f64, f64) -> ExtReal) -> Result<Self> {
        let mut values = Vec::with_capacity(a.len() * b.len());
        for x in a.nodes() {
            for y in b.nodes() {
                values.push(f(x, y));
            }
        }
        GridFunction::new(vec![a, b], values)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Grid1D] {
        &self.axes
    }

    /// The single axis of a 1D function. Panics for 2D.
    pub fn grid(&self) -> &Grid1D {
        assert_eq!(self.axes.len(), 1, "grid() on a 2D grid function");
        &self.axes[0]
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of node `k` in storage order.
    pub fn node(&self, k: usize) -> Vec<f64> {
        match self.axes.as_slice() {
            [a] => vec![a.node(k)],
            [a, b] => vec![a.node(k / b.len()), b.node(k % b.len())],
            _ => unreachable!(),
        }
    }

    /// Smallest finite value and the first node attaining it.
    pub fn min(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (k, v) in self.values.iter().enumerate() {
            if let ExtReal::Finite(v) = v {
                if *v < best.0 {
                    best = (*v, k);
                }
            }
        }
        best
    }

    /// Piecewise-(bi)linear interpolation; `+∞` outside the grid box or when
    /// any contributing node is `+∞`. Exact at nodes.
    pub fn eval(&self, x: &[f64]) -> ExtReal {
        assert_eq!(x.len(), self.dim(), "point dimension does not match grid function");
        match self.axes.as_slice() {
            [a] => {
                let Some((i, t)) = a.locate(x[0]) else {
                    return ExtReal::PosInf;
                };
                lerp(self.values[i], self.values.get(i + 1).copied(), t)
            }
            [a, b] => {
                let (Some((i, s)), Some((j, t))) = (a.locate(x[0]), b.locate(x[1])) else {
                    return ExtReal::PosInf;
                };
                let m = b.len();
                let at = |i: usize, j: usize| self.values[i * m + j];
                let lo = lerp(at(i, j), (j + 1 < m).then(|| at(i, j + 1)), t);
                if s == 0.0 {
                    return lo;
                }
                let hi = lerp(at(i + 1, j), (j + 1 < m).then(|| at(i + 1, j + 1)), t);
                match (lo, hi) {
                    (ExtReal::Finite(p), ExtReal::Finite(q)) => ExtReal::Finite((1.0 - s) * p + s * q),
                    _ => ExtReal::PosInf,
                }
            }
            _ => unreachable!(),
        }
    }
}

fn lerp(left: ExtReal, right: Option<ExtReal>, t: f64) -> ExtReal {
    if t == 0.0 {
        return left;
    }
    match (left, right) {
        (ExtReal::Finite(p), Some(ExtReal::Finite(q))) => ExtReal::Finite((1.0 - t) * p + t * q),
        _ => ExtReal::PosInf,
    }
}
