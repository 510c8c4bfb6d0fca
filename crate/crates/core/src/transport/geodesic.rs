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

//! Shortest paths on an 8-neighbour grid graph restricted to a domain mask,
//! with a zero-cost set entering through `min{δ(x,y), δ(x,Σ) + δ(y,Σ)}`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rectangular node grid (row-major, `x` fastest) with the domain mask `Ω`
/// and the free set `Σ ⊆ Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSpec {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    #[serde(default)]
    pub origin: [f64; 2],
    pub omega: Vec<bool>,
    #[serde(default)]
    pub sigma: Vec<bool>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on node index
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl GeodesicSpec {
    /// Every node in `Ω`, no free set.
    pub fn full(nx: usize, ny: usize, h: f64) -> Self {
        GeodesicSpec { nx, ny, h, origin: [0.0, 0.0], omega: vec![true; nx * ny], sigma: vec![false; nx * ny] }
    }

    pub fn validate(&self) -> Result<()> {
        let count = self.nx * self.ny;
        if count == 0 || !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::invalid("geodesic grid needs nodes and a positive spacing"));
        }
        if self.omega.len() != count || !(self.sigma.is_empty() || self.sigma.len() == count) {
            return Err(Error::dim(format!("masks must have {count} entries")));
        }
        if self.sigma.iter().zip(&self.omega).any(|(s, o)| *s && !*o) {
            return Err(Error::invalid("the free set must lie inside the domain"));
        }
        let start = self.omega.iter().position(|o| *o).ok_or_else(|| Error::invalid("empty domain"))?;
        let reached = self.distances_from(&[start]);
        if reached.iter().zip(&self.omega).any(|(d, o)| *o && !d.is_finite()) {
            return Err(Error::invalid("the domain is not connected"));
        }
        Ok(())
    }

    fn in_sigma(&self, k: usize) -> bool {
        self.sigma.get(k).copied().unwrap_or(false)
    }

    pub fn has_sigma(&self) -> bool {
        self.sigma.iter().any(|s| *s)
    }

    /// Node index of a point, snapped to the nearest node.
    pub fn node_of(&self, p: &[f64]) -> Result<usize> {
        let (x, y) = match p {
            [x] if self.ny == 1 => (*x, self.origin[1]),
            [x, y] => (*x, *y),
            _ => return Err(Error::dim("geodesic points are 2D (or 1D on a single row)")),
        };
        let i = ((x - self.origin[0]) / self.h).round();
        let j = ((y - self.origin[1]) / self.h).round();
        let outside = || Error::PointNotInDomain(format!("{p:?}"));
        if !(i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.ny) {
            return Err(outside());
        }
        let k = j as usize * self.nx + i as usize;
        if !self.omega[k] {
            return Err(outside());
        }
        Ok(k)
    }

    /// Neighbours of `k` with edge lengths `h` (axis) and `h√2` (diagonal).
    /// A diagonal step needs both adjacent axis nodes in `Ω`.
    pub fn neighbours(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (i, j) = ((k % self.nx) as isize, (k / self.nx) as isize);
        const STEPS: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        let diag = self.h * std::f64::consts::SQRT_2;
        STEPS.iter().filter_map(move |&(di, dj)| {
            let inside = |a: isize, b: isize| {
                a >= 0 && b >= 0 && (a as usize) < self.nx && (b as usize) < self.ny && self.omega[b as usize * self.nx + a as usize]
            };
            let (a, b) = (i + di, j + dj);
            if !inside(a, b) {
                return None;
            }
            if di != 0 && dj != 0 {
                if !(inside(i + di, j) && inside(i, j + dj)) {
                    return None;
                }
                return Some((b as usize * self.nx + a as usize, diag));
            }
            Some((b as usize * self.nx + a as usize, self.h))
        })
    }

    /// Multi-source Dijkstra; `+∞` at unreachable or non-domain nodes.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.nx * self.ny];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Entry { dist: 0.0, node: s });
        }
        while let Some(Entry { dist: d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            for (next, w) in self.neighbours(node) {
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(Entry { dist: nd, node: next });
                }
            }
        }
        dist
    }

    /// `δ(·, Σ)`, `+∞` everywhere when `Σ` is empty.
    pub fn distance_to_sigma(&self) -> Vec<f64> {
        let sources: Vec<usize> = (0..self.nx * self.ny).filter(|&k| self.in_sigma(k)).collect();
        self.distances_from(&sources)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_square_uses_diagonals() {
        let g = GeodesicSpec::full(3, 3, 1.0);
        let d = g.distances_from(&[0]);
        assert_eq!(d[8], 2.0 * std::f64::consts::SQRT_2);
        assert_eq!(d[2], 2.0);
    }

    #[test]
    fn diagonals_do_not_cut_corners() {
        // 2x2 with the top-left node removed: (0,0) -> (1,1) must go around
        let mut g = GeodesicSpec::full(2, 2, 1.0);
        g.omega[2] = false;
        let d = g.distances_from(&[0]);
        assert_eq!(d[3], 2.0);
    }

    #[test]
    fn disconnected_domains_are_rejected() {
        let mut g = GeodesicSpec::full(3, 1, 1.0);
        g.omega[1] = false;
        assert!(g.validate().is_err());
    }

    #[test]
    fn points_outside_the_mask() {
        let mut g = GeodesicSpec::full(3, 1, 1.0);
        g.omega[2] = false;
        assert!(matches!(g.node_of(&[2.0]), Err(Error::PointNotInDomain(_))));
        assert!(matches!(g.node_of(&[7.0]), Err(Error::PointNotInDomain(_))));
        assert_eq!(g.node_of(&[1.0]).unwrap(), 1);
    }
}
