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

use fenchelkit::conjugate::{biconjugate, conjugate, conjugate_samples, convex_envelope, FunctionDescriptor};
use fenchelkit::{ExtReal, Grid1D, GridFunction};
use proptest::prelude::*;

fn primal() -> Grid1D {
    Grid1D::new(-2.0, 2.0, 41).unwrap()
}

fn dual() -> Grid1D {
    Grid1D::new(-8.0, 8.0, 161).unwrap()
}

fn samples(values: &[f64]) -> GridFunction {
    GridFunction::on_line(primal(), values.iter().map(|v| ExtReal::finite(*v)).collect()).unwrap()
}

fn finite(g: &GridFunction) -> Vec<f64> {
    g.values().iter().map(|v| v.value().expect("finite conjugate on a bounded grid")).collect()
}

/// Andrew's monotone chain, lower part, over the finite points.
fn lower_hull_oracle(xs: &[f64], fs: &[Option<f64>]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (x, f) in xs.iter().zip(fs) {
        let Some(f) = f else { continue };
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it is on or above the chord from a to the new point
            if (b.0 - a.0) * (f - a.1) - (b.1 - a.1) * (x - a.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((*x, *f));
    }
    hull
}

fn hull_at(hull: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = hull.first()?;
    let last = hull.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    for w in hull.windows(2) {
        if x >= w[0].0 && x <= w[1].0 {
            if x == w[0].0 {
                return Some(w[0].1);
            }
            if x == w[1].0 {
                return Some(w[1].1);
            }
            let t = (x - w[0].0) / (w[1].0 - w[0].0);
            return Some(w[0].1 + t * (w[1].1 - w[0].1));
        }
    }
    Some(first.1)
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_reversal(g in values(41), bump in prop::collection::vec(0.0..3.0f64, 41)) {
        let f: Vec<f64> = g.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let fs = conjugate_samples(&samples(&f), &[dual()]).unwrap();
        let gs = conjugate_samples(&samples(&g), &[dual()]).unwrap();
        for (a, b) in finite(&fs).iter().zip(finite(&gs)) {
            prop_assert!(*a <= b + 1e-12);
        }
    }

    #[test]
    fn conjugate_of_a_minimum_is_the_maximum_of_conjugates(a in values(41), b in values(41), c in values(41)) {
        let min: Vec<f64> = (0..41).map(|k| a[k].min(b[k]).min(c[k])).collect();
        let lhs = finite(&conjugate_samples(&samples(&min), &[dual()]).unwrap());
        let parts: Vec<Vec<f64>> = [&a, &b, &c].iter().map(|v| finite(&conjugate_samples(&samples(v), &[dual()]).unwrap())).collect();
        for k in 0..lhs.len() {
            let rhs = parts[0][k].max(parts[1][k]).max(parts[2][k]);
            prop_assert!((lhs[k] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn triple_conjugate_equals_conjugate(v in values(41)) {
        let f = samples(&v);
        let env = convex_envelope(&f).unwrap();
        let once = finite(&conjugate_samples(&f, &[dual()]).unwrap());
        let thrice = finite(&conjugate_samples(&env, &[dual()]).unwrap());
        for (a, b) in once.iter().zip(&thrice) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn conjugates_are_convex(v in values(41)) {
        let s = finite(&conjugate_samples(&samples(&v), &[dual()]).unwrap());
        let scale = 1.0 + s.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for w in s.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12 * scale);
        }
    }

    #[test]
    fn biconjugate_is_the_lower_hull(
        n in 2usize..=101,
        raw in prop::collection::vec((-5.0..5.0f64, 0.0..1.0f64), 101),
    ) {
        let grid = Grid1D::new(-3.0, 3.0, n).unwrap();
        let xs = grid.nodes();
        // about one node in eight is +∞, but never all of them
        let mut fs: Vec<Option<f64>> = raw[..n].iter().map(|(v, u)| (*u > 0.125).then_some(*v)).collect();
        if fs.iter().all(Option::is_none) {
            fs[0] = Some(raw[0].0);
        }
        let f = GridFunction::on_line(grid, fs.iter().map(|v| v.map_or(ExtReal::PosInf, ExtReal::finite)).collect()).unwrap();
        let FunctionDescriptor::Sampled { function: env } = biconjugate(&FunctionDescriptor::sampled(f)).unwrap() else {
            panic!("sampled biconjugate");
        };
        let hull = lower_hull_oracle(&xs, &fs);
        for (k, x) in xs.iter().enumerate() {
            match (env.values()[k], hull_at(&hull, *x)) {
                (ExtReal::Finite(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "node {k}: {a} vs {b}"),
                (ExtReal::PosInf, None) => {}
                (a, b) => prop_assert!(false, "node {k}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn norm_power_pairs(p in 1.3..3.5f64) {
        let g = Grid1D::new(-5.0, 5.0, 1001).unwrap();
        let f = GridFunction::sample(g, |x| ExtReal::finite(x.abs().powf(p) / p)).unwrap();
        let FunctionDescriptor::Sampled { function: star } = conjugate(&FunctionDescriptor::sampled(f), None).unwrap() else {
            panic!("sampled conjugate");
        };
        let q = p / (p - 1.0);
        let reach = 5.0_f64.powf(p - 1.0);
        for (y, v) in star.grid().nodes().iter().zip(star.values()) {
            if y.abs() <= reach {
                let exact = y.abs().powf(q) / q;
                prop_assert!((v.to_f64() - exact).abs() <= 10.0 * g.spacing());
            }
        }
    }
}

#[test]
fn closed_form_conjugates_match_a_grid_supremum() {
    let xs = Grid1D::new(-30.0, 30.0, 600_001).unwrap().nodes();
    let cases = [
        (FunctionDescriptor::quadratic_1d(2.0, 1.0, 0.5), vec![-3.0, 0.0, 2.5]),
        (FunctionDescriptor::MinimalSurface, vec![-0.9, 0.0, 0.5]),
        (FunctionDescriptor::Entropy, vec![-1.0, 0.0, 1.0, 2.0]),
        (FunctionDescriptor::NormPower { p: 3.0, weight: 2.0 }, vec![-2.0, 1.0]),
    ];
    for (f, ys) in cases {
        for y in ys {
            let brute = xs.iter().map(|x| x * y - f.eval(&[*x]).to_f64()).fold(f64::NEG_INFINITY, f64::max);
            let closed = f.eval_conjugate(&[y]).to_f64();
            assert!((brute - closed).abs() < 1e-6, "{f:?} at {y}: {brute} vs {closed}");
        }
    }
}
