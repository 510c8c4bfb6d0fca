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

use fenchelkit::conjugate::{FunctionDescriptor as F, NormKind};
use fenchelkit::programs::{
    dual_of, lagrangian_dual_value, solve_convex_program, solve_lp, value_function, verify_complementarity,
    ConvexProgram, LpProblem, LpStatus,
};
use fenchelkit::{ExtReal, Grid1D};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An LP with a known optimal pair: `x₀`, `y₀` are complementary by
/// construction, so `c·x₀ = -b·y₀` is the common optimal value.
struct Constructed {
    lp: LpProblem,
    x0: Vec<f64>,
    y0: Vec<f64>,
}

fn construct(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Constructed {
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
    let x0: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.1..2.0) } else { 0.0 }).collect();
    let y0: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.1..2.0) } else { 0.0 }).collect();
    let b = (0..m)
        .map(|i| {
            let ax: f64 = (0..n).map(|j| a[i][j] * x0[j]).sum();
            ax + if y0[i] > 0.0 { 0.0 } else { rng.gen_range(0.1..1.0) }
        })
        .collect();
    let c = (0..n)
        .map(|j| {
            let aty: f64 = (0..m).map(|i| a[i][j] * y0[i]).sum();
            -aty + if x0[j] > 0.0 { 0.0 } else { rng.gen_range(0.1..1.0) }
        })
        .collect();
    Constructed { lp: LpProblem::new(c, a, b).unwrap(), x0, y0 }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Largest `t ∈ [0, cap]` keeping `x + t d ≥ 0` and `G(x + t d) ≤ r`.
fn ratio(x: &[f64], d: &[f64], g: &[Vec<f64>], r: &[f64], cap: f64) -> f64 {
    let mut t = cap;
    for (xj, dj) in x.iter().zip(d) {
        if *dj < 0.0 {
            t = t.min(-xj / dj);
        }
    }
    for (row, ri) in g.iter().zip(r) {
        let (gx, gd) = (dot(row, x), dot(row, d));
        if gd > 0.0 {
            t = t.min(((ri - gx) / gd).max(0.0));
        }
    }
    t.max(0.0)
}

fn transpose_neg(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a[0].len();
    (0..n).map(|j| a.iter().map(|row| -row[j]).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constructed_instances_have_equal_values(seed in any::<u64>(), m in 1usize..=8, n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = construct(&mut rng, m, n);
        let s = solve_lp(&k.lp).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        let expected = dot(&k.lp.c, &k.x0);
        prop_assert!((expected + dot(&k.lp.b, &k.y0)).abs() <= 1e-9);
        prop_assert!((s.primal_value - expected).abs() <= 1e-8 * (1.0 + expected.abs()));
        prop_assert!((s.primal_value - s.dual_value).abs() <= 1e-8);
        let report = verify_complementarity(&k.lp, &s.x, &s.y, 1e-8).unwrap();
        prop_assert!(report.passed, "{report:?}");
        // the dual program solved on its own gives minus the same value
        let d = solve_lp(&dual_of(&k.lp)).unwrap();
        prop_assert_eq!(d.status, LpStatus::Optimal);
        prop_assert!((d.primal_value + s.primal_value).abs() <= 1e-8 * (1.0 + expected.abs()));
    }

    #[test]
    fn weak_duality_on_random_feasible_pairs(seed in any::<u64>(), m in 1usize..=6, n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = construct(&mut rng, m, n);
        let neg_at = transpose_neg(&k.lp.a);
        for _ in 0..100 {
            let dx: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dy: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tx = rng.gen_range(0.0..1.0) * ratio(&k.x0, &dx, &k.lp.a, &k.lp.b, 5.0);
            let ty = rng.gen_range(0.0..1.0) * ratio(&k.y0, &dy, &neg_at, &k.lp.c, 5.0);
            let x: Vec<f64> = k.x0.iter().zip(&dx).map(|(a, d)| a + tx * d).collect();
            let y: Vec<f64> = k.y0.iter().zip(&dy).map(|(a, d)| a + ty * d).collect();
            let report = verify_complementarity(&k.lp, &x, &y, 1e-9).unwrap();
            prop_assert!(report.infeasibility <= 1e-9);
            prop_assert!(dot(&k.lp.c, &x) >= -dot(&k.lp.b, &y) - 1e-9);
        }
    }

    #[test]
    fn value_function_is_convex_along_segments(seed in any::<u64>(), theta in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = construct(&mut rng, 3, 3);
        let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
        let value = |v: &[f64]| value_function(&k.lp, v).ok();
        if let (Some(hp), Some(hq), Some(hm)) = (value(&p), value(&q), value(&mid)) {
            if let (ExtReal::Finite(hp), ExtReal::Finite(hq)) = (hp, hq) {
                prop_assert!(hm.to_f64() <= theta * hp + (1.0 - theta) * hq + 1e-8);
            }
        }
    }

    #[test]
    fn value_function_is_lsc_at_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = construct(&mut rng, 3, 3);
        let h0 = value_function(&k.lp, &[0.0; 3]).unwrap().to_f64();
        let dir: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // the tail of the sequence is what lsc constrains
        let mut tail = None;
        for e in [1e-2, 1e-4, 1e-6, 1e-8] {
            let v: Vec<f64> = dir.iter().map(|d| d * e).collect();
            if let Ok(h) = value_function(&k.lp, &v) {
                tail = Some(h.to_f64());
            }
        }
        if let Some(t) = tail {
            prop_assert!(t >= h0 - 1e-6 * (1.0 + h0.abs()), "{t} < {h0}");
        }
    }

    #[test]
    fn kkt_certificates_match_brute_force(centre in -2.5..2.5f64, weight in 0.5..3.0f64, cut in -1.5..1.5f64, lower in prop::bool::ANY) {
        // f = weight(x - centre)², g = ±(x - cut)
        let f = F::quadratic_1d(2.0 * weight, -2.0 * weight * centre, weight * centre * centre);
        let g = if lower { F::quadratic_1d(0.0, -1.0, cut) } else { F::quadratic_1d(0.0, 1.0, -cut) };
        let cp = ConvexProgram { f: f.clone(), g: vec![g.clone()], domain: vec![Grid1D::new(-3.0, 3.0, 61).unwrap()] };
        let k = solve_convex_program(&cp).unwrap();
        prop_assert!(k.stationarity_residual <= 1e-4 && k.complementarity_residuals[0] <= 1e-4, "{k:?}");
        let brute = Grid1D::new(-3.0, 3.0, 600_001).unwrap().nodes().into_iter()
            .filter(|x| g.eval(&[*x]).to_f64() <= 0.0)
            .map(|x| f.eval(&[x]).to_f64())
            .fold(f64::INFINITY, f64::min);
        let lipschitz = 2.0 * weight * 6.0;
        prop_assert!((f.eval(&k.x_bar).to_f64() - brute).abs() <= 10.0 * 1e-4 * (1.0 + lipschitz));
        // inf sup L is the constrained minimum; it dominates every q(λ)
        for lambda in [0.0, 0.5, 1.0, 4.0, k.lambda_bar[0]] {
            let (q, _) = lagrangian_dual_value(&cp, &[lambda]).unwrap();
            prop_assert!(q <= brute + 1e-9);
        }
        prop_assert!((brute - k.dual_value).abs() <= 1e-4);
    }
}

#[test]
fn box_constrained_program_in_the_plane() {
    let f = F::quadratic(vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![-4.0, -4.0], 8.0).unwrap();
    let g = F::tilt(F::Norm { kind: NormKind::Linf }, vec![0.0, 0.0], -1.0);
    let domain = Grid1D::new(-3.0, 3.0, 31).unwrap();
    let cp = ConvexProgram { f: f.clone(), g: vec![g.clone()], domain: vec![domain, domain] };
    let k = solve_convex_program(&cp).unwrap();
    assert!((k.x_bar[0] - 1.0).abs() < 1e-3 && (k.x_bar[1] - 1.0).abs() < 1e-3, "{k:?}");
    assert!(k.lambda_bar[0] > 0.0);
    let fine = Grid1D::new(-3.0, 3.0, 1201).unwrap().nodes();
    let mut brute = f64::INFINITY;
    for &a in &fine {
        for &b in &fine {
            if g.eval(&[a, b]).to_f64() <= 0.0 {
                brute = brute.min(f.eval(&[a, b]).to_f64());
            }
        }
    }
    assert!((k.primal_value - brute).abs() <= 1e-3);
    assert!(brute >= k.dual_value - 1e-9 && brute - k.dual_value <= 1e-4);
}
