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

use fenchelkit::conjugate::FunctionDescriptor as F;
use fenchelkit::duality::{conjugate_of_sum, extremality_check, fenchel_rockafellar, FrStatus, LinearMap, PrimalDualPair};
use fenchelkit::{ExtReal, Grid1D};
use proptest::prelude::*;

fn primal_objective(phi: &F, psi: &F, a: &LinearMap, u: &[f64]) -> ExtReal {
    phi.eval(u) + psi.eval(&a.apply(u))
}

fn dual_objective(phi: &F, psi: &F, a: &LinearMap, s: &[f64]) -> Option<f64> {
    let minus_at: Vec<f64> = a.apply_transpose(s).iter().map(|v| -v).collect();
    (phi.eval_conjugate(&minus_at) + psi.eval_conjugate(s)).value().map(|v| -v)
}

/// `½(u−c)ᵀD(u−c)` with a diagonal `D`, as a closed-form quadratic.
fn diag_quadratic(d: &[f64], centre: &[f64]) -> F {
    let n = d.len();
    let a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect();
    let b: Vec<f64> = (0..n).map(|i| -d[i] * centre[i]).collect();
    let c: f64 = (0..n).map(|i| 0.5 * d[i] * centre[i] * centre[i]).sum();
    F::quadratic(a, b, c).unwrap()
}

fn instance() -> impl Strategy<Value = (F, F, LinearMap)> {
    (
        prop::collection::vec(0.2..4.0f64, 2),
        prop::collection::vec(-2.0..2.0f64, 2),
        prop::collection::vec(0.2..4.0f64, 2),
        prop::collection::vec(-2.0..2.0f64, 2),
        prop::collection::vec(-2.0..2.0f64, 4),
    )
        .prop_map(|(d1, c1, d2, c2, m)| {
            let a = LinearMap::new(vec![vec![m[0], m[1]], vec![m[2], m[3]]]).unwrap();
            (diag_quadratic(&d1, &c1), diag_quadratic(&d2, &c2), a)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weak_duality_on_random_samples(
        (phi, psi, a) in instance(),
        points in prop::collection::vec((prop::collection::vec(-5.0..5.0f64, 2), prop::collection::vec(-5.0..5.0f64, 2)), 100),
    ) {
        for (u, s) in &points {
            let p = primal_objective(&phi, &psi, &a, u).to_f64();
            let d = dual_objective(&phi, &psi, &a, s).unwrap();
            prop_assert!(p >= d - 1e-9 * (1.0 + p.abs()), "{p} < {d}");
        }
    }

    #[test]
    fn box_constrained_weak_duality(
        lo in -2.0..0.0f64,
        width in 0.5..3.0f64,
        centre in -4.0..4.0f64,
        k in 0.3..3.0f64,
        samples in prop::collection::vec((0.0..1.0f64, -6.0..6.0f64), 100),
    ) {
        let phi = F::IndicatorInterval { a: lo, b: lo + width };
        let psi = diag_quadratic(&[1.0], &[centre]);
        let a = LinearMap::new(vec![vec![k]]).unwrap();
        for (t, s) in samples {
            let u = [lo + t * width];
            let p = primal_objective(&phi, &psi, &a, &u).to_f64();
            let d = dual_objective(&phi, &psi, &a, &[s]).unwrap();
            prop_assert!(p >= d - 1e-9 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn residual_sum_is_the_pointwise_gap(
        (phi, psi, a) in instance(),
        du in prop::collection::vec(-0.5..0.5f64, 2),
        ds in prop::collection::vec(-0.5..0.5f64, 2),
        scale in prop::sample::select(vec![0.0, 1e-9, 1e-4, 1.0]),
    ) {
        let best = fenchel_rockafellar(&phi, &psi, &a).unwrap();
        prop_assert_eq!(best.status, FrStatus::Certified);
        let mut pair = best.clone();
        pair.primal_point = best.primal_point.iter().zip(&du).map(|(x, e)| x + scale * e).collect();
        pair.dual_point = best.dual_point.iter().zip(&ds).map(|(x, e)| x + scale * e).collect();
        let gap = primal_objective(&phi, &psi, &a, &pair.primal_point).to_f64()
            - dual_objective(&phi, &psi, &a, &pair.dual_point).unwrap();
        let report = extremality_check(&pair, &phi, &psi, &a, 1e-6);
        let (r1, r2) = (report.residuals.0.to_f64(), report.residuals.1.to_f64());
        prop_assert!(r1 >= -1e-9 && r2 >= -1e-9);
        prop_assert!((r1 + r2 - gap).abs() <= 1e-8 * (1.0 + gap.abs()), "{r1} + {r2} vs {gap}");
        // zero residuals ⇒ zero gap, and a gap beyond both tolerances ⇒ failure
        if report.passed {
            prop_assert!(gap.abs() <= 2e-6);
        }
        if gap > 2e-6 {
            prop_assert!(!report.passed);
        }
        if gap.abs() <= 1e-6 {
            prop_assert!(report.passed);
        }
    }
}

#[test]
fn optimal_pairs_have_zero_gap_and_zero_residuals() {
    let cases = [
        (F::quadratic_1d(1.0, 0.0, 0.0), F::quadratic_1d(1.0, 0.0, 0.0), LinearMap::identity(1)),
        (F::quadratic_1d(1.0, -1.0, 0.5), F::quadratic_1d(1.0, 0.0, 0.0), LinearMap::new(vec![vec![2.0]]).unwrap()),
        (diag_quadratic(&[2.0, 0.5], &[1.0, -1.0]), diag_quadratic(&[1.0, 3.0], &[0.0, 2.0]), LinearMap::new(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap()),
    ];
    for (phi, psi, a) in cases {
        let pair = fenchel_rockafellar(&phi, &psi, &a).unwrap();
        assert!((pair.primal_value - pair.dual_value).abs() <= 1e-6);
        assert!(extremality_check(&pair, &phi, &psi, &a, 1e-6).passed);
    }
}

#[test]
fn a_shifted_primal_point_fails_extremality() {
    // φ = u², ψ = v²/2 with A = 1: optimum at u = 0, σ = 0
    let phi = F::quadratic_1d(2.0, 0.0, 0.0);
    let psi = F::quadratic_1d(1.0, 0.0, 0.0);
    let a = LinearMap::identity(1);
    let pair = fenchel_rockafellar(&phi, &psi, &a).unwrap();
    let shifted = PrimalDualPair { primal_point: vec![pair.primal_point[0] + 0.1], ..pair };
    let report = extremality_check(&shifted, &phi, &psi, &a, 1e-6);
    assert!(!report.passed);
    assert!(report.residuals.0.to_f64().max(report.residuals.1.to_f64()) >= 1e-3);
}

#[test]
fn exchange_rule_on_shared_grids() {
    let primal = Grid1D::new(-3.0, 3.0, 121).unwrap();
    let dual = Grid1D::new(-4.0, 4.0, 161).unwrap();
    let h = dual.spacing();
    let pairs = [
        (F::quadratic_1d(1.0, 0.0, 0.0), F::IndicatorInterval { a: -1.0, b: 2.0 }),
        (F::AbsValue, F::quadratic_1d(2.0, -1.0, 0.0)),
        (F::NormPower { p: 3.0, weight: 1.0 }, F::IndicatorInterval { a: 0.0, b: 1.0 }),
    ];
    for (f, g) in pairs {
        let s = conjugate_of_sum(&f, &g, &primal, &dual).unwrap();
        for (k, (a, b)) in s.via_convolution.values().iter().zip(s.direct.values()).enumerate() {
            let (a, b) = (a.to_f64(), b.to_f64());
            assert!((a - b).abs() <= 2.0 * h, "{f:?} + {g:?} at node {k}: {a} vs {b}");
        }
    }
}

#[test]
fn exchange_rule_refuses_without_qualification() {
    let primal = Grid1D::new(-3.0, 3.0, 61).unwrap();
    let dual = Grid1D::new(-2.0, 2.0, 41).unwrap();
    // the two domains meet in a single point, which no neighbour backs up
    let f = F::IndicatorInterval { a: -1.0, b: 0.0 };
    let g = F::IndicatorInterval { a: 0.0, b: 1.0 };
    assert!(conjugate_of_sum(&f, &g, &primal, &dual).is_err());
}
