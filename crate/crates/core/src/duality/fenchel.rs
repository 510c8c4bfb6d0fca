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

use super::composite::{self, domain_box};
use super::LinearMap;
use crate::conjugate::{conjugate_closed_or_lazy, fenchel_gap, FunctionDescriptor};
use crate::{Error, ExtReal, Result};

/// Largest dimension accepted by [`fenchel_rockafellar`].
pub const MAX_DIM: usize = 50;
const GAP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrStatus {
    /// Qualification verified and `|gap| ≤ 1e-6`.
    Certified,
    /// Computed, but the qualification test or the gap did not pass.
    Uncertified,
    /// The primal infimum is `-∞`, so the dual is infeasible.
    PrimalUnbounded,
    /// The primal objective is `+∞` everywhere that was searched.
    PrimalInfeasible,
}

/// `inf φ(u) + ψ(Au)` against `sup -φ*(-Aᵀσ) - ψ*(σ)`. Values may be
/// infinite (`-∞` for an unbounded side).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualPair {
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal_point: Vec<f64>,
    pub dual_point: Vec<f64>,
    pub gap: f64,
    pub extremality_residuals: (ExtReal, ExtReal),
    pub qualified: bool,
    pub status: FrStatus,
}

fn primal_objective(phi: &FunctionDescriptor, psi: &FunctionDescriptor, a: &LinearMap, u: &[f64]) -> f64 {
    (phi.eval(u) + psi.eval(&a.apply(u))).value().unwrap_or(f64::INFINITY)
}

fn dual_objective(phi_star: &FunctionDescriptor, psi_star: &FunctionDescriptor, a: &LinearMap, s: &[f64]) -> f64 {
    let minus_at: Vec<f64> = a.apply_transpose(s).iter().map(|v| -v).collect();
    match phi_star.eval(&minus_at) + psi_star.eval(s) {
        ExtReal::Finite(v) => -v,
        ExtReal::PosInf => f64::NEG_INFINITY,
    }
}

/// Solves the primal and the dual problem independently and pairs the
/// best points found.
///
/// Candidates for `ū` come from the primal solve and from subgradients of
/// `φ*` at the dual solution; candidates for `σ̄` from the dual solve and
/// from the multiplier of the primal solve.
pub fn fenchel_rockafellar(phi: &FunctionDescriptor, psi: &FunctionDescriptor, a: &LinearMap) -> Result<PrimalDualPair> {
    let (n, m) = (a.cols(), a.rows());
    if n > MAX_DIM || m > MAX_DIM {
        return Err(Error::dim(format!("dimensions are limited to {MAX_DIM}")));
    }
    for (f, d, name) in [(phi, n, "phi"), (psi, m, "psi")] {
        f.validate()?;
        if !f.is_proper() {
            return Err(Error::Improper);
        }
        if f.dim().is_some_and(|k| k != d) {
            return Err(Error::dim(format!("{name} has dimension {:?}, the map needs {d}", f.dim())));
        }
    }
    let phi_star = conjugate_closed_or_lazy(phi)?;
    let psi_star = conjugate_closed_or_lazy(psi)?;

    let primal = composite::minimize(phi, psi, a)?;
    let mut u_candidates = vec![primal.point.clone()];
    let mut s_candidates: Vec<Vec<f64>> = primal.multiplier.iter().cloned().collect();
    let no_dual = phi_star == FunctionDescriptor::PlusInfinity || psi_star == FunctionDescriptor::PlusInfinity;
    if !no_dual && primal.value != f64::NEG_INFINITY {
        let dual = composite::minimize(&psi_star, &phi_star, &a.neg_transpose())?;
        s_candidates.push(dual.point.clone());
        if let Some(u) = dual.multiplier {
            u_candidates.push(u);
        }
    }

    let mut best_u = (u_candidates[0].clone(), primal_objective(phi, psi, a, &u_candidates[0]));
    for u in &u_candidates[1..] {
        let v = primal_objective(phi, psi, a, u);
        if v < best_u.1 {
            best_u = (u.clone(), v);
        }
    }
    let primal_value = if primal.value == f64::NEG_INFINITY { f64::NEG_INFINITY } else { best_u.1 };

    let mut best_s: Option<(Vec<f64>, f64)> = None;
    if !no_dual {
        for s in &s_candidates {
            let v = dual_objective(&phi_star, &psi_star, a, s);
            if best_s.as_ref().is_none_or(|b| v > b.1) {
                best_s = Some((s.clone(), v));
            }
        }
    }
    let best_s = best_s.unwrap_or((vec![0.0; m], f64::NEG_INFINITY));
    let dual_value = best_s.1;

    let (u, s) = (best_u.0, best_s.0);
    let qualified = qualification(phi, psi, a, &u);
    let residuals = residuals(phi, psi, a, &u, &s);
    let gap = primal_value - dual_value;
    let status = if primal_value == f64::NEG_INFINITY {
        FrStatus::PrimalUnbounded
    } else if primal_value == f64::INFINITY {
        FrStatus::PrimalInfeasible
    } else if qualified && gap.abs() <= GAP_TOL {
        FrStatus::Certified
    } else {
        FrStatus::Uncertified
    };
    Ok(PrimalDualPair {
        primal_value,
        dual_value,
        primal_point: u,
        dual_point: s,
        gap: if gap.is_nan() { f64::INFINITY } else { gap },
        extremality_residuals: residuals,
        qualified,
        status,
    })
}

/// Some `u₀` with `φ(u₀)` finite and `ψ` finite on a small neighbourhood
/// of `Au₀` (sufficient, not necessary).
fn qualification(phi: &FunctionDescriptor, psi: &FunctionDescriptor, a: &LinearMap, u_bar: &[f64]) -> bool {
    let n = a.cols();
    let mut candidates = vec![u_bar.to_vec(), vec![0.0; n]];
    if let Some(b) = domain_box(&phi.simplified(), n) {
        if b.iter().all(|(l, h)| l.is_finite() && h.is_finite()) {
            candidates.push(b.iter().map(|(l, h)| 0.5 * (l + h)).collect());
        }
    }
    if let Some(FunctionDescriptor::Sampled { function }) = phi.resampled() {
        let stride = (function.len() / 2000).max(1);
        candidates.extend((0..function.len()).step_by(stride).map(|k| function.node(k)));
    }
    candidates.iter().any(|u0| {
        if !phi.eval(u0).is_finite() {
            return false;
        }
        let v = a.apply(u0);
        let delta = 1e-6 * (1.0 + v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())));
        psi.eval(&v).is_finite()
            && (0..v.len()).all(|i| {
                [-delta, delta].iter().all(|d| {
                    let mut w = v.clone();
                    w[i] += d;
                    psi.eval(&w).is_finite()
                })
            })
    })
}

fn residuals(phi: &FunctionDescriptor, psi: &FunctionDescriptor, a: &LinearMap, u: &[f64], s: &[f64]) -> (ExtReal, ExtReal) {
    let au = a.apply(u);
    let minus_at: Vec<f64> = a.apply_transpose(s).iter().map(|v| -v).collect();
    (fenchel_gap(psi, &au, s), fenchel_gap(phi, u, &minus_at))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityReport {
    pub passed: bool,
    /// `ψ(Aū) + ψ*(σ̄) - ⟨Aū, σ̄⟩` and `φ(ū) + φ*(-Aᵀσ̄) + ⟨ū, Aᵀσ̄⟩`.
    pub residuals: (ExtReal, ExtReal),
}

/// Evaluates both Fenchel gaps of the extremality relations at the pair's
/// points; passes iff both are at most `tol`.
pub fn extremality_check(
    pair: &PrimalDualPair,
    phi: &FunctionDescriptor,
    psi: &FunctionDescriptor,
    a: &LinearMap,
    tol: f64,
) -> ExtremalityReport {
    let r = residuals(phi, psi, a, &pair.primal_point, &pair.dual_point);
    let ok = |v: ExtReal| v.value().is_some_and(|v| v <= tol);
    ExtremalityReport { passed: ok(r.0) && ok(r.1), residuals: r }
}
