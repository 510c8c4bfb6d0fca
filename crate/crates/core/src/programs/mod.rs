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

//! Linear programs with primal–dual certificates, and small convex
//! programs solved through their Lagrangian dual.

mod convex;
mod lp;
pub(crate) mod simplex;

pub use convex::{
    lagrangian_dual_value, slater_check, solve_convex_program, ConvexProgram, KktCertificate,
};
pub use lp::{
    dual_of, solve_lp, value_function, verify_complementarity, ComplementarityReport, LpProblem,
    LpSolution, LpStatus,
};

use crate::{ExtReal, GridFunction};

/// Lower convex envelope of 2D samples at `x`: the cheapest convex
/// combination of finite graph points whose nodes average to `x`.
pub(crate) fn convex_envelope_at(f: &GridFunction, x: &[f64]) -> ExtReal {
    let finite: Vec<usize> = (0..f.len()).filter(|&k| f.values()[k].is_finite()).collect();
    let d = x.len();
    let mut a = vec![vec![0.0; finite.len()]; 2 * d + 2];
    let mut b = vec![0.0; 2 * d + 2];
    for (col, &k) in finite.iter().enumerate() {
        let node = f.node(k);
        for i in 0..d {
            a[2 * i][col] = node[i];
            a[2 * i + 1][col] = -node[i];
        }
        a[2 * d][col] = 1.0;
        a[2 * d + 1][col] = -1.0;
    }
    for i in 0..d {
        b[2 * i] = x[i];
        b[2 * i + 1] = -x[i];
    }
    b[2 * d] = 1.0;
    b[2 * d + 1] = -1.0;
    let c: Vec<f64> = finite.iter().map(|&k| f.values()[k].to_f64()).collect();
    match solve_lp(&LpProblem { c, a, b }) {
        Ok(s) if s.status == LpStatus::Optimal => ExtReal::finite(s.primal_value),
        _ => ExtReal::PosInf,
    }
}
