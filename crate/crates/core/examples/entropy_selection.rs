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

//! Compares the entropy `Σ |σ| log |σ| h²` across near-optimal flows on a
//! fixture with many minimal flows: corner to corner on an axis grid, where
//! every monotone staircase is a shortest path.
//!
//! The flows are the p-stage fluxes of the continuation and one staircase
//! concentrated on the boundary. Nothing is asserted; the table is printed.
//!
//! cargo run --release -p fenchelkit-core --example entropy_selection [n]

use fenchelkit::beckmann::{continuation_to_w1, entropy_functional, FlowField, GridDomain, Stencil, DEFAULT_SCHEDULE};

fn main() -> fenchelkit::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(11);
    let h = 1.0 / (n - 1) as f64;
    let mut f = vec![0.0; n * n];
    let (start, end) = (0, n * n - 1);
    f[start] = -1.0 / (h * h);
    f[end] = 1.0 / (h * h);
    let dom = GridDomain::rectangle(n, n, h, f.clone(), Stencil::Axis)?;

    let run = continuation_to_w1(&dom, &DEFAULT_SCHEDULE, 1e-10)?;
    println!("{:>10} {:>14} {:>14} {:>14}", "flow", "mass", "gap", "entropy");
    for stage in &run.stages {
        let e = entropy_functional(&stage.sigma, &dom)?;
        println!("{:>10} {:>14.6e} {:>14.6e} {:>14.6e}", format!("p={}", stage.p), stage.flux_value, stage.gap, e);
    }

    // bottom row then right column; edges are stored with tail < head
    let mut staircase = vec![0.0; dom.edges().len()];
    let along = -f[start] * h;
    let mut path = Vec::new();
    for i in 0..n - 1 {
        path.push((i, i + 1));
    }
    for j in 0..n - 1 {
        path.push((j * n + n - 1, (j + 1) * n + n - 1));
    }
    for (t, hd) in path {
        let k = dom.edges().iter().position(|e| e.tail == t && e.head == hd).expect("axis edge");
        staircase[k] = along;
    }
    let staircase = FlowField { values: staircase };
    let mass = dom.total_variation(&staircase);
    println!(
        "{:>10} {:>14.6e} {:>14.6e} {:>14.6e}   balance {:.1e}",
        "staircase",
        mass,
        mass - run.potential_value,
        entropy_functional(&staircase, &dom)?,
        dom.balance_residual(&staircase)
    );
    Ok(())
}
