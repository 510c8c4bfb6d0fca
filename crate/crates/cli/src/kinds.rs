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

//! One solver per problem kind, each returning values, certificates and
//! series for the result envelope.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use fenchelkit::beckmann::{self, FlowField, GridDomain};
use fenchelkit::conjugate::{
    biconjugate, check_min_via_conjugate, conjugate, conjugate_samples, default_dual_grid, fenchel_gap, sample_conjugate,
    subdifferential, FunctionDescriptor, NormKind, SubdiffSet,
};
use fenchelkit::programs::{solve_convex_program, solve_lp, verify_complementarity, ConvexProgram, LpStatus};
use fenchelkit::transport::{
    brenier_check, build_cost, dual_potentials, kantorovich_norm, kantorovich_rubinstein, transport_lp, CostKind, CostMatrix,
    DiscreteMeasure, GeodesicSpec,
};
use fenchelkit::{Error, ExtReal, GridFunction};

use crate::envelope::{Series, Status, Values};
use crate::problem::*;

pub(crate) enum Failure {
    /// Schema or consistency problem in the input.
    Malformed(String),
    /// The computation itself failed.
    Solver(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::Dimension(_) | Error::GridMismatch(_) | Error::PointNotInDomain(_) => {
                Failure::Malformed(e.to_string())
            }
            other => Failure::Solver(other),
        }
    }
}

pub(crate) struct Outcome {
    pub status: Status,
    pub values: Values,
    pub certificates: BTreeMap<String, Value>,
    pub diagnostics: BTreeMap<String, Value>,
    pub series: BTreeMap<String, Series>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            status: Status::Certified,
            values: Values::default(),
            certificates: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            series: BTreeMap::new(),
        }
    }

    fn cert(&mut self, key: &str, v: impl Serialize) {
        self.certificates.insert(key.into(), to_value(v));
    }

    fn diag(&mut self, key: &str, v: impl Serialize) {
        self.diagnostics.insert(key.into(), to_value(v));
    }

    /// Downgrades a certified outcome when `ok` is false.
    fn require(&mut self, ok: bool) {
        if !ok && self.status == Status::Certified {
            self.status = Status::Uncertified;
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("result values serialize")
}

fn parse<T: serde::de::DeserializeOwned>(payload: Value) -> Result<T, Failure> {
    serde_json::from_value(payload).map_err(|e| Failure::Malformed(format!("payload: {e}")))
}

pub(crate) fn solve(kind: Kind, payload: Value, tol: &Tolerances, seed: u64) -> Result<Outcome, Failure> {
    match kind {
        Kind::Conjugate => conjugate_kind(parse(payload)?, tol),
        Kind::Envelope => envelope_kind(parse(payload)?, tol),
        Kind::Subdiff => subdiff_kind(parse(payload)?, tol),
        Kind::Lp => lp_kind(parse(payload)?, tol),
        Kind::Cp => cp_kind(parse(payload)?, tol),
        Kind::Ot => ot_kind(parse(payload)?, tol),
        Kind::Krnorm => kr_kind(parse(payload)?, tol),
        Kind::Flow => flow_kind(parse(payload)?, tol, seed),
    }
}

fn sampled_1d(f: &FunctionDescriptor) -> Option<&GridFunction> {
    match f {
        FunctionDescriptor::Sampled { function } if function.dim() == 1 => Some(function),
        _ => None,
    }
}

fn conjugate_kind(p: ConjugatePayload, tol: &Tolerances) -> Result<Outcome, Failure> {
    let f = p.function.validated()?;
    let star = conjugate(&f, p.dual_grid.as_deref())?;
    let mut out = Outcome::new();
    let min = check_min_via_conjugate(&f)?;
    out.cert("min_via_conjugate", min);

    let curve = match (&star, &p.dual_grid) {
        (FunctionDescriptor::Sampled { function }, _) => {
            out.diag("dual_grid", function.axes());
            (function.dim() == 1).then(|| function.clone())
        }
        (_, Some(axes)) if axes.len() == 1 => {
            out.diag("conjugate", &star);
            Some(sample_conjugate(&f, axes)?)
        }
        _ => {
            out.diag("conjugate", &star);
            None
        }
    };
    if let Some(curve) = &curve {
        let mut s = Series::new(&["y", "conjugate"]);
        for (y, v) in curve.grid().nodes().iter().zip(curve.values()) {
            s.push(vec![Some(ExtReal::finite(*y)), Some(*v)]);
        }
        out.series.insert("dual_curve".into(), s);
    }

    if let (Some(samples), ExtReal::Finite(at_zero)) = (sampled_1d(&f), min.value) {
        out.values = Values::pair(samples.min().0, -at_zero);
    }

    if let (Some(reference), Some(curve)) = (p.reference, &curve) {
        let reference = reference.validated()?;
        // compare only where the samples carry slope information
        let (lo, hi, h) = match sampled_1d(&f) {
            Some(samples) => {
                let xs = samples.grid().nodes();
                let vs = samples.values();
                let slopes: Vec<f64> = (1..xs.len())
                    .filter_map(|i| match (vs[i - 1], vs[i]) {
                        (ExtReal::Finite(a), ExtReal::Finite(b)) => Some((b - a) / (xs[i] - xs[i - 1])),
                        _ => None,
                    })
                    .collect();
                let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi, samples.grid().spacing())
            }
            None => (f64::NEG_INFINITY, f64::INFINITY, curve.grid().spacing()),
        };
        let mut error: f64 = 0.0;
        let mut compared = 0usize;
        for (y, v) in curve.grid().nodes().iter().zip(curve.values()) {
            if *y < lo || *y > hi {
                continue;
            }
            match (v, reference.eval(&[*y])) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                    error = error.max((a - b).abs());
                    compared += 1;
                }
                (ExtReal::PosInf, ExtReal::PosInf) => {}
                _ => error = f64::INFINITY,
            }
        }
        let bound = tol.grid_factor * h;
        out.cert("reference_error", error);
        out.cert("reference_bound", bound);
        out.cert("reference_nodes", compared);
        out.require(error <= bound);
    }
    Ok(out)
}

fn envelope_kind(p: EnvelopePayload, tol: &Tolerances) -> Result<Outcome, Failure> {
    let f = p.function.validated()?;
    let FunctionDescriptor::Sampled { function: samples } = &f else {
        return Err(Failure::Malformed("envelope problems take a sampled function".into()));
    };
    let FunctionDescriptor::Sampled { function: env } = biconjugate(&f)? else {
        unreachable!("the biconjugate of samples is sampled");
    };
    let mut out = Outcome::new();
    let scale = 1.0 + samples.values().iter().filter_map(|v| v.value()).fold(0.0, |a: f64, v| a.max(v.abs()));

    let mut minorant_violation = f64::NEG_INFINITY;
    for (a, b) in env.values().iter().zip(samples.values()) {
        if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (a, b) {
            minorant_violation = minorant_violation.max(a - b);
        }
    }
    let dual = default_dual_grid(samples);
    let star = conjugate_samples(samples, &dual)?;
    let triple = conjugate_samples(&env, &dual)?;
    let mut triconjugate_residual: f64 = 0.0;
    for (a, b) in star.values().iter().zip(triple.values()) {
        match (a, b) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => triconjugate_residual = triconjugate_residual.max((a - b).abs()),
            (ExtReal::PosInf, ExtReal::PosInf) => {}
            _ => triconjugate_residual = f64::INFINITY,
        }
    }
    out.cert("minorant_violation", minorant_violation);
    out.cert("triconjugate_residual", triconjugate_residual);
    out.require(minorant_violation <= tol.certificate * scale && triconjugate_residual <= tol.certificate * scale);
    out.values = Values::pair(samples.min().0, env.min().0);

    let mut s = if samples.dim() == 1 { Series::new(&["x", "f", "envelope"]) } else { Series::new(&["x0", "x1", "f", "envelope"]) };
    for k in 0..samples.len() {
        let mut row: Vec<Option<ExtReal>> = samples.node(k).into_iter().map(|x| Some(ExtReal::finite(x))).collect();
        row.push(Some(samples.values()[k]));
        row.push(Some(env.values()[k]));
        s.push(row);
    }
    out.series.insert("envelope".into(), s);
    Ok(out)
}

fn subdiff_kind(p: SubdiffPayload, tol: &Tolerances) -> Result<Outcome, Failure> {
    let f = p.function.validated()?;
    let t = p.tol.unwrap_or(tol.certificate);
    let set = subdifferential(&f, &p.point, t)?;
    let witnesses: Vec<Vec<f64>> = match &set {
        SubdiffSet::Singleton { point } => vec![point.clone()],
        SubdiffSet::Interval { lo, hi, .. } => [*lo, *hi].iter().filter(|v| v.is_finite()).map(|v| vec![*v]).collect(),
        SubdiffSet::Polytope { vertices, .. } => vertices.iter().map(|v| v.to_vec()).collect(),
        SubdiffSet::Empty { .. } => Vec::new(),
    };
    let gap = witnesses
        .iter()
        .map(|y| fenchel_gap(&f, &p.point, y))
        .fold(ExtReal::ZERO, ExtReal::max);
    let mut out = Outcome::new();
    out.cert("set", &set);
    out.cert("max_witness_gap", gap);
    out.require(gap <= ExtReal::finite(t * (1.0 + 1e-6) + 1e-12));
    Ok(out)
}

fn lp_kind(p: LpPayload, tol: &Tolerances) -> Result<Outcome, Failure> {
    p.validate()?;
    let sol = solve_lp(&p)?;
    let mut out = Outcome::new();
    out.values = Values::pair(sol.primal_value, sol.dual_value);
    out.diag("pivots", sol.pivots);
    match sol.status {
        LpStatus::Infeasible => out.status = Status::Infeasible,
        LpStatus::Unbounded => out.status = Status::Unbounded,
        LpStatus::Optimal => {
            let report = verify_complementarity(&p, &sol.x, &sol.y, tol.lp)?;
            let gap = (sol.primal_value - sol.dual_value).abs();
            out.require(report.passed && gap <= tol.lp * (1.0 + sol.primal_value.abs()));
            out.cert("complementarity", report);
            out.diag("x", &sol.x);
            out.diag("y", &sol.y);
        }
    }
    Ok(out)
}

fn cp_kind(p: CpPayload, tol: &Tolerances) -> Result<Outcome, Failure> {
    let cp = ConvexProgram {
        f: p.f.validated()?,
        g: p.g.into_iter().map(|g| g.validated()).collect::<Result<_, _>>()?,
        domain: p.domain,
    };
    cp.validate()?;
    let cert = solve_convex_program(&cp)?;
    let mut out = Outcome::new();
    out.values = Values::pair(cert.primal_value, cert.dual_value);
    out.require(
        cert.stationarity_residual <= tol.kkt
            && cert.complementarity_residuals.iter().all(|r| *r <= tol.kkt)
            && cert.feasibility_residual <= tol.kkt,
    );
    out.cert("kkt", &cert);
    Ok(out)
}

fn cost_matrix(x: &[Vec<f64>], y: &[Vec<f64>], spec: &CostSpec) -> Result<CostMatrix, Error> {
    match spec {
        CostSpec::Euclidean => build_cost(x, y, CostKind::Euclidean, None),
        CostSpec::SqEuclidean => build_cost(x, y, CostKind::SqEuclidean, None),
        CostSpec::Geodesic { grid } => build_cost(x, y, CostKind::Geodesic, Some(grid)),
        CostSpec::Matrix { entries } => {
            let c = CostMatrix::new(entries.clone(), CostKind::Explicit)?;
            if c.rows() != x.len() || c.cols() != y.len() {
                return Err(Error::Dimension(format!("cost matrix is {}x{}, points {}x{}", c.rows(), c.cols(), x.len(), y.len())));
            }
            Ok(c)
        }
    }
}

fn check_measure(m: &RawMeasure, name: &str) -> Result<(), Failure> {
    if m.points.len() != m.weights.len() || m.points.is_empty() {
        return Err(Failure::Malformed(format!("{name}: one weight per point and at least one point")));
    }
    if m.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Failure::Malformed(format!("{name}: weights must be finite and nonnegative")));
    }
    Ok(())
}

fn potentials_series(phi: &[f64], psi: &[f64]) -> Series {
    let mut s = Series::new(&["index", "phi", "psi"]);
    for k in 0..phi.len().max(psi.len()) {
        let cell = |v: &[f64]| v.get(k).map(|x| ExtReal::finite(*x));
        s.push(vec![Some(ExtReal::finite(k as f64)), cell(phi), cell(psi)]);
    }
    s
}

fn ot_kind(p: OtPayload, tol: &Tolerances) -> Result<Outcome, Failure> {
    check_measure(&p.mu, "mu")?;
    check_measure(&p.nu, "nu")?;
    let c = cost_matrix(&p.mu.points, &p.nu.points, &p.cost)?;
    let (a, b) = (&p.mu.weights, &p.nu.weights);
    let plan = transport_lp(a, b, &c)?;
    let pot = dual_potentials(a, b, &c, &plan)?;
    let mut out = Outcome::new();
    out.values = Values::pair(plan.value, pot.dual_value);
    let gap = (plan.value - pot.dual_value).abs();
    out.require(gap <= tol.lp * (1.0 + plan.value.abs()) && pot.support_ok && pot.feasibility_slack >= -tol.lp);
    out.cert("support_residual", pot.support_residual);
    out.cert("feasibility_slack", pot.feasibility_slack);
    out.cert("row_residual", plan.row_residual);
    out.cert("col_residual", plan.col_residual);
    let support: Vec<Value> = plan
        .gamma
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, g)| **g > 1e-12).map(move |(j, g)| json!([i, j, g])))
        .collect();
    out.diag("plan", support);
    out.diag("c_transform_sweeps", pot.sweeps);

    let one_d = p.mu.points.iter().chain(&p.nu.points).all(|x| x.len() == 1);
    let positive = a.iter().chain(b.iter()).all(|w| *w > 0.0);
    if matches!(p.cost, CostSpec::SqEuclidean) && one_d && positive {
        if let (Ok(mu), Ok(nu)) =
            (DiscreteMeasure::new(p.mu.points.clone(), a.clone()), DiscreteMeasure::new(p.nu.points.clone(), b.clone()))
        {
            out.diag("brenier", brenier_check(&plan, &mu, &nu, &pot.phi)?);
        }
    }
    out.series.insert("potentials".into(), potentials_series(&pot.phi, &pot.psi));
    Ok(out)
}

fn kr_kind(p: KrPayload, tol: &Tolerances) -> Result<Outcome, Failure> {
    let n = p.points.len();
    if n == 0 || p.f_plus.len() != n || p.f_minus.len() != n {
        return Err(Failure::Malformed("f_plus and f_minus need one entry per point".into()));
    }
    let c = cost_matrix(&p.points, &p.points, &p.cost)?;
    let norm = kantorovich_norm(&p.f_plus, &p.f_minus, &c)?;
    let mut out = Outcome::new();
    if p.f_plus.iter().sum::<f64>() == 0.0 {
        out.values = Values::pair(0.0, 0.0);
        out.series.insert("potentials".into(), potentials_series(&vec![0.0; n], &[]));
        return Ok(out);
    }
    let kr = kantorovich_rubinstein(&p.f_plus, &p.f_minus, &c)?;
    out.values = Values::pair(norm, kr.dual_value);
    let scale = 1.0 + c.entries().iter().flatten().fold(0.0_f64, |a, v| a.max(*v));
    out.require(kr.lipschitz_violation <= 1e-9 * scale && (norm - kr.dual_value).abs() <= tol.lp * (1.0 + norm));
    out.cert("lipschitz_violation", kr.lipschitz_violation);
    out.cert("antisymmetry_residual", kr.antisymmetry_residual);
    out.series.insert("potentials".into(), potentials_series(&kr.u, &[]));
    Ok(out)
}

fn flow_kind(p: FlowPayload, tol: &Tolerances, seed: u64) -> Result<Outcome, Failure> {
    let count = p.nx * p.ny;
    let geometry = GeodesicSpec {
        nx: p.nx,
        ny: p.ny,
        h: p.h,
        origin: [0.0, 0.0],
        omega: p.omega.unwrap_or_else(|| vec![true; count]),
        sigma: p.sigma,
    };
    let dom = GridDomain::new(geometry, p.source, p.stencil)?;
    let cont = beckmann::continuation_to_w1(&dom, &p.schedule, p.tol)?;
    let report = beckmann::optimality_residuals(&cont.u, &cont.sigma, &dom, p.eps)?;

    let mut out = Outcome::new();
    out.values = Values::pair(cont.value, cont.potential_value);
    let allowed = if cont.value > 0.0 { tol.flow_gap * cont.value } else { tol.lp };
    out.require(cont.gap <= allowed && report.balance_residual <= p.tol && report.lipschitz_violation <= 1e-6);

    // discrete integration by parts on seeded random data
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi: Vec<f64> = (0..dom.node_count()).map(|k| if dom.in_omega(k) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
    let flow = FlowField { values: (0..dom.edges().len()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let m = dom.node_measure();
    let lhs: f64 = dom.divergence(&flow).iter().zip(&phi).map(|(d, v)| d * v).sum::<f64>() * m;
    let rhs: f64 = flow.values.iter().zip(dom.grad(&phi)).map(|(s, g)| s * g).sum::<f64>() * m;
    out.cert("adjointness_residual", (lhs + rhs).abs());

    out.cert("balance_residual", report.balance_residual);
    out.cert("diffusion_residual", report.diffusion_residual);
    out.cert("eikonal_residual", report.eikonal_residual);
    out.cert("active_edges", report.active_edges);
    out.cert("dirichlet_residual", report.dirichlet_residual);
    out.cert("lipschitz_violation", report.lipschitz_violation);
    out.diag("entropy", beckmann::entropy_functional(&cont.sigma, &dom)?);
    let mut rho = BTreeMap::new();
    for (name, gauge) in [("l1_ball", NormKind::L1), ("l2_ball", NormKind::L2), ("linf_ball", NormKind::Linf)] {
        rho.insert(name, beckmann::rho_k_functional(&cont.sigma, &dom, gauge)?);
    }
    out.diag("rho_k", rho);
    out.diag("u", &cont.u.values);
    out.diag("sigma", &cont.sigma.values);
    out.diag("edges", dom.edges().iter().map(|e| [e.tail, e.head]).collect::<Vec<_>>());

    let mut s = Series::new(&["p", "flux_value", "potential_value", "gap", "residual", "newton_iterations"]);
    for st in &cont.stages {
        s.push_finite(&[st.p, st.flux_value, st.potential_value, st.gap, st.residual, st.newton_iterations as f64]);
    }
    out.series.insert("gap_vs_p".into(), s);
    Ok(out)
}
