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

//! Problem files: a kind tag, a payload mirroring the module inputs, and
//! options.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use fenchelkit::beckmann::Stencil;
use fenchelkit::conjugate::FunctionDescriptor;
use fenchelkit::programs::{ConvexProgram, LpProblem};
use fenchelkit::transport::GeodesicSpec;
use fenchelkit::Grid1D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Conjugate,
    Envelope,
    Subdiff,
    Lp,
    Cp,
    Ot,
    Krnorm,
    Flow,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Conjugate => "conjugate",
            Kind::Envelope => "envelope",
            Kind::Subdiff => "subdiff",
            Kind::Lp => "lp",
            Kind::Cp => "cp",
            Kind::Ot => "ot",
            Kind::Krnorm => "krnorm",
            Kind::Flow => "flow",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: Kind,
    pub payload: Value,
    #[serde(default)]
    pub options: Options,
}

/// Every tolerance the front end uses, with its default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Value gaps and complementarity of linear and transport problems.
    pub lp: f64,
    /// Generic certificates (minorant checks, subgradient membership).
    pub certificate: f64,
    /// KKT residuals of convex programs.
    pub kkt: f64,
    /// Grid-derived comparisons allow `grid_factor · h`.
    pub grid_factor: f64,
    /// Relative primal–dual gap accepted for minimal flows.
    pub flow_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { lp: 1e-8, certificate: 1e-6, kkt: 1e-4, grid_factor: 2.0, flow_gap: 0.02 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugatePayload {
    pub function: FunctionDescriptor,
    #[serde(default)]
    pub dual_grid: Option<Vec<Grid1D>>,
    /// Closed form to compare a sampled conjugate against.
    #[serde(default)]
    pub reference: Option<FunctionDescriptor>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopePayload {
    pub function: FunctionDescriptor,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdiffPayload {
    pub function: FunctionDescriptor,
    pub point: Vec<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
}

pub type LpPayload = LpProblem;
pub type CpPayload = ConvexProgram;

/// Weights need not be normalized; both sides must carry the same mass.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMeasure {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    Euclidean,
    SqEuclidean,
    Geodesic { grid: GeodesicSpec },
    Matrix { entries: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtPayload {
    pub mu: RawMeasure,
    pub nu: RawMeasure,
    pub cost: CostSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrPayload {
    pub points: Vec<Vec<f64>>,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    pub cost: CostSpec,
}

fn default_schedule() -> Vec<f64> {
    fenchelkit::beckmann::DEFAULT_SCHEDULE.to_vec()
}

fn default_flow_tol() -> f64 {
    1e-10
}

fn default_eps() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowPayload {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Whole rectangle when absent.
    #[serde(default)]
    pub omega: Option<Vec<bool>>,
    #[serde(default)]
    pub sigma: Vec<bool>,
    pub source: Vec<f64>,
    #[serde(default)]
    pub stencil: Stencil,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<f64>,
    #[serde(default = "default_flow_tol")]
    pub tol: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}
