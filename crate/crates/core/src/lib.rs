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

//! Convex conjugates, duality certificates, linear and convex programs,
//! discrete optimal transport and grid minimal-flow problems.
//!
//! The crate is organised by subsystem:
//!
//! * [`conjugate`]: function descriptors, the discrete Legendre transform,
//!   biconjugates (convex envelopes) and subdifferentials.
//! * [`duality`]: infimal convolution, conjugates of sums and the
//!   Fenchel–Rockafellar primal–dual pair with extremality checks.
//! * [`programs`]: a dense two-phase simplex with dual extraction, and
//!   Lagrangian dual ascent for small convex programs.
//! * [`transport`]: discrete Kantorovich problems, c-transforms, the
//!   Kantorovich–Rubinstein distance case and geodesic costs.
//! * [`beckmann`]: divergence-constrained flows on grids, p-Laplacian
//!   continuation and optimality residuals.
//!
//! Every value is immutable after construction and every operation is a
//! pure function of its inputs.

pub mod beckmann;
pub mod conjugate;
pub mod duality;
mod error;
mod ext_real;
mod grid;
mod linalg;
pub mod programs;
pub mod transport;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use grid::{Grid1D, GridFunction};

/// Version string embedded in result files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
