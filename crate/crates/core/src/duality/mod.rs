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

//! Conjugates of sums and the Fenchel–Rockafellar primal–dual pair.

mod composite;
mod fenchel;
mod infconv;

pub use fenchel::{extremality_check, fenchel_rockafellar, ExtremalityReport, FrStatus, PrimalDualPair};
pub use infconv::{conjugate_of_sum, inf_convolution, InfConvolution, SumConjugate};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense matrix of a linear map `X → Y` (rows = dimension of `Y`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinearMap {
    matrix: Vec<Vec<f64>>,
}

impl LinearMap {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let cols = matrix.first().map_or(0, Vec::len);
        if cols == 0 || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("linear map needs a nonempty rectangular matrix"));
        }
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("linear map entries must be finite"));
        }
        Ok(LinearMap { matrix })
    }

    pub fn identity(n: usize) -> Self {
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        LinearMap { matrix }
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        crate::linalg::mat_vec(&self.matrix, x)
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        crate::linalg::mat_t_vec(&self.matrix, y)
    }

    /// The map `-Aᵀ`.
    pub fn neg_transpose(&self) -> LinearMap {
        let t = crate::linalg::transpose(&self.matrix);
        LinearMap { matrix: t.into_iter().map(|r| r.into_iter().map(|v| -v).collect()).collect() }
    }

    pub(crate) fn spectral_norm(&self) -> f64 {
        crate::linalg::spectral_norm(&self.matrix)
    }
}
