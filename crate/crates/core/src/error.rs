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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("improper function")]
    Improper,
    #[error("no affine minorant")]
    NoAffineMinorant,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("qualification violated: {0}")]
    QualificationViolated(String),
    #[error("qualification (slater) not verified")]
    SlaterNotVerified,
    #[error("pivot limit reached after {0} iterations")]
    PivotLimit(usize),
    #[error("marginal mismatch: total masses {0} and {1}")]
    MarginalMismatch(f64, f64),
    #[error("point not in domain: {0}")]
    PointNotInDomain(String),
    #[error("not a semi-distance: {0}")]
    NotSemiDistance(String),
    #[error("p-solve failed (p = {p}, last residual {residual:e})")]
    PSolveFailed { p: f64, residual: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
