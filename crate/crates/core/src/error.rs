// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid mode indices: {0}")]
    InvalidModes(String),

    #[error("wrong number of beam splitter angles: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not orthogonal (residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("matrix is not symplectic (residual {residual:e})")]
    NotSymplectic { residual: f64 },

    #[error("Hamiltonian is not eligible for compilation: {0}")]
    Ineligible(String),

    #[error("Hamiltonian is not positive: {0}")]
    NotPositive(String),

    #[error("Hamiltonian cannot be compiled: {0}")]
    NotCompilable(String),

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("divergent population at momentum index {k}")]
    DivergentPopulation { k: usize },

    #[error("singular group velocity at momentum index {k}")]
    SingularVelocity { k: usize },

    #[error("no correlation front crosses the threshold")]
    NoFront,

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
