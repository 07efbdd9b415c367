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

//! Reduction of an orthogonal matrix to `diag(1, …, 1, ±1)` by right
//! multiplication with Givens rotations in triangular order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};
use crate::sympcore::{rotate_columns, triangular_pairs};

/// Angles and final sign from [`givens_qr`].
#[derive(Debug, Clone, PartialEq)]
pub struct GivensResult<T> {
    /// Angles `θ_{jk}` in triangular order.
    pub theta: Vec<T>,
    /// The last diagonal entry after elimination, `+1` or `-1`.
    pub sign: i8,
}

/// Finds θ such that `P · O₁₂(θ₁₂) · O₁₃(θ₁₃) ⋯ O_{N−1,N}(θ_{N−1,N}) = diag(1, …, 1, sign)`.
pub fn givens_qr<T: Real>(p: &DMatrix<T>) -> Result<GivensResult<T>> {
    let n = p.nrows();
    if !p.is_square() || n == 0 {
        return Err(Error::InvalidDimension(format!("expected a square matrix, got {:?}", p.shape())));
    }
    let residual = max_abs(&(p * p.transpose() - DMatrix::<T>::identity(n, n)));
    if !(residual < T::tol(1e-8)) {
        return Err(Error::NotOrthogonal {
            residual: residual.as_f64(),
        });
    }
    let mut work = p.clone();
    let mut theta = Vec::with_capacity(n * (n - 1) / 2);
    for (k, j) in triangular_pairs(n) {
        let t = (-work[(k, j)]).atan2(work[(k, k)]) + T::zero();
        let (s, c) = t.sin_cos();
        rotate_columns(&mut work, k, j, c, s);
        theta.push(t);
    }
    let sign = if work[(n - 1, n - 1)] < T::zero() { -1 } else { 1 };
    Ok(GivensResult { theta, sign })
}
