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

//! Complex-squeezer form of the time-dependent layer and the coherent-input
//! reduction to a single fixed beam splitter array.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex;

use super::OTACircuit;
use crate::engine::GaussianState;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sympcore::{complex_squeezer_block, embed_block, SymplecticMatrix};

/// `S_Sq(z)⁻¹ · S_PS(φ) · S_Sq(z)` for a single mode.
pub(crate) fn squeezed_rotation<T: Real>(z: T, phi: T) -> Matrix2<T> {
    let (s, c) = phi.sin_cos();
    let e = (T::two() * z).exp();
    Matrix2::new(c, e * s, -s / e, c)
}

/// Polar parameters of a squeezed rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSqueezerParams<T: Real> {
    pub xi: T,
    /// `Φ ∈ [0, π)`.
    pub phase: T,
    /// Orthogonal factor `R` with `S_Sq⁻¹ S_PS S_Sq = R · S_CSq(ξ, Φ)`.
    pub rotation: Matrix2<T>,
}

/// Square root of `MᵀM` for a 2×2 matrix with unit determinant.
fn gram_sqrt<T: Real>(m: &Matrix2<T>) -> Matrix2<T> {
    let g = m.transpose() * m;
    let denom = (g.trace() + T::two()).sqrt();
    (g + Matrix2::identity()) / denom
}

/// Reads `(ξ, Φ)` off a symmetric block `cosh ξ·1 − sinh ξ·[[cos Φ, sin Φ], [sin Φ, −cos Φ]]`.
fn block_params<T: Real>(sigma: &Matrix2<T>) -> (T, T) {
    let half_diff = (sigma[(0, 0)] - sigma[(1, 1)]) * T::half();
    let b = (sigma[(0, 1)] + sigma[(1, 0)]) * T::half();
    let sh = (half_diff * half_diff + b * b).sqrt();
    let xi0 = sh.asinh();
    if sh <= T::eps() {
        return (xi0, T::zero());
    }
    let psi = (-b).atan2(-half_diff);
    let pi = T::pi();
    if psi < T::zero() {
        (-xi0, psi + pi)
    } else if psi >= pi {
        (-xi0, psi - pi)
    } else {
        (xi0, psi)
    }
}

/// Splits `S_Sq(z)⁻¹ S_PS(φ) S_Sq(z)` into an orthogonal factor and a
/// complex squeezer, right polar form.
pub fn complex_squeezer_params<T: Real>(z: T, phi: T) -> Result<ComplexSqueezerParams<T>> {
    if !z.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidParameter("non-finite squeezer parameter".into()));
    }
    let m = squeezed_rotation(z, phi);
    let sigma = gram_sqrt(&m);
    let (xi, phase) = block_params(&sigma);
    let inv = Matrix2::new(sigma[(1, 1)], -sigma[(0, 1)], -sigma[(1, 0)], sigma[(0, 0)]);
    Ok(ComplexSqueezerParams {
        xi,
        phase,
        rotation: m * inv,
    })
}

/// Reduced circuit for coherent inputs at a fixed time.
///
/// The full circuit factorizes as `S(t) = S_BS(θ) · S_CSq(ζ(t)) · R(t) · S_BS(θ)⁻¹`
/// with `R(t)` passive. Acting on a coherent state, `R(t) S_BS(θ)⁻¹` only moves
/// the displacement, so the output equals `S_BS(θ) · S_CSq(ζ(t))` applied to
/// the coherent state with amplitudes `α′`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentReduction<T: Real> {
    pub theta: Vec<T>,
    pub xi: Vec<T>,
    pub phase: Vec<T>,
    /// `R(t)`, one 2×2 rotation per normal mode.
    pub residual_rotation: SymplecticMatrix<T>,
    pub alpha: Vec<Complex<T>>,
    pub alpha_adjusted: Vec<Complex<T>>,
}

impl<T: Real> CoherentReduction<T> {
    /// The complex-squeezer layer.
    pub fn squeezer_layer(&self) -> SymplecticMatrix<T> {
        let n = self.xi.len();
        let mut m = DMatrix::identity(2 * n, 2 * n);
        for j in 0..n {
            embed_block(&mut m, j, &complex_squeezer_block(self.xi[j], self.phase[j]));
        }
        SymplecticMatrix::from_trusted(m)
    }

    /// `S_BS(θ) · S_CSq(ζ)`.
    pub fn reduced_symplectic(&self) -> SymplecticMatrix<T> {
        let n = self.xi.len();
        let bs = crate::sympcore::bs_array(&self.theta, n).expect("triangular angle count");
        bs.compose(&self.squeezer_layer())
    }

    /// Output state of the reduced pipeline.
    pub fn output_state(&self) -> GaussianState<T> {
        let input = GaussianState::coherent(&self.alpha_adjusted);
        input
            .evolve(&self.reduced_symplectic())
            .expect("reduced circuit is symplectic by construction")
    }
}

/// Quadrature mean `√2 (Re α, Im α)` of a coherent state.
pub fn alpha_to_mean<T: Real>(alpha: &[Complex<T>]) -> DVector<T> {
    let n = alpha.len();
    let r2 = T::two().sqrt();
    DVector::from_fn(2 * n, |i, _| if i < n { alpha[i].re * r2 } else { alpha[i - n].im * r2 })
}

pub fn mean_to_alpha<T: Real>(mean: &DVector<T>) -> Vec<Complex<T>> {
    let n = mean.len() / 2;
    let r2 = T::two().sqrt();
    (0..n).map(|j| Complex::new(mean[j] / r2, mean[n + j] / r2)).collect()
}

/// Builds the coherent-input reduction of `circuit` at time `t`.
pub fn coherent_reduction<T: Real>(circuit: &OTACircuit<T>, t: T, alpha: &[Complex<T>]) -> Result<CoherentReduction<T>> {
    let n = circuit.n;
    if alpha.len() != n {
        return Err(Error::InvalidDimension(format!("{} amplitudes for {n} modes", alpha.len())));
    }
    let mut xi = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    let mut rot = DMatrix::identity(2 * n, 2 * n);
    for j in 0..n {
        let p = complex_squeezer_params(circuit.z[j], circuit.d[j] * t)?;
        // M = R Σ = (R Σ Rᵀ) R; the left factor is the squeezer that acts last.
        let sigma_left = p.rotation * complex_squeezer_block(p.xi, p.phase) * p.rotation.transpose();
        let (x, ph) = block_params(&sigma_left);
        xi.push(x);
        phase.push(ph);
        embed_block(&mut rot, j, &p.rotation);
    }
    let residual_rotation = SymplecticMatrix::from_trusted(rot);
    let bs = circuit.bs_matrix();
    let r = alpha_to_mean(alpha);
    let r_adj = residual_rotation.matrix() * (bs.matrix().transpose() * r);
    Ok(CoherentReduction {
        theta: circuit.theta.clone(),
        xi,
        phase,
        residual_rotation,
        alpha: alpha.to_vec(),
        alpha_adjusted: mean_to_alpha(&r_adj),
    })
}
