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

//! Gaussian states, their evolution, reduced states and Rényi-2 measures.
//!
//! Conventions: quadrature ordering `(φ_1..φ_N, π_1..π_N)`, vacuum covariance
//! `1/2`, coherent amplitudes `α_j = (⟨φ_j⟩ + i⟨π_j⟩)/√2`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};
use crate::sympcore::{is_symplectic, omega, SymplecticMatrix, TOL_SYMP};

/// Negative entropies above this are rounded to zero.
pub const ENTROPY_CLAMP: f64 = 1e-9;

/// Mean vector and covariance matrix of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Real> {
    pub mean: DVector<T>,
    pub covariance: DMatrix<T>,
}

/// Debug snapshot, covariance in row-major order.
#[derive(Debug, Clone, Serialize)]
pub struct StateSnapshot {
    pub modes: usize,
    pub mean: Vec<f64>,
    pub covariance: Vec<f64>,
}

impl<T: Real> GaussianState<T> {
    /// Checked constructor: symmetric covariance obeying the uncertainty relation.
    pub fn new(mean: DVector<T>, covariance: DMatrix<T>) -> Result<Self> {
        let s = Self { mean, covariance };
        s.validate()?;
        Ok(s)
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            mean: DVector::zeros(2 * n),
            covariance: DMatrix::from_diagonal_element(2 * n, 2 * n, T::half()),
        }
    }

    pub fn coherent(alpha: &[Complex<T>]) -> Self {
        let mut s = Self::vacuum(alpha.len());
        s.mean = crate::compiler::alpha_to_mean(alpha);
        s
    }

    /// Product of thermal modes with occupations `occ`.
    pub fn thermal(occ: &[T]) -> Self {
        let n = occ.len();
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for (j, &o) in occ.iter().enumerate() {
            cov[(j, j)] = o + T::half();
            cov[(n + j, n + j)] = o + T::half();
        }
        Self {
            mean: DVector::zeros(2 * n),
            covariance: cov,
        }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// Symmetry and the uncertainty relation `ν_j ≥ 1/2`.
    pub fn validate(&self) -> Result<()> {
        let dim = self.covariance.nrows();
        if !self.covariance.is_square() || dim % 2 != 0 || dim == 0 || self.mean.len() != dim {
            return Err(Error::InvalidDimension(format!(
                "mean of length {} with covariance {:?}",
                self.mean.len(),
                self.covariance.shape()
            )));
        }
        let spectrum = symplectic_spectrum(&self.covariance)?;
        let min = spectrum.iter().fold(T::max_value().unwrap_or(T::one()), |m, &x| m.min(x));
        if min < T::half() - T::lit(1e-10) {
            return Err(Error::InvalidState(format!("symplectic eigenvalue {min} violates the uncertainty relation")));
        }
        Ok(())
    }

    /// `r ↦ S r`, `σ ↦ S σ Sᵀ`.
    pub fn evolve(&self, s: &SymplecticMatrix<T>) -> Result<Self> {
        if s.matrix().nrows() != self.covariance.nrows() {
            return Err(Error::InvalidDimension(format!(
                "symplectic matrix for {} modes applied to {} modes",
                s.modes(),
                self.modes()
            )));
        }
        let check = is_symplectic(s.matrix(), T::lit(TOL_SYMP))?;
        if !check.passed {
            return Err(Error::NotSymplectic {
                residual: check.residual.as_f64(),
            });
        }
        let m = s.matrix();
        let cov = m * &self.covariance * m.transpose();
        let cov = (&cov + cov.transpose()) * T::half();
        Ok(Self {
            mean: m * &self.mean,
            covariance: cov,
        })
    }

    /// Reduced state on `region`.
    pub fn restrict(&self, region: &ModeRegion) -> Result<Self> {
        let n = self.modes();
        if region.indices.iter().any(|&i| i >= n) {
            return Err(Error::InvalidRegion(format!("region {:?} exceeds {n} modes", region.indices)));
        }
        let rows: Vec<usize> = region
            .indices
            .iter()
            .copied()
            .chain(region.indices.iter().map(|&i| n + i))
            .collect();
        let k = rows.len();
        Ok(Self {
            mean: DVector::from_fn(k, |i, _| self.mean[rows[i]]),
            covariance: DMatrix::from_fn(k, k, |i, j| self.covariance[(rows[i], rows[j])]),
        })
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            modes: self.modes(),
            mean: self.mean.iter().map(|x| x.as_f64()).collect(),
            covariance: self.covariance.transpose().iter().map(|x| x.as_f64()).collect(),
        }
    }
}

/// Strictly increasing set of mode indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeRegion {
    indices: Vec<usize>,
}

impl ModeRegion {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidRegion("empty region".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRegion(format!("indices {indices:?} are not strictly increasing")));
        }
        Ok(Self { indices })
    }

    /// `len` consecutive sites starting at `start`.
    pub fn interval(start: usize, len: usize) -> Result<Self> {
        Self::new((start..start + len).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        !self.indices.iter().any(|i| other.indices.binary_search(i).is_ok())
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v: Vec<usize> = self.indices.iter().chain(&other.indices).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self { indices: v }
    }

    /// Positions of `other`'s indices within this region, if contained.
    pub fn relative(&self, other: &Self) -> Option<Self> {
        let pos: Option<Vec<usize>> = other.indices.iter().map(|i| self.indices.binary_search(i).ok()).collect();
        pos.map(|indices| Self { indices })
    }
}

/// `ln det(m)` for a symmetric positive definite matrix via Cholesky.
fn log_det_spd<T: Real>(m: &DMatrix<T>) -> Option<T> {
    let chol = Cholesky::new(m.clone())?;
    let l = chol.l_dirty();
    Some((0..m.nrows()).fold(T::zero(), |acc, i| acc + l[(i, i)].ln()) * T::two())
}

/// `S₂ = ½ ln det(2σ)`.
pub fn renyi2_entropy<T: Real>(state: &GaussianState<T>) -> Result<T> {
    let two_sigma = &state.covariance * T::two();
    let ld = log_det_spd(&two_sigma).ok_or_else(|| Error::InvalidState("2σ is not positive definite".into()))?;
    let s = ld * T::half();
    if s >= T::zero() {
        Ok(s)
    } else if s > -T::lit(ENTROPY_CLAMP) {
        Ok(T::zero())
    } else {
        Err(Error::InvalidState(format!("negative Rényi-2 entropy {s}")))
    }
}

/// `I₂(A:B) = S₂(A) + S₂(B) − S₂(A ∪ B)`.
pub fn renyi2_mutual_information<T: Real>(state: &GaussianState<T>, a: &ModeRegion, b: &ModeRegion) -> Result<T> {
    if !a.is_disjoint(b) {
        return Err(Error::InvalidRegion("regions overlap".into()));
    }
    let sa = renyi2_entropy(&state.restrict(a)?)?;
    let sb = renyi2_entropy(&state.restrict(b)?)?;
    let sab = renyi2_entropy(&state.restrict(&a.union(b))?)?;
    let i = sa + sb - sab;
    if i >= T::zero() {
        Ok(i)
    } else if i > -T::lit(ENTROPY_CLAMP) {
        Ok(T::zero())
    } else {
        Err(Error::InvalidState(format!("negative mutual information {i}")))
    }
}

/// Williamson spectrum of a covariance matrix, ascending.
pub fn symplectic_spectrum<T: Real>(sigma: &DMatrix<T>) -> Result<Vec<T>> {
    let dim = sigma.nrows();
    if !sigma.is_square() || dim == 0 || dim % 2 != 0 {
        return Err(Error::InvalidDimension(format!("covariance of shape {:?}", sigma.shape())));
    }
    let scale = max_abs(sigma).max(T::one());
    if max_abs(&(sigma - sigma.transpose())) > T::lit(1e-12) * scale {
        return Err(Error::InvalidState("covariance is not symmetric".into()));
    }
    let eig = SymmetricEigen::new(sigma.clone());
    if eig.eigenvalues.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::InvalidState("covariance is not positive definite".into()));
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.sqrt()))
        * eig.eigenvectors.transpose();
    let k = &root * omega::<T>(dim / 2) * &root;
    let mut ev: Vec<T> = SymmetricEigen::new(k.transpose() * &k)
        .eigenvalues
        .iter()
        .map(|&x| x.max(T::zero()).sqrt())
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev.into_iter().step_by(2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympcore::{beam_splitter_gate, squeezer_gate, GateSpec};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn two_mode_squeezed(r: f64) -> GaussianState<f64> {
        let s = beam_splitter_gate(FRAC_PI_4, 0, 1, 2)
            .unwrap()
            .compose(&squeezer_gate(&[r, -r]).unwrap());
        GaussianState::vacuum(2).evolve(&s).unwrap()
    }

    fn random_pure(rng: &mut ChaCha8Rng, n: usize, gates: usize) -> GaussianState<f64> {
        let mut st = GaussianState::vacuum(n);
        for _ in 0..gates {
            let mode = rng.random_range(0..n);
            let g = match rng.random_range(0..3) {
                0 => GateSpec::Squeezer { mode, z: rng.random_range(-0.5..0.5) },
                1 => GateSpec::PhaseShift { mode, phi: rng.random_range(0.0..2.0 * PI) },
                _ => {
                    let j = rng.random_range(0..n - 1);
                    GateSpec::BeamSplitter { theta: rng.random_range(-PI..PI), j, k: rng.random_range(j + 1..n) }
                }
            };
            st = st.evolve(&g.to_matrix(n).unwrap()).unwrap();
        }
        st
    }

    #[test]
    fn vacuum_properties() {
        let v = GaussianState::<f64>::vacuum(3);
        assert_eq!(v.covariance, DMatrix::from_diagonal_element(6, 6, 0.5));
        assert_eq!(renyi2_entropy(&v).unwrap(), 0.0);
        for x in symplectic_spectrum(&v.covariance).unwrap() {
            assert_abs_diff_eq!(x, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn squeezed_vacuum_covariance() {
        let z: f64 = 0.4;
        let st = GaussianState::vacuum(1).evolve(&squeezer_gate(&[z]).unwrap()).unwrap();
        assert_abs_diff_eq!(st.covariance[(0, 0)], (-2.0 * z).exp() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.covariance[(1, 1)], (2.0 * z).exp() / 2.0, epsilon = 1e-15);
        assert!(renyi2_entropy(&st).unwrap() < 1e-12);
    }

    #[test]
    fn evolve_rejects_mismatch() {
        let v = GaussianState::<f64>::vacuum(2);
        assert!(v.evolve(&SymplecticMatrix::identity(3)).is_err());
        assert_eq!(v.evolve(&SymplecticMatrix::identity(2)).unwrap(), v);
    }

    #[test]
    fn thermal_entropy() {
        for &n in &[0.0f64, 0.125, 1.0, 7.5] {
            let st = GaussianState::thermal(&[n]);
            assert_abs_diff_eq!(renyi2_entropy(&st).unwrap(), (1.0 + 2.0 * n).ln(), epsilon = 1e-13);
            assert_abs_diff_eq!(symplectic_spectrum(&st.covariance).unwrap()[0], n + 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_mode_squeezing_reduces_to_thermal() {
        let r = 0.5;
        let st = two_mode_squeezed(r);
        let a = ModeRegion::new(vec![0]).unwrap();
        let b = ModeRegion::new(vec![1]).unwrap();
        let ra = st.restrict(&a).unwrap();
        assert_abs_diff_eq!(ra.covariance, DMatrix::from_diagonal_element(2, 2, (2.0 * r).cosh() / 2.0), epsilon = 1e-12);
        let i = renyi2_mutual_information(&st, &a, &b).unwrap();
        assert_abs_diff_eq!(i, 2.0 * (2.0 * r).cosh().ln(), epsilon = 1e-12);
        assert_eq!(i, renyi2_mutual_information(&st, &b, &a).unwrap());
    }

    #[test]
    fn regions() {
        assert!(ModeRegion::new(vec![]).is_err());
        assert!(ModeRegion::new(vec![2, 1]).is_err());
        assert!(ModeRegion::new(vec![1, 1]).is_err());
        let v = GaussianState::<f64>::vacuum(4);
        assert_eq!(v.restrict(&ModeRegion::interval(0, 4).unwrap()).unwrap(), v);
        assert_eq!(v.restrict(&ModeRegion::new(vec![1, 3]).unwrap()).unwrap(), GaussianState::vacuum(2));
        assert!(v.restrict(&ModeRegion::new(vec![4]).unwrap()).is_err());
        let a = ModeRegion::new(vec![0, 1]).unwrap();
        assert!(renyi2_mutual_information(&v, &a, &ModeRegion::new(vec![1, 2]).unwrap()).is_err());
    }

    #[test]
    fn random_pure_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let st = random_pure(&mut rng, 4, 40);
            assert!(renyi2_entropy(&st).unwrap() < 1e-9);
            for x in symplectic_spectrum(&st.covariance).unwrap() {
                assert_abs_diff_eq!(x, 0.5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn restriction_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let st = random_pure(&mut rng, 6, 60);
        let outer = ModeRegion::new(vec![0, 2, 3, 5]).unwrap();
        let inner = ModeRegion::new(vec![2, 5]).unwrap();
        let rel = outer.relative(&inner).unwrap();
        let a = st.restrict(&outer).unwrap().restrict(&rel).unwrap();
        assert_eq!(a, st.restrict(&inner).unwrap());
    }

    #[test]
    fn corrupted_covariance_fails_uncertainty() {
        let bad = DMatrix::from_diagonal_element(2, 2, 0.3);
        assert!(matches!(
            GaussianState::new(DVector::zeros(2), bad.clone()),
            Err(Error::InvalidState(_))
        ));
        let st = GaussianState { mean: DVector::zeros(2), covariance: bad };
        assert!(renyi2_entropy(&st).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(symplectic_spectrum(&asym).is_err());
    }

    #[test]
    fn snapshot_layout() {
        let snap = two_mode_squeezed(0.2).snapshot();
        assert_eq!(snap.modes, 2);
        assert_eq!(snap.covariance.len(), 16);
    }
}
