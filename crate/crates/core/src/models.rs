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

//! Lattice Hamiltonians `H = H^φ ⊕ H^π` for the supported theory families
//! and the analytic eigensystem of real symmetric circulant matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};

/// Theory tag and parameters attached to a [`HamiltonianMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Theory {
    Relativistic { m: f64 },
    Fractional { m: f64, alpha: f64 },
    Nonrelativistic { m: f64, potential: Vec<f64> },
    /// Effective mass `m·f` with `f` sampled on the sites at time `time`.
    Curved { m: f64, profile: Vec<f64>, time: f64 },
    Prequench,
    /// Matrices supplied directly.
    Custom,
}

impl Theory {
    pub fn name(&self) -> &'static str {
        match self {
            Theory::Relativistic { .. } => "relativistic",
            Theory::Fractional { .. } => "fractional",
            Theory::Nonrelativistic { .. } => "nonrelativistic",
            Theory::Curved { .. } => "curved",
            Theory::Prequench => "prequench",
            Theory::Custom => "custom",
        }
    }
}

/// Block-diagonal quadratic Hamiltonian on N lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix<T: Real> {
    pub n: usize,
    pub epsilon: T,
    pub h_phi: DMatrix<T>,
    pub h_pi: DMatrix<T>,
    pub theory: Theory,
}

impl<T: Real> HamiltonianMatrix<T> {
    /// Builds a Hamiltonian from explicit blocks and checks its invariants.
    pub fn new(h_phi: DMatrix<T>, h_pi: DMatrix<T>, epsilon: T, theory: Theory) -> Result<Self> {
        let n = h_phi.nrows();
        if n == 0 || !h_phi.is_square() || h_pi.shape() != h_phi.shape() {
            return Err(Error::InvalidDimension(format!(
                "blocks have shapes {:?} and {:?}",
                h_phi.shape(),
                h_pi.shape()
            )));
        }
        let h = Self {
            n,
            epsilon,
            h_phi,
            h_pi,
            theory,
        };
        h.check_invariants()?;
        Ok(h)
    }

    /// The full 2N×2N matrix `H^φ ⊕ H^π`.
    pub fn full(&self) -> DMatrix<T> {
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.h_phi);
        m.view_mut((n, n), (n, n)).copy_from(&self.h_pi);
        m
    }

    /// `‖H^φ H^π − H^π H^φ‖_max / (‖H^φ‖_max ‖H^π‖_max)`.
    pub fn commutator_residual(&self) -> T {
        let c = &self.h_phi * &self.h_pi - &self.h_pi * &self.h_phi;
        let scale = max_abs(&self.h_phi) * max_abs(&self.h_pi);
        if scale == T::zero() {
            T::zero()
        } else {
            max_abs(&c) / scale
        }
    }

    pub fn blocks_commute(&self) -> bool {
        self.commutator_residual() < T::tol(1e-10)
    }

    /// Symmetry and positive semi-definiteness of both blocks.
    pub fn check_invariants(&self) -> Result<()> {
        for (name, b) in [("h_phi", &self.h_phi), ("h_pi", &self.h_pi)] {
            if b.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} has non-finite entries")));
            }
            let scale = max_abs(b).max(T::one());
            if max_abs(&(b - b.transpose())) > T::tol(1e-12) * scale {
                return Err(Error::InvalidParameter(format!("{name} is not symmetric")));
            }
            let min = SymmetricEigen::new(b.clone()).eigenvalues.min();
            if min < -T::tol(1e-10) * scale {
                return Err(Error::NotPositive(format!("{name} has eigenvalue {min}")));
            }
        }
        Ok(())
    }
}

fn check_size_spacing<T: Real>(n: usize, epsilon: T) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("need N >= 2, got {n}")));
    }
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("lattice spacing must be positive, got {epsilon}")));
    }
    Ok(())
}

fn check_mass<T: Real>(m: T) -> Result<()> {
    if !(m >= T::zero()) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("mass must be non-negative, got {m}")));
    }
    Ok(())
}

/// Periodic tridiagonal matrix with the given diagonal and uniform hopping.
/// For N = 2 both bonds land on the same entry.
fn periodic_tridiagonal<T: Real>(diag: &[T], nu: T) -> DMatrix<T> {
    let n = diag.len();
    let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag));
    for j in 0..n {
        let k = (j + 1) % n;
        h[(j, k)] += nu;
        h[(k, j)] += nu;
    }
    h
}

/// Relativistic Klein-Gordon field on a periodic lattice.
pub fn relativistic_hamiltonian<T: Real>(n: usize, m: T, epsilon: T) -> Result<HamiltonianMatrix<T>> {
    check_size_spacing(n, epsilon)?;
    check_mass(m)?;
    let nu = -T::one() / epsilon;
    let mu = epsilon * m * m - T::two() * nu;
    let h_phi = periodic_tridiagonal(&vec![mu; n], nu);
    let h_pi = DMatrix::from_diagonal_element(n, n, T::one() / epsilon);
    HamiltonianMatrix::new(h_phi, h_pi, epsilon, Theory::Relativistic { m: m.as_f64() })
}

/// Finite-lattice couplings of the fractional Laplacian,
/// `f_{jj'} = (2^α/N) Σ_k cos(2π(j−j')k/N) |sin(πk/N)|^α`.
pub fn fractional_couplings<T: Real>(n: usize, alpha: T) -> Result<DMatrix<T>> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent must be positive, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::InvalidDimension("need N >= 1".into()));
    }
    let nf = T::from_usize_lossy(n);
    let pi = T::pi();
    let weights: Vec<T> = (0..n)
        .map(|k| {
            let s = (pi * T::from_usize_lossy(k) / nf).sin().abs();
            if s == T::zero() {
                T::zero()
            } else {
                s.powf(alpha)
            }
        })
        .collect();
    let pref = T::two().powf(alpha) / nf;
    let column: Vec<T> = (0..n)
        .map(|r| {
            let sum = weights.iter().enumerate().fold(T::zero(), |acc, (k, &w)| {
                let phase = T::two() * pi * T::from_usize_lossy((r * k) % n) / nf;
                acc + phase.cos() * w
            });
            pref * sum
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| column[(i + n - j) % n]))
}

/// Long-range theory with a fractional Laplacian kinetic term of order α.
pub fn fractional_hamiltonian<T: Real>(n: usize, m: T, epsilon: T, alpha: T) -> Result<HamiltonianMatrix<T>> {
    check_size_spacing(n, epsilon)?;
    check_mass(m)?;
    let f = fractional_couplings(n, alpha)?;
    let mass_term = if m == T::zero() { T::zero() } else { epsilon * m.powf(alpha) };
    let h_phi = f / epsilon + DMatrix::from_diagonal_element(n, n, mass_term);
    let h_pi = DMatrix::from_diagonal_element(n, n, T::one() / epsilon);
    HamiltonianMatrix::new(
        h_phi,
        h_pi,
        epsilon,
        Theory::Fractional {
            m: m.as_f64(),
            alpha: alpha.as_f64(),
        },
    )
}

/// Non-relativistic particles of mass `m` in the potential `v`.
pub fn nonrelativistic_hamiltonian<T: Real>(n: usize, m: T, epsilon: T, v: &[T]) -> Result<HamiltonianMatrix<T>> {
    check_size_spacing(n, epsilon)?;
    if !(m > T::zero()) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {m}")));
    }
    if v.len() != n {
        return Err(Error::InvalidDimension(format!("potential has {} entries, expected {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite potential".into()));
    }
    let nu = -T::one() / (T::two() * m * epsilon * epsilon);
    let diag: Vec<T> = v.iter().map(|&vj| vj - T::two() * nu).collect();
    let h = periodic_tridiagonal(&diag, nu);
    HamiltonianMatrix::new(
        h.clone(),
        h,
        epsilon,
        Theory::Nonrelativistic {
            m: m.as_f64(),
            potential: v.iter().map(|x| x.as_f64()).collect(),
        },
    )
}

/// Relativistic field with site-dependent effective mass `m·f_j`, where
/// `profile[j]` samples the conformal factor at time `t`.
pub fn curved_spacetime_hamiltonian<T: Real>(
    n: usize,
    m: T,
    epsilon: T,
    profile: &[T],
    t: T,
) -> Result<HamiltonianMatrix<T>> {
    check_size_spacing(n, epsilon)?;
    check_mass(m)?;
    if profile.len() != n {
        return Err(Error::InvalidDimension(format!("profile has {} samples, expected {n}", profile.len())));
    }
    if profile.iter().any(|f| !f.is_finite() || !(*f > T::zero())) {
        return Err(Error::InvalidParameter("profile samples must be positive and finite".into()));
    }
    let nu = -T::one() / epsilon;
    let diag: Vec<T> = profile
        .iter()
        .map(|&f| {
            let meff = m * f;
            epsilon * meff * meff - T::two() * nu
        })
        .collect();
    let h_phi = periodic_tridiagonal(&diag, nu);
    let h_pi = DMatrix::from_diagonal_element(n, n, T::one() / epsilon);
    HamiltonianMatrix::new(
        h_phi,
        h_pi,
        epsilon,
        Theory::Curved {
            m: m.as_f64(),
            profile: profile.iter().map(|x| x.as_f64()).collect(),
            time: t.as_f64(),
        },
    )
}

/// Samples `f(t, x)` at the sites `x = ε·j`, `j = 1..N`.
pub fn sample_profile<T: Real>(n: usize, epsilon: T, t: T, f: impl Fn(T, T) -> T) -> Vec<T> {
    (1..=n).map(|j| f(t, epsilon * T::from_usize_lossy(j))).collect()
}

/// Decoupled oscillators whose ground state is the quench's initial state.
pub fn prequench_hamiltonian<T: Real>(n: usize, epsilon: T) -> Result<HamiltonianMatrix<T>> {
    check_size_spacing(n, epsilon)?;
    let h = DMatrix::from_diagonal_element(n, n, T::one() / epsilon);
    HamiltonianMatrix::new(h.clone(), h, epsilon, Theory::Prequench)
}

/// Eigenvalues and real orthonormal eigenvectors (as rows) of a circulant.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantEigensystem<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: DMatrix<T>,
}

/// `λ_j = Σ_k h_k cos(2π j k / N)` for the circulant with first column `h`.
pub fn circulant_eigenvalues<T: Real>(first_column: &[T]) -> Result<Vec<T>> {
    let n = first_column.len();
    if n == 0 {
        return Err(Error::InvalidDimension("empty circulant".into()));
    }
    let nf = T::from_usize_lossy(n);
    Ok((0..n)
        .map(|j| {
            first_column.iter().enumerate().fold(T::zero(), |acc, (k, &h)| {
                let phase = T::two() * T::pi() * T::from_usize_lossy((j * k) % n) / nf;
                acc + h * phase.cos()
            })
        })
        .collect())
}

/// Real DFT basis with eigenvectors as rows.
///
/// Row 0 is constant. For `1 <= j < N/2` row `j` is the cosine profile and
/// row `N − j` the sine profile of wave number `j`, both scaled by `√(2/N)`.
/// For even N row `N/2` alternates in sign. Row `j` carries eigenvalue `λ_j`
/// of any symmetric circulant.
pub fn real_dft_eigenvectors<T: Real>(n: usize) -> DMatrix<T> {
    let nf = T::from_usize_lossy(n);
    let c0 = T::one() / nf.sqrt();
    let cs = (T::two() / nf).sqrt();
    let mut p = DMatrix::zeros(n, n);
    for x in 0..n {
        p[(0, x)] = c0;
    }
    for j in 1..n {
        if 2 * j >= n {
            break;
        }
        for x in 0..n {
            let phase = T::two() * T::pi() * T::from_usize_lossy((j * x) % n) / nf;
            p[(j, x)] = cs * phase.cos();
            p[(n - j, x)] = cs * phase.sin();
        }
    }
    if n % 2 == 0 && n >= 2 {
        for x in 0..n {
            p[(n / 2, x)] = if x % 2 == 0 { c0 } else { -c0 };
        }
    }
    p
}

pub fn circulant_eigensystem<T: Real>(first_column: &[T]) -> Result<CirculantEigensystem<T>> {
    Ok(CirculantEigensystem {
        eigenvalues: circulant_eigenvalues(first_column)?,
        eigenvectors: real_dft_eigenvectors(first_column.len()),
    })
}

/// Whether `h` is a symmetric circulant within `tol` (relative to its max norm).
pub fn is_symmetric_circulant<T: Real>(h: &DMatrix<T>, tol: T) -> bool {
    let n = h.nrows();
    if !h.is_square() || n == 0 {
        return false;
    }
    let scale = max_abs(h).max(T::one()) * tol.max(T::tol(0.0));
    for i in 0..n {
        for j in 0..n {
            if (h[(i, j)] - h[((n + i - j) % n, 0)]).abs() > scale {
                return false;
            }
            if (h[(i, j)] - h[(j, i)]).abs() > scale {
                return false;
            }
        }
    }
    true
}
