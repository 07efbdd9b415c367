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

//! Symplectic linear algebra on the quadrature vector `(φ_1..φ_N, π_1..π_N)`.
//!
//! Mode indices are zero based throughout the crate: mode `j` owns row/column
//! `j` of the φ block and row/column `N + j` of the π block.

use std::ops::Mul;

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};

/// Default tolerance for symplecticity and orthogonality checks, relative to
/// the squared max-norm of the checked matrix (floored at one).
pub const TOL_SYMP: f64 = 1e-10;

/// The form Ω = (iσ_y) ⊗ 1_N.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm<T: Real> {
    modes: usize,
    matrix: DMatrix<T>,
}

impl<T: Real> SymplecticForm<T> {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }
}

/// Builds Ω for `n` modes: `+1_N` in the upper-right block, `-1_N` lower-left.
pub fn symplectic_form<T: Real>(n: usize) -> Result<SymplecticForm<T>> {
    if n == 0 {
        return Err(Error::InvalidDimension("symplectic form needs N >= 1".into()));
    }
    Ok(SymplecticForm {
        modes: n,
        matrix: omega(n),
    })
}

pub(crate) fn omega<T: Real>(n: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        m[(j, n + j)] = T::one();
        m[(n + j, j)] = -T::one();
    }
    m
}

/// A real 2N×2N matrix preserving Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix<T: Real> {
    modes: usize,
    matrix: DMatrix<T>,
}

impl<T: Real> SymplecticMatrix<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            modes: n,
            matrix: DMatrix::identity(2 * n, 2 * n),
        }
    }

    /// Wraps `matrix` after checking `S Ω Sᵀ = Ω` at `tol`.
    pub fn new(matrix: DMatrix<T>, tol: T) -> Result<Self> {
        let check = is_symplectic(&matrix, tol)?;
        if !check.passed {
            return Err(Error::NotSymplectic {
                residual: check.residual.as_f64(),
            });
        }
        Ok(Self {
            modes: matrix.nrows() / 2,
            matrix,
        })
    }

    /// Wraps a matrix known to be symplectic by construction.
    pub(crate) fn from_trusted(matrix: DMatrix<T>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        debug_assert_eq!(matrix.nrows() % 2, 0);
        Self {
            modes: matrix.nrows() / 2,
            matrix,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes, "mode count mismatch");
        Self::from_trusted(&self.matrix * &other.matrix)
    }

    /// Exact symplectic inverse `-Ω Sᵀ Ω`.
    pub fn inverse(&self) -> Self {
        let om = omega::<T>(self.modes);
        Self::from_trusted(-(&om * self.matrix.transpose() * &om))
    }

    pub fn transpose(&self) -> Self {
        Self::from_trusted(self.matrix.transpose())
    }

    /// `‖SᵀS − 1‖_max`; zero for passive transformations.
    pub fn orthogonality_residual(&self) -> T {
        let dim = 2 * self.modes;
        max_abs(&(self.matrix.transpose() * &self.matrix - DMatrix::<T>::identity(dim, dim)))
    }

    pub fn is_passive(&self, tol: T) -> bool {
        self.orthogonality_residual() <= tol
    }
}

impl<'a, T: Real> Mul<&'a SymplecticMatrix<T>> for &'a SymplecticMatrix<T> {
    type Output = SymplecticMatrix<T>;

    fn mul(self, rhs: &'a SymplecticMatrix<T>) -> SymplecticMatrix<T> {
        self.compose(rhs)
    }
}

/// Outcome of [`is_symplectic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticCheck<T> {
    /// `‖M Ω Mᵀ − Ω‖_max`.
    pub residual: T,
    pub passed: bool,
}

/// Checks whether `m` preserves the symplectic form.
pub fn is_symplectic<T: Real>(m: &DMatrix<T>, tol: T) -> Result<SymplecticCheck<T>> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDimension(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "dimension {} is not a positive even number",
            m.nrows()
        )));
    }
    let om = omega::<T>(m.nrows() / 2);
    let residual = max_abs(&(m * &om * m.transpose() - &om));
    let scale = max_abs(m);
    let scale = (scale * scale).max(T::one());
    Ok(SymplecticCheck {
        residual,
        passed: residual <= tol * scale,
    })
}

/// Elementary optical element types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    PhaseShift,
    BeamSplitter,
    Squeezer,
    ComplexSqueezer,
}

/// A single optical element acting on explicit modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateSpec<T> {
    PhaseShift { mode: usize, phi: T },
    BeamSplitter { theta: T, j: usize, k: usize },
    Squeezer { mode: usize, z: T },
    /// `ζ = ξ e^{iΦ}` with `Φ ∈ [0, π)`.
    ComplexSqueezer { mode: usize, xi: T, phase: T },
}

impl<T: Real> GateSpec<T> {
    pub fn kind(&self) -> GateKind {
        match self {
            GateSpec::PhaseShift { .. } => GateKind::PhaseShift,
            GateSpec::BeamSplitter { .. } => GateKind::BeamSplitter,
            GateSpec::Squeezer { .. } => GateKind::Squeezer,
            GateSpec::ComplexSqueezer { .. } => GateKind::ComplexSqueezer,
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            GateSpec::PhaseShift { mode, .. }
            | GateSpec::Squeezer { mode, .. }
            | GateSpec::ComplexSqueezer { mode, .. } => vec![mode],
            GateSpec::BeamSplitter { j, k, .. } => vec![j, k],
        }
    }

    /// Checks the mode indices against an `n`-mode register.
    pub fn validate(&self, n: usize) -> Result<()> {
        let modes = self.modes();
        if let Some(&bad) = modes.iter().find(|&&m| m >= n) {
            return Err(Error::InvalidModes(format!("mode {bad} out of range for N = {n}")));
        }
        if modes.len() == 2 && modes[0] == modes[1] {
            return Err(Error::InvalidModes(format!("repeated mode {}", modes[0])));
        }
        Ok(())
    }

    /// Embeds the gate into the 2N×2N symplectic group.
    pub fn to_matrix(&self, n: usize) -> Result<SymplecticMatrix<T>> {
        self.validate(n)?;
        match *self {
            GateSpec::PhaseShift { mode, phi } => {
                let mut phases = vec![T::zero(); n];
                phases[mode] = phi;
                phase_shift_gate(&phases)
            }
            GateSpec::BeamSplitter { theta, j, k } => {
                let (j, k) = if j < k { (j, k) } else { (k, j) };
                beam_splitter_gate(theta, j, k, n)
            }
            GateSpec::Squeezer { mode, z } => {
                let mut amps = vec![T::zero(); n];
                amps[mode] = z;
                squeezer_gate(&amps)
            }
            GateSpec::ComplexSqueezer { mode, xi, phase } => {
                complex_squeezer_gate(xi, phase, n, mode)
            }
        }
    }
}

fn ensure_finite<T: Real>(values: &[T], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("non-finite {what}")))
    }
}

/// N-mode phase shifter; mode `j` is rotated by `phases[j]`.
pub fn phase_shift_gate<T: Real>(phases: &[T]) -> Result<SymplecticMatrix<T>> {
    let n = phases.len();
    if n == 0 {
        return Err(Error::InvalidDimension("phase shifter needs N >= 1".into()));
    }
    ensure_finite(phases, "phase")?;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (j, &phi) in phases.iter().enumerate() {
        let (s, c) = phi.sin_cos();
        m[(j, j)] = c;
        m[(j, n + j)] = s;
        m[(n + j, j)] = -s;
        m[(n + j, n + j)] = c;
    }
    Ok(SymplecticMatrix::from_trusted(m))
}

/// Two-mode beam splitter on modes `j < k`, rotating the (φ_j, φ_k) and
/// (π_j, π_k) planes by `theta`.
pub fn beam_splitter_gate<T: Real>(theta: T, j: usize, k: usize, n: usize) -> Result<SymplecticMatrix<T>> {
    if j >= k || k >= n {
        return Err(Error::InvalidModes(format!(
            "beam splitter needs 0 <= j < k < N, got j = {j}, k = {k}, N = {n}"
        )));
    }
    ensure_finite(&[theta], "beam splitter angle")?;
    let mut m = DMatrix::identity(2 * n, 2 * n);
    let (s, c) = theta.sin_cos();
    rotate_columns(&mut m, j, k, c, s);
    rotate_columns(&mut m, n + j, n + k, c, s);
    Ok(SymplecticMatrix::from_trusted(m))
}

/// Right-multiplies `m` by the Givens rotation with `cos` at (j,j),(k,k),
/// `+sin` at (j,k) and `-sin` at (k,j).
pub(crate) fn rotate_columns<T: Real>(m: &mut DMatrix<T>, j: usize, k: usize, c: T, s: T) {
    for r in 0..m.nrows() {
        let a = m[(r, j)];
        let b = m[(r, k)];
        m[(r, j)] = c * a - s * b;
        m[(r, k)] = s * a + c * b;
    }
}

/// N-mode squeezer `diag(e^{-z}, e^{z})` per mode.
pub fn squeezer_gate<T: Real>(z: &[T]) -> Result<SymplecticMatrix<T>> {
    let n = z.len();
    if n == 0 {
        return Err(Error::InvalidDimension("squeezer needs N >= 1".into()));
    }
    ensure_finite(z, "squeezing amplitude")?;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (j, &zj) in z.iter().enumerate() {
        m[(j, j)] = (-zj).exp();
        m[(n + j, n + j)] = zj.exp();
    }
    Ok(SymplecticMatrix::from_trusted(m))
}

/// The 2×2 block `cosh ξ·1 − sinh ξ·[[cos Φ, sin Φ], [sin Φ, −cos Φ]]`.
pub fn complex_squeezer_block<T: Real>(xi: T, phase: T) -> Matrix2<T> {
    let (s, c) = phase.sin_cos();
    let ch = xi.cosh();
    let sh = xi.sinh();
    Matrix2::new(ch - sh * c, -sh * s, -sh * s, ch + sh * c)
}

/// Complex squeezer on a single `mode` of an `n`-mode register.
pub fn complex_squeezer_gate<T: Real>(xi: T, phase: T, n: usize, mode: usize) -> Result<SymplecticMatrix<T>> {
    if mode >= n {
        return Err(Error::InvalidModes(format!("mode {mode} out of range for N = {n}")));
    }
    ensure_finite(&[xi, phase], "complex squeezer parameter")?;
    let mut m = DMatrix::identity(2 * n, 2 * n);
    embed_block(&mut m, mode, &complex_squeezer_block(xi, phase));
    Ok(SymplecticMatrix::from_trusted(m))
}

/// Writes a single-mode 2×2 block into the (φ_j, π_j) entries of `m`.
pub(crate) fn embed_block<T: Real>(m: &mut DMatrix<T>, mode: usize, block: &Matrix2<T>) {
    let n = m.nrows() / 2;
    m[(mode, mode)] = block[(0, 0)];
    m[(mode, n + mode)] = block[(0, 1)];
    m[(n + mode, mode)] = block[(1, 0)];
    m[(n + mode, n + mode)] = block[(1, 1)];
}

/// Mode pairs in triangular order `(0,1), (0,2), …, (0,N−1), (1,2), …, (N−2,N−1)`.
pub fn triangular_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |j| (j + 1..n).map(move |k| (j, k)))
}

/// Number of beam splitters in an N-mode triangular array.
pub fn bs_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// N-mode beam splitter array: the left-to-right product of two-mode beam
/// splitters in [`triangular_pairs`] order.
pub fn bs_array<T: Real>(thetas: &[T], n: usize) -> Result<SymplecticMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidDimension("beam splitter array needs N >= 1".into()));
    }
    let expected = bs_count(n);
    if thetas.len() != expected {
        return Err(Error::Arity {
            expected,
            got: thetas.len(),
        });
    }
    ensure_finite(thetas, "beam splitter angle")?;
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for ((j, k), &theta) in triangular_pairs(n).zip(thetas) {
        let (s, c) = theta.sin_cos();
        rotate_columns(&mut m, j, k, c, s);
        rotate_columns(&mut m, n + j, n + k, c, s);
    }
    Ok(SymplecticMatrix::from_trusted(m))
}
