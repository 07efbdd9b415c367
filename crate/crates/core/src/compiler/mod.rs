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

//! Compilation of commuting block Hamiltonians into optical circuits
//! `S(t) = S_BS(θ) · S_Sq(z)⁻¹ · S_PS(t·d) · S_Sq(z) · S_BS(θ)⁻¹`.

mod givens;
mod reduction;
mod trotter;

pub use givens::{givens_qr, GivensResult};
pub use reduction::{
    alpha_to_mean, coherent_reduction, complex_squeezer_params, mean_to_alpha, CoherentReduction, ComplexSqueezerParams,
};
pub use trotter::{trotter_evolution, TrotterRule};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{circulant_eigenvalues, is_symmetric_circulant, real_dft_eigenvectors, HamiltonianMatrix, Theory};
use crate::scalar::{max_abs, Real};
use crate::sympcore::{bs_array, bs_count, embed_block, SymplecticMatrix};

/// Relative threshold below which a symplectic eigenvalue is a zero mode.
pub const TOL_ZERO: f64 = 1e-12;

/// How the common eigenbasis was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenPath {
    Circulant,
    Dense,
}

/// Number of optical elements in a compiled circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub beam_splitters: usize,
    pub squeezers: usize,
    pub phase_shifters: usize,
}

impl GateCount {
    pub fn for_modes(n: usize) -> Self {
        Self {
            beam_splitters: 2 * bs_count(n),
            squeezers: 2 * n,
            phase_shifters: n,
        }
    }

    pub fn total(&self) -> usize {
        self.beam_splitters + self.squeezers + self.phase_shifters
    }
}

/// Compiled circuit parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OTACircuit<T: Real> {
    pub n: usize,
    /// Symplectic eigenvalues, one per normal mode.
    pub d: Vec<T>,
    pub z: Vec<T>,
    pub gamma: Vec<T>,
    /// Beam splitter angles in triangular order.
    pub theta: Vec<T>,
    /// Eigenvectors as rows; `bs_array(theta)⁻¹ = P ⊕ P`.
    pub p: DMatrix<T>,
    /// Sign left by the Givens elimination before the last row of `P` was flipped.
    pub sign_flag: i8,
    /// Normal modes treated as zero modes (no squeezing, no phase).
    pub zero_modes: Vec<usize>,
    pub path: EigenPath,
    pub gauge: CirculantGauge,
    pub epsilon: T,
    pub theory: Theory,
}

impl<T: Real> OTACircuit<T> {
    pub fn gate_count(&self) -> GateCount {
        GateCount::for_modes(self.n)
    }

    /// Largest squeezing amplitude and the normal mode carrying it.
    pub fn max_squeezing(&self) -> (T, usize) {
        self.z
            .iter()
            .enumerate()
            .fold((T::zero(), 0), |(best, at), (j, &z)| if z.abs() > best { (z.abs(), j) } else { (best, at) })
    }

    pub fn bs_matrix(&self) -> SymplecticMatrix<T> {
        bs_array(&self.theta, self.n).expect("circuit angles have triangular length")
    }

    /// `P ⊕ P`.
    pub fn eigen_frame(&self) -> DMatrix<T> {
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.p);
        m.view_mut((n, n), (n, n)).copy_from(&self.p);
        m
    }

    /// `S_Sq(z)⁻¹ · S_PS(t·d) · S_Sq(z)` in the normal-mode frame.
    pub fn core(&self, t: T) -> DMatrix<T> {
        let n = self.n;
        let mut m = DMatrix::identity(2 * n, 2 * n);
        for j in 0..n {
            embed_block(&mut m, j, &reduction::squeezed_rotation(self.z[j], self.d[j] * t));
        }
        m
    }

    /// Symplectic evolution operator at time `t`.
    pub fn evolution_matrix(&self, t: T) -> SymplecticMatrix<T> {
        let bs = self.bs_matrix();
        let s = bs.matrix() * self.core(t) * bs.matrix().transpose();
        SymplecticMatrix::from_trusted(s)
    }
}

/// Free-function form of [`OTACircuit::evolution_matrix`].
pub fn evolution_matrix<T: Real>(circuit: &OTACircuit<T>, t: T) -> SymplecticMatrix<T> {
    circuit.evolution_matrix(t)
}

/// Row convention for the DFT eigenbasis of circulant Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CirculantGauge {
    /// Rows of [`real_dft_eigenvectors`]: wave number `j` in row `j` (cosine)
    /// and row `N − j` (sine).
    #[default]
    Momentum,
    /// Rows of [`paired_dft_basis`].
    Paired,
}

/// DFT basis on sites `x = 1..N` with rows ordered in cosine/sine pairs.
///
/// Row 0 is `−1/√N`. Rows `2k − 1` and `2k` are `√(2/N) cos(2πkx/N)` and
/// `−√(2/N) sin(2πkx/N)`; for even N the last row alternates. Also returns,
/// per row, the row of [`real_dft_eigenvectors`] with the same eigenvalue.
pub fn paired_dft_basis<T: Real>(n: usize) -> (DMatrix<T>, Vec<usize>) {
    let r = real_dft_eigenvectors::<T>(n);
    let mut source = vec![0];
    let mut sign = vec![-T::one()];
    for k in 1..n {
        if 2 * k >= n {
            break;
        }
        source.extend([k, n - k]);
        sign.extend([T::one(), -T::one()]);
    }
    if n % 2 == 0 && n >= 2 {
        source.push(n / 2);
        sign.push(T::one());
    }
    let p = DMatrix::from_fn(n, n, |row, x| sign[row] * r[(source[row], (x + 1) % n)]);
    (p, source)
}

/// Common orthonormal eigenbasis (rows of the returned matrix) of both blocks,
/// with the circulant eigenvalue index of each row on the circulant path.
fn common_eigenbasis<T: Real>(
    h: &HamiltonianMatrix<T>,
    gauge: CirculantGauge,
) -> Result<(DMatrix<T>, EigenPath, Vec<usize>)> {
    let tol = T::lit(1e-12);
    if is_symmetric_circulant(&h.h_phi, tol) && is_symmetric_circulant(&h.h_pi, tol) {
        let (p, idx) = match gauge {
            CirculantGauge::Momentum => (real_dft_eigenvectors(h.n), (0..h.n).collect()),
            CirculantGauge::Paired => paired_dft_basis(h.n),
        };
        return Ok((p, EigenPath::Circulant, idx));
    }
    let n = h.n;
    let nphi = max_abs(&h.h_phi).max(T::eps());
    let npi = max_abs(&h.h_pi).max(T::eps());
    let a = &h.h_phi / nphi;
    let b = &h.h_pi / npi;
    for weight in [0.618_033_988_749_895, 0.414_213_562_373_095, 1.732_050_807_568_877] {
        let combo = &a + &b * T::lit(weight);
        let eig = SymmetricEigen::new(combo);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[i]
                .partial_cmp(&eig.eigenvalues[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut p = DMatrix::zeros(n, n);
        for (row, &col) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(col);
            let pivot = v.iter().fold(T::zero(), |best, &x| if x.abs() > best.abs() { x } else { best });
            let sign = if pivot < T::zero() { -T::one() } else { T::one() };
            for x in 0..n {
                p[(row, x)] = v[x] * sign;
            }
        }
        if off_diagonal(&(&p * &a * p.transpose())) < T::tol(1e-10)
            && off_diagonal(&(&p * &b * p.transpose())) < T::tol(1e-10)
        {
            return Ok((p, EigenPath::Dense, Vec::new()));
        }
    }
    Err(Error::NotCompilable("no common eigenbasis found for the two blocks".into()))
}

fn off_diagonal<T: Real>(m: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

/// Compiles `h` into circuit parameters.
pub fn compile<T: Real>(h: &HamiltonianMatrix<T>) -> Result<OTACircuit<T>> {
    compile_with_gauge(h, CirculantGauge::Momentum)
}

/// [`compile`] with an explicit row convention for circulant Hamiltonians.
pub fn compile_with_gauge<T: Real>(h: &HamiltonianMatrix<T>, gauge: CirculantGauge) -> Result<OTACircuit<T>> {
    h.check_invariants()?;
    let comm = h.commutator_residual();
    if !(comm < T::tol(1e-10)) {
        return Err(Error::Ineligible(format!("blocks do not commute (residual {:e})", comm.as_f64())));
    }
    let n = h.n;
    let (mut p, path, idx) = common_eigenbasis(h, gauge)?;
    let (lphi, lpi) = match path {
        EigenPath::Circulant => {
            let a = circulant_eigenvalues(&h.h_phi.column(0).iter().copied().collect::<Vec<_>>())?;
            let b = circulant_eigenvalues(&h.h_pi.column(0).iter().copied().collect::<Vec<_>>())?;
            (idx.iter().map(|&i| a[i]).collect::<Vec<T>>(), idx.iter().map(|&i| b[i]).collect::<Vec<T>>())
        }
        EigenPath::Dense => {
            let dphi = &p * &h.h_phi * p.transpose();
            let dpi = &p * &h.h_pi * p.transpose();
            ((0..n).map(|j| dphi[(j, j)]).collect(), (0..n).map(|j| dpi[(j, j)]).collect())
        }
    };

    let scale = lphi.iter().chain(&lpi).fold(T::zero(), |m, &x| m.max(x.abs()));
    let neg_tol = T::tol(1e-10) * scale.max(T::one());
    let tiny = T::lit(TOL_ZERO) * scale;
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        if lphi[j] < -neg_tol || lpi[j] < -neg_tol {
            return Err(Error::NotPositive(format!(
                "normal mode {j} has eigenvalues ({}, {})",
                lphi[j], lpi[j]
            )));
        }
        if lpi[j] <= tiny && lphi[j] > tiny {
            return Err(Error::NotCompilable(format!(
                "normal mode {j} has vanishing kinetic eigenvalue, squeezing would be infinite"
            )));
        }
        d.push((lphi[j].max(T::zero()) * lpi[j].max(T::zero())).sqrt());
    }
    let dmax = d.iter().fold(T::zero(), |m, &x| m.max(x));
    let zero_tol = T::lit(TOL_ZERO) * dmax;
    let mut gamma = Vec::with_capacity(n);
    let mut zero_modes = Vec::new();
    for j in 0..n {
        if d[j] <= zero_tol {
            zero_modes.push(j);
            d[j] = T::zero();
            gamma.push(T::one());
        } else {
            gamma.push((lphi[j] / lpi[j]).sqrt());
        }
    }
    let z: Vec<T> = gamma.iter().map(|&g| -T::half() * g.ln() + T::zero()).collect();

    let g = givens_qr(&p)?;
    if g.sign < 0 {
        let last = n - 1;
        for x in 0..n {
            p[(last, x)] = -p[(last, x)];
        }
    }
    Ok(OTACircuit {
        n,
        d,
        z,
        gamma,
        theta: g.theta,
        p,
        sign_flag: g.sign,
        zero_modes,
        path,
        gauge,
        epsilon: h.epsilon,
        theory: h.theory.clone(),
    })
}
