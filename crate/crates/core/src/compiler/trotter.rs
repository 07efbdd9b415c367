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

//! Piecewise-constant evolution for Hamiltonians with explicit time dependence.

use super::compile;
use crate::error::{Error, Result};
use crate::models::HamiltonianMatrix;
use crate::scalar::Real;
use crate::sympcore::SymplecticMatrix;

/// Where each step samples the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrotterRule {
    #[default]
    LeftPoint,
    Midpoint,
}

/// `S_{K−1} ⋯ S_1 S_0` with `S_k` the exact evolution of the snapshot `H(t_k)`
/// over one step.
pub fn trotter_evolution<T, F>(h_of_t: F, t_final: T, steps: usize, rule: TrotterRule) -> Result<SymplecticMatrix<T>>
where
    T: Real,
    F: Fn(T) -> Result<HamiltonianMatrix<T>>,
{
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    if !t_final.is_finite() {
        return Err(Error::InvalidParameter("non-finite final time".into()));
    }
    let dt = t_final / T::from_usize_lossy(steps);
    let offset = match rule {
        TrotterRule::LeftPoint => T::zero(),
        TrotterRule::Midpoint => T::half(),
    };
    let mut acc: Option<SymplecticMatrix<T>> = None;
    for k in 0..steps {
        let tk = (T::from_usize_lossy(k) + offset) * dt;
        let step = compile(&h_of_t(tk)?)?.evolution_matrix(dt);
        acc = Some(match acc {
            None => step,
            Some(prev) => step.compose(&prev),
        });
    }
    Ok(acc.expect("steps >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{curved_spacetime_hamiltonian, relativistic_hamiltonian, sample_profile};
    use crate::scalar::max_abs;
    use approx::assert_abs_diff_eq;

    fn flrw(t: f64) -> Result<HamiltonianMatrix<f64>> {
        let n = 6;
        let prof = sample_profile(n, 0.5, t, |t, _| 1.0 + 0.1 * t);
        curved_spacetime_hamiltonian(n, 1.0, 0.5, &prof, t)
    }

    #[test]
    fn constant_hamiltonian_is_exact() {
        let h = relativistic_hamiltonian(5, 0.7, 1.0).unwrap();
        let exact = compile(&h).unwrap().evolution_matrix(2.0);
        for steps in [1, 3, 8] {
            let s = trotter_evolution(|_| Ok(h.clone()), 2.0, steps, TrotterRule::LeftPoint).unwrap();
            assert_abs_diff_eq!(s.matrix(), exact.matrix(), epsilon = 1e-10);
        }
    }

    #[test]
    fn single_step_samples_initial_time() {
        let s = trotter_evolution(flrw, 3.0, 1, TrotterRule::LeftPoint).unwrap();
        let expected = compile(&flrw(0.0).unwrap()).unwrap().evolution_matrix(3.0);
        assert_abs_diff_eq!(s.matrix(), expected.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn converges_at_first_order() {
        let t = 4.0;
        let reference = trotter_evolution(flrw, t, 128, TrotterRule::LeftPoint).unwrap();
        let defect = |steps| {
            let s = trotter_evolution(flrw, t, steps, TrotterRule::LeftPoint).unwrap();
            max_abs(&(s.matrix() - reference.matrix()))
        };
        let (e1, e2) = (defect(16), defect(32));
        assert!(e1 / e2 > 1.8, "defects {e1:e} {e2:e}");
    }

    #[test]
    fn midpoint_is_more_accurate() {
        let t = 4.0;
        let reference = trotter_evolution(flrw, t, 256, TrotterRule::Midpoint).unwrap();
        let err = |rule| {
            let s = trotter_evolution(flrw, t, 16, rule).unwrap();
            max_abs(&(s.matrix() - reference.matrix()))
        };
        assert!(err(TrotterRule::Midpoint) < err(TrotterRule::LeftPoint));
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(trotter_evolution(flrw, 1.0, 0, TrotterRule::LeftPoint).is_err());
    }
}
