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

//! Invariant and oracle-equivalence suites behind `ota-sim verify`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compiler::{coherent_reduction, compile, OTACircuit};
use crate::engine::{renyi2_entropy, symplectic_spectrum, GaussianState};
use crate::error::Result;
use crate::expm::expm;
use crate::models::{
    curved_spacetime_hamiltonian, fractional_hamiltonian, nonrelativistic_hamiltonian, prequench_hamiltonian,
    relativistic_hamiltonian, HamiltonianMatrix,
};
use crate::predict::entropy_density;
use crate::scalar::max_abs;
use crate::sympcore::{bs_array, bs_count, is_symplectic, omega, GateSpec, TOL_SYMP};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: String,
    pub seed: u64,
    pub max_n: usize,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

struct Tally {
    name: &'static str,
    tol: f64,
    cases: usize,
    worst: f64,
    detail: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            cases: 0,
            worst: 0.0,
            detail: None,
        }
    }

    fn record(&mut self, residual: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        let bad = !(residual < self.tol);
        if bad && self.detail.is_none() {
            self.detail = Some(what());
        }
        if residual > self.worst || residual.is_nan() {
            self.worst = residual;
        }
    }

    fn fail(&mut self, msg: String) {
        self.cases += 1;
        self.worst = f64::INFINITY;
        self.detail.get_or_insert(msg);
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.into(),
            cases: self.cases,
            max_residual: self.worst,
            tolerance: self.tol,
            passed: self.detail.is_none() && self.worst < self.tol,
            detail: self.detail,
        }
    }
}

fn rng_for(seed: u64, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(suite))
}

/// Hamiltonians exercised by the oracle suites, labelled for diagnostics.
fn builder_cases(n: usize, rng: &mut ChaCha8Rng) -> Vec<(String, Result<HamiltonianMatrix<f64>>)> {
    let mut v = vec![
        ("relativistic m=0".to_string(), relativistic_hamiltonian(n, 0.0, 1.0)),
        ("relativistic m=1".to_string(), relativistic_hamiltonian(n, 1.0, 1.0)),
    ];
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        v.push((format!("fractional alpha={alpha}"), fractional_hamiltonian(n, 1.0, 1.0, alpha)));
    }
    let pot: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    v.push(("nonrelativistic".into(), nonrelativistic_hamiltonian(n, 1.0, 1.0, &pot)));
    let prof: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    v.push(("curved".into(), curved_spacetime_hamiltonian(n, 1.0, 1.0, &prof, 0.0)));
    v.push(("prequench".into(), prequench_hamiltonian(n, 1.0)));
    v
}

fn generator(h: &HamiltonianMatrix<f64>) -> DMatrix<f64> {
    omega::<f64>(h.n) * h.full()
}

/// `‖S_OTA − S_exact‖_max` in the normal-mode frame, skipping zero modes,
/// which the circuit leaves fixed while the exact flow shears them.
pub fn oracle_residual(c: &OTACircuit<f64>, exact: &DMatrix<f64>, t: f64) -> f64 {
    let diff = c.evolution_matrix(t).matrix() - exact;
    if c.zero_modes.is_empty() {
        return max_abs(&diff);
    }
    let f = c.eigen_frame();
    let m = &f * diff * f.transpose();
    let n = c.n;
    let keep: Vec<usize> = (0..2 * n).filter(|i| !c.zero_modes.contains(&(i % n))).collect();
    keep.iter()
        .flat_map(|&i| keep.iter().map(move |&j| (i, j)))
        .fold(0.0, |w: f64, (i, j)| w.max(m[(i, j)].abs()))
}

fn gates_suite(max_n: usize, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut tally = Tally::new("gate_symplecticity", TOL_SYMP);
    for n in 2..=max_n {
        for _ in 0..5 {
            let j = rng.random_range(0..n - 1);
            let k = rng.random_range(j + 1..n);
            let mode = rng.random_range(0..n);
            let gates = [
                GateSpec::PhaseShift {
                    mode,
                    phi: rng.random_range(-6.0..6.0),
                },
                GateSpec::BeamSplitter {
                    theta: rng.random_range(-6.0..6.0),
                    j,
                    k,
                },
                GateSpec::Squeezer {
                    mode,
                    z: rng.random_range(-1.5..1.5),
                },
                GateSpec::ComplexSqueezer {
                    mode,
                    xi: rng.random_range(-1.5..1.5),
                    phase: rng.random_range(0.0..3.14),
                },
            ];
            for g in gates {
                match g.to_matrix(n).and_then(|m| is_symplectic(m.matrix(), TOL_SYMP)) {
                    Ok(c) => tally.record(c.residual, || format!("{g:?} on {n} modes")),
                    Err(e) => tally.fail(format!("{g:?}: {e}")),
                }
            }
            let theta: Vec<f64> = (0..bs_count(n)).map(|_| rng.random_range(-3.2..3.2)).collect();
            match bs_array(&theta, n).and_then(|m| is_symplectic(m.matrix(), TOL_SYMP)) {
                Ok(c) => tally.record(c.residual, || format!("bs_array on {n} modes")),
                Err(e) => tally.fail(format!("bs_array: {e}")),
            }
        }
    }
    tally.finish()
}

pub fn run_verify(seed: u64, max_n: usize, corrupt: bool) -> VerifyReport {
    let max_n = max_n.max(2);
    let mut suites = vec![gates_suite(max_n, &mut rng_for(seed, 0))];

    let mut oracle = Tally::new("oracle_equivalence", 1e-8);
    let mut count = Tally::new("gate_count", 0.5);
    let mut purity = Tally::new("purity_conservation", 1e-9);
    let mut compiled: Vec<(String, OTACircuit<f64>)> = Vec::new();
    let mut rng = rng_for(seed, 1);
    for n in 2..=max_n {
        for (label, h) in builder_cases(n, &mut rng) {
            let case = format!("{label}, N={n}");
            let h = match h {
                Ok(h) => h,
                Err(e) => {
                    oracle.fail(format!("{case}: {e}"));
                    continue;
                }
            };
            let c = match compile(&h) {
                Ok(c) => c,
                Err(e) => {
                    oracle.fail(format!("{case}: {e}"));
                    continue;
                }
            };
            let a = generator(&h);
            for t in [0.1, 1.0, 10.0] {
                match expm(&(&a * t)) {
                    Ok(e) => {
                        let r = oracle_residual(&c, &e, t);
                        oracle.record(r, || format!("{case}, t={t}: residual {r:e}"));
                    }
                    Err(e) => oracle.fail(format!("{case}: {e}")),
                }
            }
            let total = c.gate_count().total();
            count.record((total as f64 - (n * (n + 2)) as f64).abs(), || {
                format!("{case}: {total} gates, expected {}", n * (n + 2))
            });
            compiled.push((case, c));
        }
    }
    for (case, c) in &compiled {
        for i in 0..100 {
            let t = 0.1 * i as f64;
            let s = GaussianState::vacuum(c.n)
                .evolve(&c.evolution_matrix(t))
                .and_then(|st| renyi2_entropy(&st));
            match s {
                Ok(s) => purity.record(s, || format!("{case}, t={t}: S2 = {s:e}")),
                Err(e) => purity.fail(format!("{case}, t={t}: {e}")),
            }
        }
    }
    suites.push(oracle.finish());
    suites.push(count.finish());

    let mut passive = Tally::new("passive_nonrelativistic", 1e-12);
    let mut rng = rng_for(seed, 2);
    for n in 2..=(2 * max_n).min(20) {
        for _ in 0..3 {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            match nonrelativistic_hamiltonian(n, rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), &v)
                .and_then(|h| compile(&h))
            {
                Ok(c) => {
                    let z = c.max_squeezing().0;
                    passive.record(z, || format!("N={n}: max|z| = {z:e}"));
                }
                Err(e) => passive.fail(format!("N={n}: {e}")),
            }
        }
    }
    suites.push(passive.finish());
    suites.push(purity.finish());

    let mut density = Tally::new("entropy_density_oracle", 1e-12);
    for i in 0..=40 {
        let n = 0.25 * i as f64;
        let r = entropy_density(&[n]).and_then(|s| Ok((s[0] - renyi2_entropy(&GaussianState::thermal(&[n]))?).abs()));
        match r {
            Ok(r) => density.record(r, || format!("n = {n}: residual {r:e}")),
            Err(e) => density.fail(format!("n = {n}: {e}")),
        }
    }
    suites.push(density.finish());

    let mut reduction = Tally::new("coherent_reduction", 1e-10);
    let mut rng = rng_for(seed, 3);
    for n in 2..=max_n.min(6) {
        for _ in 0..3 {
            let m = rng.random_range(0.2..2.0);
            let eps = rng.random_range(0.3..2.0);
            let alpha_exp = rng.random_range(0.3..2.5);
            let c = match fractional_hamiltonian(n, m, eps, alpha_exp).and_then(|h| compile(&h)) {
                Ok(c) => c,
                Err(e) => {
                    reduction.fail(format!("N={n}: {e}"));
                    continue;
                }
            };
            let amp: Vec<Complex<f64>> = (0..n)
                .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            for i in 0..20 {
                let t = 0.5 * i as f64;
                let r = coherent_reduction(&c, t, &amp).and_then(|red| {
                    let full = GaussianState::coherent(&amp).evolve(&c.evolution_matrix(t))?;
                    let out = red.output_state();
                    Ok((&out.mean - &full.mean).amax().max(max_abs(&(&out.covariance - &full.covariance))))
                });
                match r {
                    Ok(r) => reduction.record(r, || format!("N={n}, t={t}: residual {r:e}")),
                    Err(e) => reduction.fail(format!("N={n}, t={t}: {e}")),
                }
            }
        }
    }
    suites.push(reduction.finish());

    let mut uncertainty = Tally::new("uncertainty_relation", 1e-10);
    let mut rng = rng_for(seed, 4);
    let n = max_n.min(6);
    let theta: Vec<f64> = (0..bs_count(n)).map(|_| rng.random_range(-3.2..3.2)).collect();
    let z: Vec<f64> = (0..n).map(|_| rng.random_range(-0.8..0.8)).collect();
    let fixture = bs_array(&theta, n).and_then(|bs| {
        let sq = crate::sympcore::squeezer_gate(&z)?;
        GaussianState::vacuum(n).evolve(&bs.compose(&sq))
    });
    match fixture {
        Ok(st) => {
            let sigma = if corrupt { &st.covariance * 0.4 } else { st.covariance.clone() };
            match symplectic_spectrum(&sigma) {
                Ok(nu) => {
                    let r = (0.5 - nu[0]).max(0.0);
                    uncertainty.record(r, || format!("smallest symplectic eigenvalue {} < 1/2", nu[0]));
                }
                Err(e) => uncertainty.fail(e.to_string()),
            }
        }
        Err(e) => uncertainty.fail(e.to_string()),
    }
    suites.push(uncertainty.finish());

    VerifyReport {
        schema: "ota-sim verify v1".into(),
        seed,
        max_n,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}
