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

//! JSON experiment configuration.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::compiler::CirculantGauge;
use crate::engine::ModeRegion;
use crate::error::{Error, Result};
use crate::models::{
    curved_spacetime_hamiltonian, fractional_hamiltonian, nonrelativistic_hamiltonian, prequench_hamiltonian,
    relativistic_hamiltonian, sample_profile, HamiltonianMatrix,
};
use crate::predict::DispersionKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub theory: TheoryConfig,
    pub lattice: LatticeConfig,
    /// Row convention of the circulant eigenbasis.
    #[serde(default)]
    pub gauge: CirculantGauge,
    #[serde(default)]
    pub quench: QuenchConfig,
    #[serde(default)]
    pub observables: Vec<ObservableConfig>,
    #[serde(default)]
    pub time_grid: Option<TimeGrid>,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TheoryConfig {
    Relativistic {
        m: f64,
    },
    Fractional {
        m: f64,
        alpha: f64,
    },
    /// `potential` defaults to zero on every site.
    Nonrelativistic {
        m: f64,
        #[serde(default)]
        potential: Option<Vec<f64>>,
    },
    Curved {
        m: f64,
        profile: ProfileConfig,
        #[serde(default)]
        time: f64,
    },
    Prequench,
}

/// Conformal factor `f(t, x)` of the curved-spacetime theory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    /// `f(x) = 1/x²`.
    Ads,
    /// `f(t) = a0 + rate·t`.
    Flrw { a0: f64, rate: f64 },
    Samples { values: Vec<f64> },
}

/// Lattice size and spacing; exactly one of `epsilon` and `length` is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "input", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuenchConfig {
    #[default]
    Vacuum,
    /// One `[re, im]` pair per site.
    Coherent { alpha: Vec<[f64; 2]> },
}

/// Contiguous run of sites `start..start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub start: usize,
    pub len: usize,
}

impl RegionConfig {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn region(&self) -> Result<ModeRegion> {
        ModeRegion::interval(self.start, self.len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    Entropy {
        region: RegionConfig,
        #[serde(default)]
        id: Option<String>,
    },
    MutualInformation {
        a: RegionConfig,
        b: RegionConfig,
        #[serde(default)]
        id: Option<String>,
    },
    Lightcone(LightconeConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightconeConfig {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Fractional exponents to sweep; empty runs the configured theory once.
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// Keep the adjacent pair `M = 0` in the fit.
    #[serde(default)]
    pub include_nearest: bool,
    /// Separations recorded in the grid; default `0..N/2`.
    #[serde(default)]
    pub separations: Option<Vec<usize>>,
    /// Largest separation used in the fit; default `N/2 − 2`.
    #[serde(default)]
    pub fit_max_separation: Option<usize>,
}

fn default_threshold() -> f64 {
    crate::lightcone::DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// `steps + 1` equally spaced samples on `[0, t_max]`, or `[0]` when `t_max = 0`.
    pub fn times(&self) -> Vec<f64> {
        if self.t_max == 0.0 || self.steps == 0 {
            return vec![0.0];
        }
        (0..=self.steps).map(|i| self.t_max * i as f64 / self.steps as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "yes")]
    pub predictions: bool,
    #[serde(default = "yes")]
    pub circuit: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            predictions: true,
            circuit: true,
        }
    }
}

fn default_directory() -> String {
    "out".into()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default)]
    pub inject_corrupted_covariance: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            max_n: default_max_n(),
            inject_corrupted_covariance: false,
        }
    }
}

fn default_max_n() -> usize {
    10
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl LatticeConfig {
    pub fn epsilon(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(invalid(format!("lattice.n must be at least 2, got {}", self.n)));
        }
        let eps = match (self.epsilon, self.length) {
            (Some(e), None) => e,
            (None, Some(l)) => l / self.n as f64,
            (Some(e), Some(l)) => {
                if (e * self.n as f64 - l).abs() > 1e-9 * l.abs().max(1.0) {
                    return Err(invalid(format!("lattice.length {l} differs from N·ε = {}", e * self.n as f64)));
                }
                e
            }
            (None, None) => return Err(invalid("lattice needs epsilon or length")),
        };
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(invalid(format!("lattice spacing must be positive, got {eps}")));
        }
        Ok(eps)
    }

    pub fn length(&self) -> Result<f64> {
        Ok(self.epsilon()? * self.n as f64)
    }
}

impl TheoryConfig {
    /// Theory with the fractional exponent replaced by `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        match self {
            TheoryConfig::Fractional { m, .. } | TheoryConfig::Relativistic { m } => {
                Ok(TheoryConfig::Fractional { m: *m, alpha })
            }
            other => Err(invalid(format!("an α sweep needs a fractional theory, got {:?}", kind_name(other)))),
        }
    }

    pub fn hamiltonian(&self, n: usize, epsilon: f64) -> Result<HamiltonianMatrix<f64>> {
        match self {
            TheoryConfig::Relativistic { m } => relativistic_hamiltonian(n, *m, epsilon),
            TheoryConfig::Fractional { m, alpha } => fractional_hamiltonian(n, *m, epsilon, *alpha),
            TheoryConfig::Nonrelativistic { m, potential } => {
                let v = potential.clone().unwrap_or_else(|| vec![0.0; n]);
                nonrelativistic_hamiltonian(n, *m, epsilon, &v)
            }
            TheoryConfig::Curved { m, profile, time } => {
                let f = match profile {
                    ProfileConfig::Ads => sample_profile(n, epsilon, *time, |_, x: f64| 1.0 / (x * x)),
                    ProfileConfig::Flrw { a0, rate } => sample_profile(n, epsilon, *time, |t, _| a0 + rate * t),
                    ProfileConfig::Samples { values } => values.clone(),
                };
                curved_spacetime_hamiltonian(n, *m, epsilon, &f, *time)
            }
            TheoryConfig::Prequench => prequench_hamiltonian(n, epsilon),
        }
    }

    /// Dispersion family for quasi-particle predictions, if one is known.
    pub fn dispersion(&self) -> Option<(DispersionKind, f64)> {
        match self {
            TheoryConfig::Relativistic { m } => Some((DispersionKind::Relativistic, *m)),
            TheoryConfig::Fractional { m, alpha } => Some((DispersionKind::Fractional { alpha: *alpha }, *m)),
            _ => None,
        }
    }
}

fn kind_name(t: &TheoryConfig) -> &'static str {
    match t {
        TheoryConfig::Relativistic { .. } => "relativistic",
        TheoryConfig::Fractional { .. } => "fractional",
        TheoryConfig::Nonrelativistic { .. } => "nonrelativistic",
        TheoryConfig::Curved { .. } => "curved",
        TheoryConfig::Prequench => "prequench",
    }
}

/// Interval geometry of a mutual-information observable in length units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub ell: f64,
    pub d: f64,
    pub d_prime: f64,
}

pub fn pair_geometry(a: &RegionConfig, b: &RegionConfig, n: usize, epsilon: f64) -> Result<PairGeometry> {
    if a.len == 0 || b.len == 0 {
        return Err(Error::InvalidRegion("mutual_information regions must be nonempty".into()));
    }
    if a.len != b.len {
        return Err(Error::Geometry(format!("intervals must have equal length, got {} and {} sites", a.len, b.len)));
    }
    if b.start < a.end() {
        return Err(Error::Geometry(format!(
            "region b (start {}) must begin at or after the end of region a (end {})",
            b.start,
            a.end()
        )));
    }
    let l = n as f64 * epsilon;
    let ell = a.len as f64 * epsilon;
    let d = (b.start - a.end()) as f64 * epsilon;
    let d_prime = l - 2.0 * ell - d;
    if d_prime < -1e-12 * l {
        return Err(Error::Geometry(format!(
            "complementary distance d′ = L − 2ℓ − d = {d_prime} is negative (L = {l}, ℓ = {ell}, d = {d})"
        )));
    }
    Ok(PairGeometry {
        ell,
        d,
        d_prime: d_prime.max(0.0),
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed config: {e}"))
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| kind_name(&self.theory).to_string())
    }

    pub fn coherent_amplitudes(&self) -> Option<Vec<Complex<f64>>> {
        match &self.quench {
            QuenchConfig::Vacuum => None,
            QuenchConfig::Coherent { alpha } => Some(alpha.iter().map(|&[re, im]| Complex::new(re, im)).collect()),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.time_grid.map(|g| g.times()).unwrap_or_else(|| vec![0.0])
    }

    /// Checks everything that can be checked without running a simulation.
    pub fn validate(&self) -> Result<()> {
        let n = self.lattice.n;
        let eps = self.lattice.epsilon()?;
        match &self.theory {
            TheoryConfig::Nonrelativistic {
                potential: Some(v), ..
            } if v.len() != n => {
                return Err(invalid(format!("potential has {} entries for {n} sites", v.len())));
            }
            TheoryConfig::Curved {
                profile: ProfileConfig::Samples { values },
                ..
            } if values.len() != n => {
                return Err(invalid(format!("profile has {} samples for {n} sites", values.len())));
            }
            _ => {}
        }
        if let QuenchConfig::Coherent { alpha } = &self.quench {
            if alpha.len() != n {
                return Err(invalid(format!("{} coherent amplitudes for {n} sites", alpha.len())));
            }
            if alpha.iter().flatten().any(|x| !x.is_finite()) {
                return Err(invalid("coherent amplitudes must be finite"));
            }
        }
        if let Some(g) = &self.time_grid {
            if !(g.t_max >= 0.0) || !g.t_max.is_finite() {
                return Err(invalid(format!("time_grid.t_max must be finite and non-negative, got {}", g.t_max)));
            }
            if g.t_max > 0.0 && g.steps == 0 {
                return Err(invalid("time_grid.steps must be positive"));
            }
        }
        for obs in &self.observables {
            match obs {
                ObservableConfig::Entropy { region, .. } => {
                    if region.len == 0 || region.end() > n {
                        return Err(Error::InvalidRegion(format!(
                            "entropy region {}..{} does not fit on {n} sites",
                            region.start,
                            region.end()
                        )));
                    }
                }
                ObservableConfig::MutualInformation { a, b, .. } => {
                    pair_geometry(a, b, n, eps)?;
                }
                ObservableConfig::Lightcone(lc) => {
                    if !(lc.threshold > 0.0) {
                        return Err(invalid(format!("lightcone threshold must be positive, got {}", lc.threshold)));
                    }
                    if lc.alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                        return Err(invalid("lightcone alphas must be positive"));
                    }
                    if !lc.alphas.is_empty() {
                        self.theory.with_alpha(1.0)?;
                    }
                    if let Some(seps) = &lc.separations {
                        if seps.is_empty() || seps.iter().any(|&m| m + 1 >= n) {
                            return Err(Error::InvalidRegion(format!("lightcone separations must lie in 0..{}", n - 1)));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
