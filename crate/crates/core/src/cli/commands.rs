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

//! `compile`, `quench` and `lightcone` runners.

use std::fs;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{pair_geometry, ExperimentConfig, LightconeConfig, ObservableConfig, PairGeometry};
use super::CliError;
use crate::compiler::{compile_with_gauge, CirculantGauge, EigenPath, OTACircuit};
use crate::engine::{renyi2_entropy, renyi2_mutual_information, GaussianState, ModeRegion};
use crate::io::{fmt_f64, params_hash, write_csv, CircuitDocument, KIND_I2_FIN, KIND_I2_INF, KIND_S2_FIN, KIND_S2_INF};
use crate::lightcone::{classify_front, correlation_front, simulate_grid, FrontFit, FrontModel};
use crate::predict::{
    dispersion, entropy_density, entropy_finite, entropy_infinite, mutual_information_finite,
    mutual_information_infinite, populations, DispersionTable,
};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn build_circuit(cfg: &ExperimentConfig) -> Result<OTACircuit<f64>, CliError> {
    let eps = cfg.lattice.epsilon()?;
    let h = cfg.theory.hamiltonian(cfg.lattice.n, eps)?;
    Ok(compile_with_gauge(&h, cfg.gauge)?)
}

/// `|z|` at wave number 0 and at the band edge `⌊N/2⌋` of a circulant
/// circuit, as `(wave number, normal mode, |z|)`.
pub fn candidate_squeezing(c: &OTACircuit<f64>) -> Vec<(usize, usize, f64)> {
    if c.path != EigenPath::Circulant {
        return Vec::new();
    }
    let edge = match c.gauge {
        CirculantGauge::Momentum => c.n / 2,
        CirculantGauge::Paired => c.n - 1,
    };
    vec![(0, 0, c.z[0].abs()), (c.n / 2, edge, c.z[edge].abs())]
}

fn print_circuit_summary(c: &OTACircuit<f64>) {
    let gc = c.gate_count();
    let (zmax, mode) = c.max_squeezing();
    println!(
        "N = {}: {} gates ({} beam splitters, {} squeezers, {} phase shifters)",
        c.n,
        gc.total(),
        gc.beam_splitters,
        gc.squeezers,
        gc.phase_shifters
    );
    println!("max|z| = {zmax:.6} at normal mode {mode}");
    for (k, mode, z) in candidate_squeezing(c) {
        println!("  |z| at wave number {k} (mode {mode}): {z:.6}");
    }
}

pub fn cmd_compile(cfg: &ExperimentConfig, out: &Path) -> Result<CircuitDocument, CliError> {
    let circuit = build_circuit(cfg)?;
    let doc = CircuitDocument::from(&circuit);
    prepare_dir(out)?;
    write_json(&out.join("circuit.json"), &doc)?;
    print_circuit_summary(&circuit);
    Ok(doc)
}

enum Observable {
    Entropy { id: String, region: ModeRegion, ell: f64 },
    Mutual { id: String, a: ModeRegion, b: ModeRegion, geom: PairGeometry },
}

impl Observable {
    fn id(&self) -> &str {
        match self {
            Observable::Entropy { id, .. } | Observable::Mutual { id, .. } => id,
        }
    }

    fn measure(&self, state: &GaussianState<f64>) -> crate::Result<f64> {
        match self {
            Observable::Entropy { region, .. } => renyi2_entropy(&state.restrict(region)?),
            Observable::Mutual { a, b, .. } => renyi2_mutual_information(state, a, b),
        }
    }
}

fn quench_observables(cfg: &ExperimentConfig) -> Result<Vec<Observable>, CliError> {
    let n = cfg.lattice.n;
    let eps = cfg.lattice.epsilon()?;
    let mut out = Vec::new();
    for obs in &cfg.observables {
        match obs {
            ObservableConfig::Entropy { region, id } => out.push(Observable::Entropy {
                id: id
                    .clone()
                    .unwrap_or_else(|| format!("S2_A{}-{}", region.start, region.end())),
                region: region.region()?,
                ell: region.len as f64 * eps,
            }),
            ObservableConfig::MutualInformation { a, b, id } => out.push(Observable::Mutual {
                id: id
                    .clone()
                    .unwrap_or_else(|| format!("I2_A{}-{}_B{}-{}", a.start, a.end(), b.start, b.end())),
                a: a.region()?,
                b: b.region()?,
                geom: pair_geometry(a, b, n, eps)?,
            }),
            ObservableConfig::Lightcone(_) => {}
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("quench needs at least one entropy or mutual_information observable".into()));
    }
    Ok(out)
}

struct Predictor {
    table: DispersionTable<f64>,
    s: Vec<f64>,
}

impl Predictor {
    fn new(cfg: &ExperimentConfig) -> Option<Self> {
        let (kind, m) = cfg.theory.dispersion()?;
        let eps = cfg.lattice.epsilon().ok()?;
        let table = match dispersion(kind, cfg.lattice.n, eps, m) {
            Ok(t) => t,
            Err(e) => {
                warn!("no quasi-particle prediction: {e}");
                return None;
            }
        };
        if m == 0.0 {
            warn!("massless dispersion: zero modes are excluded from the prediction sums");
        }
        let s = populations(&table, true).and_then(|n| entropy_density(&n));
        match s {
            Ok(s) => Some(Self { table, s }),
            Err(e) => {
                warn!("no quasi-particle prediction: {e}");
                None
            }
        }
    }

    /// `(finite, infinite)` at time `t`; failures give `NaN`.
    fn at(&self, obs: &Observable, t: f64) -> (f64, f64) {
        let l = self.table.length();
        let (fin, inf) = match obs {
            Observable::Entropy { ell, .. } => (
                entropy_finite(t, *ell, l, &self.table, &self.s),
                entropy_infinite(t, *ell, &self.table),
            ),
            Observable::Mutual { geom, .. } => (
                mutual_information_finite(t, geom.ell, geom.d, l, &self.table, &self.s),
                mutual_information_infinite(t, geom.ell, geom.d, &self.table),
            ),
        };
        (fin.unwrap_or(f64::NAN), inf.unwrap_or(f64::NAN))
    }

    fn tau(&self, obs: &Observable) -> f64 {
        match obs {
            Observable::Entropy { ell, .. } => self.table.tau(*ell),
            Observable::Mutual { geom, .. } => self.table.tau(geom.d),
        }
    }
}

/// One observable's simulated and predicted curves.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSeries {
    pub id: String,
    pub times: Vec<f64>,
    pub sim: Vec<f64>,
    pub finite: Vec<f64>,
    pub infinite: Vec<f64>,
    pub tau: Option<f64>,
}

pub fn cmd_quench(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<QuenchSeries>, CliError> {
    let observables = quench_observables(cfg)?;
    let circuit = build_circuit(cfg)?;
    let n = cfg.lattice.n;
    let input = match cfg.coherent_amplitudes() {
        Some(alpha) => GaussianState::coherent(&alpha),
        None => GaussianState::vacuum(n),
    };
    let times = cfg.times();
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| -> crate::Result<Vec<f64>> {
            let st = input.evolve(&circuit.evolution_matrix(t))?;
            observables.iter().map(|o| o.measure(&st)).collect()
        })
        .collect::<crate::Result<_>>()?;
    let predictor = Predictor::new(cfg);

    let mut series = Vec::with_capacity(observables.len());
    for (k, obs) in observables.iter().enumerate() {
        let sim: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        let (finite, infinite): (Vec<f64>, Vec<f64>) = match &predictor {
            Some(p) => times.par_iter().map(|&t| p.at(obs, t)).unzip(),
            None => (vec![f64::NAN; times.len()], vec![f64::NAN; times.len()]),
        };
        series.push(QuenchSeries {
            id: obs.id().to_string(),
            times: times.clone(),
            sim,
            finite,
            infinite,
            tau: predictor.as_ref().map(|p| p.tau(obs)),
        });
    }

    prepare_dir(out)?;
    let mut quench_rows = Vec::new();
    let mut pred_rows = Vec::new();
    for (obs, s) in observables.iter().zip(&series) {
        let (kind_fin, kind_inf) = match obs {
            Observable::Entropy { .. } => (KIND_S2_FIN, KIND_S2_INF),
            Observable::Mutual { .. } => (KIND_I2_FIN, KIND_I2_INF),
        };
        let hash = params_hash(
            serde_json::json!({ "theory": cfg.theory, "lattice": cfg.lattice, "observable": s.id })
                .to_string()
                .as_bytes(),
        );
        for i in 0..s.times.len() {
            quench_rows.push(vec![
                fmt_f64(s.times[i]),
                fmt_f64(s.sim[i]),
                fmt_f64(s.finite[i]),
                fmt_f64(s.infinite[i]),
                s.id.clone(),
            ]);
        }
        if predictor.is_some() {
            for (kind, values) in [(kind_fin, &s.finite), (kind_inf, &s.infinite)] {
                for i in 0..s.times.len() {
                    pred_rows.push(vec![
                        fmt_f64(s.times[i]),
                        fmt_f64(values[i]),
                        kind.to_string(),
                        hash.clone(),
                        s.id.clone(),
                    ]);
                }
            }
        }
    }
    let qpath = out.join("quench.csv");
    write_csv(&qpath, &["t", "sim_value", "pred_finite", "pred_infinite", "observable"], &quench_rows)
        .map_err(|e| CliError::io(&qpath, e))?;
    if cfg.outputs.predictions && predictor.is_some() {
        let ppath = out.join("predictions.csv");
        write_csv(&ppath, &["t", "value", "kind", "params_hash", "observable"], &pred_rows)
            .map_err(|e| CliError::io(&ppath, e))?;
    }
    if cfg.outputs.circuit {
        write_json(&out.join("circuit.json"), &CircuitDocument::from(&circuit))?;
    }

    for s in &series {
        let peak = s.sim.iter().fold(0.0f64, |m, &x| m.max(x));
        match s.tau {
            Some(tau) => println!("{}: {} samples, peak {peak:.6}, τ = {tau:.4}", s.id, s.times.len()),
            None => println!("{}: {} samples, peak {peak:.6}", s.id, s.times.len()),
        }
    }
    Ok(series)
}

/// Serialized fit of one front model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub model: FrontModel,
    pub a: f64,
    pub b: f64,
    pub gamma: Option<f64>,
    pub residual: f64,
    pub rss: f64,
    pub aicc: f64,
}

impl From<&FrontFit<f64>> for FitRecord {
    fn from(f: &FrontFit<f64>) -> Self {
        Self {
            model: f.model,
            a: f.a,
            b: f.b,
            gamma: f.gamma,
            residual: f.residual,
            rss: f.rss,
            aicc: f.aicc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezingRecord {
    pub wave_number: usize,
    pub mode: usize,
    pub abs_z: f64,
}

/// Light-cone result for one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LightconeRun {
    pub alpha: Option<f64>,
    pub max_abs_z: Option<f64>,
    pub max_abs_z_mode: Option<usize>,
    pub candidate_squeezing: Vec<SqueezingRecord>,
    pub classification: Option<FrontModel>,
    pub best: Option<FitRecord>,
    pub fits: Vec<FitRecord>,
    pub fit_points: Vec<[f64; 2]>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LightconeReport {
    pub schema: String,
    pub threshold: f64,
    pub epsilon: f64,
    pub n: usize,
    pub separations: Vec<usize>,
    pub fit_separations: Vec<usize>,
    pub runs: Vec<LightconeRun>,
}

struct GridRows {
    grid: Vec<Vec<String>>,
    front: Vec<Vec<String>>,
}

fn lightcone_point(
    cfg: &ExperimentConfig,
    lc: &LightconeConfig,
    alpha: Option<f64>,
    times: &[f64],
    separations: &[usize],
    fit_max: usize,
) -> (LightconeRun, GridRows) {
    let mut run = LightconeRun {
        alpha,
        max_abs_z: None,
        max_abs_z_mode: None,
        candidate_squeezing: Vec::new(),
        classification: None,
        best: None,
        fits: Vec::new(),
        fit_points: Vec::new(),
        error: None,
    };
    let mut rows = GridRows {
        grid: Vec::new(),
        front: Vec::new(),
    };
    let label = alpha.map(fmt_f64).unwrap_or_else(|| "nan".into());
    let result = (|| -> Result<(), CliError> {
        let theory = match alpha {
            Some(a) => cfg.theory.with_alpha(a)?,
            None => cfg.theory.clone(),
        };
        let eps = cfg.lattice.epsilon()?;
        let circuit = compile_with_gauge(&theory.hamiltonian(cfg.lattice.n, eps)?, cfg.gauge)?;
        let (zmax, mode) = circuit.max_squeezing();
        run.max_abs_z = Some(zmax);
        run.max_abs_z_mode = Some(mode);
        run.candidate_squeezing = candidate_squeezing(&circuit)
            .into_iter()
            .map(|(wave_number, mode, abs_z)| SqueezingRecord {
                wave_number,
                mode,
                abs_z,
            })
            .collect();
        let grid = simulate_grid(&circuit, times, separations, lc.threshold)?;
        for (i, &t) in grid.times.iter().enumerate() {
            for (j, &m) in grid.separations.iter().enumerate() {
                rows.grid.push(vec![
                    label.clone(),
                    fmt_f64(t),
                    m.to_string(),
                    fmt_f64(grid.distance(j)),
                    fmt_f64(grid.values[(i, j)]),
                ]);
            }
        }
        let arrivals = correlation_front(&grid);
        let arrivals = match arrivals {
            Ok(a) => a,
            Err(e) => {
                for (j, &m) in grid.separations.iter().enumerate() {
                    rows.front.push(vec![label.clone(), m.to_string(), fmt_f64(grid.distance(j)), "nan".into(), "0".into()]);
                }
                return Err(e.into());
            }
        };
        let mut points = Vec::new();
        for (j, &m) in grid.separations.iter().enumerate() {
            let in_fit = (lc.include_nearest || m > 0) && m <= fit_max && arrivals[j].is_some();
            rows.front.push(vec![
                label.clone(),
                m.to_string(),
                fmt_f64(grid.distance(j)),
                fmt_f64(arrivals[j].unwrap_or(f64::NAN)),
                if in_fit { "1" } else { "0" }.into(),
            ]);
            if in_fit {
                points.push((grid.distance(j), arrivals[j].unwrap_or(f64::NAN)));
            }
        }
        run.fit_points = points.iter().map(|&(d, t)| [d, t]).collect();
        let (best, fits) = classify_front(&points)?;
        run.classification = Some(best.model);
        run.best = Some(FitRecord::from(&best));
        run.fits = fits.iter().map(FitRecord::from).collect();
        Ok(())
    })();
    if let Err(e) = result {
        run.error = Some(e.to_string());
    }
    (run, rows)
}

pub fn cmd_lightcone(cfg: &ExperimentConfig, out: &Path) -> Result<LightconeReport, CliError> {
    let lc = cfg
        .observables
        .iter()
        .find_map(|o| match o {
            ObservableConfig::Lightcone(lc) => Some(lc.clone()),
            _ => None,
        })
        .ok_or_else(|| CliError::Config("lightcone needs a lightcone observable".into()))?;
    let n = cfg.lattice.n;
    let eps = cfg.lattice.epsilon()?;
    let times = cfg.times();
    if times.len() < 2 {
        return Err(CliError::Config("lightcone needs a time grid with t_max > 0".into()));
    }
    let separations = lc.separations.clone().unwrap_or_else(|| (0..n / 2).collect());
    let fit_max = lc.fit_max_separation.unwrap_or((n / 2).saturating_sub(2));
    let alphas: Vec<Option<f64>> = if lc.alphas.is_empty() {
        vec![None]
    } else {
        lc.alphas.iter().copied().map(Some).collect()
    };

    let results: Vec<(LightconeRun, GridRows)> = alphas
        .par_iter()
        .map(|&a| lightcone_point(cfg, &lc, a, &times, &separations, fit_max))
        .collect();

    prepare_dir(out)?;
    let mut grid_rows = Vec::new();
    let mut front_rows = Vec::new();
    let mut runs = Vec::new();
    for (run, rows) in results {
        grid_rows.extend(rows.grid);
        front_rows.extend(rows.front);
        runs.push(run);
    }
    let gpath = out.join("lightcone_grid.csv");
    write_csv(&gpath, &["alpha", "t", "M", "distance", "I2"], &grid_rows).map_err(|e| CliError::io(&gpath, e))?;
    let fpath = out.join("lightcone_front.csv");
    write_csv(&fpath, &["alpha", "M", "distance", "arrival", "in_fit"], &front_rows)
        .map_err(|e| CliError::io(&fpath, e))?;
    let report = LightconeReport {
        schema: "ota-sim lightcone v1".into(),
        threshold: lc.threshold,
        epsilon: eps,
        n,
        fit_separations: separations
            .iter()
            .copied()
            .filter(|&m| (lc.include_nearest || m > 0) && m <= fit_max)
            .collect(),
        separations,
        runs,
    };
    write_json(&out.join("lightcone_fits.json"), &report)?;

    for run in &report.runs {
        let a = run.alpha.map(|a| format!("α = {a}")).unwrap_or_else(|| "configured theory".into());
        match (&run.classification, &run.error) {
            (Some(model), _) => {
                let g = run.best.as_ref().and_then(|b| b.gamma).map(|g| format!(" (γ = {g:.3})")).unwrap_or_default();
                println!("{a}: {model}{g}, max|z| = {:.4}", run.max_abs_z.unwrap_or(f64::NAN));
            }
            (None, Some(e)) => println!("{a}: {e}"),
            (None, None) => println!("{a}: no result"),
        }
    }
    Ok(report)
}
