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

//! Correlation fronts: first threshold crossings of the mutual information
//! between a reference site and sites at growing separation, and
//! classification of the resulting arrival curve `t(d)`.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::OTACircuit;
use crate::engine::{renyi2_entropy, GaussianState, ModeRegion};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default mutual-information threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.01;

/// Residual floor of the model-selection criterion, as a fraction of the mean
/// arrival time.
pub const RESOLUTION_FLOOR: f64 = 0.02;

/// `I₂(t, M)` samples between site 0 and site `M + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGrid<T: Real> {
    pub times: Vec<T>,
    /// Lattice separations `M`.
    pub separations: Vec<usize>,
    pub epsilon: T,
    /// `values[(i, j)]` at `times[i]` and `separations[j]`.
    pub values: DMatrix<T>,
    pub threshold: T,
}

impl<T: Real> CorrelationGrid<T> {
    pub fn new(times: Vec<T>, separations: Vec<usize>, epsilon: T, values: DMatrix<T>, threshold: T) -> Result<Self> {
        if times.is_empty() || separations.is_empty() {
            return Err(Error::InsufficientData {
                needed: 1,
                got: times.len().min(separations.len()),
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        if values.shape() != (times.len(), separations.len()) {
            return Err(Error::InvalidDimension(format!(
                "values have shape {:?}, expected ({}, {})",
                values.shape(),
                times.len(),
                separations.len()
            )));
        }
        Ok(Self {
            times,
            separations,
            epsilon,
            values,
            threshold,
        })
    }

    /// Physical distance `(M + 1) ε` of column `j`.
    pub fn distance(&self, j: usize) -> T {
        T::from_usize_lossy(self.separations[j] + 1) * self.epsilon
    }

    pub fn with_threshold(&self, threshold: T) -> Self {
        Self {
            threshold,
            ..self.clone()
        }
    }
}

/// Simulates the vacuum quench under `circuit` and records `I₂` between site 0
/// and site `M + 1` for every separation.
pub fn simulate_grid<T: Real>(
    circuit: &OTACircuit<T>,
    times: &[T],
    separations: &[usize],
    threshold: T,
) -> Result<CorrelationGrid<T>> {
    let n = circuit.n;
    if let Some(&bad) = separations.iter().find(|&&m| m + 1 >= n) {
        return Err(Error::InvalidRegion(format!("separation {bad} does not fit on {n} sites")));
    }
    let origin = ModeRegion::new(vec![0])?;
    let rows: Vec<Vec<T>> = times
        .par_iter()
        .map(|&t| -> Result<Vec<T>> {
            let st = GaussianState::vacuum(n).evolve(&circuit.evolution_matrix(t))?;
            let sa = renyi2_entropy(&st.restrict(&origin)?)?;
            separations
                .iter()
                .map(|&m| {
                    let other = ModeRegion::new(vec![m + 1])?;
                    let sb = renyi2_entropy(&st.restrict(&other)?)?;
                    let sab = renyi2_entropy(&st.restrict(&origin.union(&other))?)?;
                    Ok((sa + sb - sab).max(T::zero()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let values = DMatrix::from_fn(times.len(), separations.len(), |i, j| rows[i][j]);
    CorrelationGrid::new(times.to_vec(), separations.to_vec(), circuit.epsilon, values, threshold)
}

/// First threshold crossing per separation, linearly interpolated in time.
pub fn correlation_front<T: Real>(grid: &CorrelationGrid<T>) -> Result<Vec<Option<T>>> {
    let thr = grid.threshold;
    let arrivals: Vec<Option<T>> = (0..grid.separations.len())
        .map(|j| {
            let col = grid.values.column(j);
            let i = col.iter().position(|&v| v >= thr)?;
            if i == 0 {
                return Some(grid.times[0]);
            }
            let (t0, t1) = (grid.times[i - 1], grid.times[i]);
            let (v0, v1) = (col[i - 1], col[i]);
            Some(t0 + (thr - v0) / (v1 - v0) * (t1 - t0))
        })
        .collect();
    if arrivals.iter().all(Option::is_none) {
        return Err(Error::NoFront);
    }
    Ok(arrivals)
}

/// `(d, t)` pairs for fitting; separation 0 is dropped unless `include_nearest`.
pub fn front_points<T: Real>(grid: &CorrelationGrid<T>, arrivals: &[Option<T>], include_nearest: bool) -> Vec<(T, T)> {
    grid.separations
        .iter()
        .enumerate()
        .filter(|(_, &m)| include_nearest || m > 0)
        .filter_map(|(j, _)| arrivals[j].map(|t| (grid.distance(j), t)))
        .collect()
}

/// Functional forms of a correlation front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontModel {
    /// `t = a d + b`
    Linear,
    /// `t = a d^γ + b`, `0 < γ < 1`
    Algebraic,
    /// `t = a ln d + b`
    Logarithmic,
    /// `t = b`
    Constant,
}

impl FrontModel {
    pub const ALL: [FrontModel; 4] = [
        FrontModel::Constant,
        FrontModel::Linear,
        FrontModel::Logarithmic,
        FrontModel::Algebraic,
    ];

    pub fn parameters(&self) -> usize {
        match self {
            FrontModel::Constant => 1,
            FrontModel::Linear | FrontModel::Logarithmic => 2,
            FrontModel::Algebraic => 3,
        }
    }

    fn min_points(&self) -> usize {
        match self {
            FrontModel::Algebraic => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for FrontModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FrontModel::Linear => "linear",
            FrontModel::Algebraic => "algebraic",
            FrontModel::Logarithmic => "logarithmic",
            FrontModel::Constant => "constant",
        };
        f.write_str(s)
    }
}

/// Least-squares fit of one front model.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontFit<T: Real> {
    pub model: FrontModel,
    pub a: T,
    pub b: T,
    pub gamma: Option<T>,
    /// Root-mean-square residual in `t`.
    pub residual: T,
    pub rss: T,
    /// Small-sample corrected information criterion used for selection.
    pub aicc: T,
    pub points: Vec<(T, T)>,
}

impl<T: Real> FrontFit<T> {
    pub fn predict(&self, d: T) -> T {
        match self.model {
            FrontModel::Linear => self.a * d + self.b,
            FrontModel::Logarithmic => self.a * d.ln() + self.b,
            FrontModel::Algebraic => self.a * d.powf(self.gamma.unwrap_or(T::one())) + self.b,
            FrontModel::Constant => self.b,
        }
    }
}

/// `t ≈ a x + b`; returns `(a, b, rss)`.
fn line_fit<T: Real>(xs: &[T], ts: &[T]) -> (T, T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let mt = ts.iter().fold(T::zero(), |a, &t| a + t) / n;
    let sxx = xs.iter().fold(T::zero(), |a, &x| a + (x - mx) * (x - mx));
    let sxt = xs.iter().zip(ts).fold(T::zero(), |a, (&x, &t)| a + (x - mx) * (t - mt));
    let a = if sxx > T::zero() { sxt / sxx } else { T::zero() };
    let b = mt - a * mx;
    let rss = xs.iter().zip(ts).fold(T::zero(), |acc, (&x, &t)| {
        let r = t - a * x - b;
        acc + r * r
    });
    (a, b, rss)
}

fn algebraic_fit<T: Real>(ds: &[T], ts: &[T]) -> (T, T, T, T) {
    let rss_at = |g: T| {
        let xs: Vec<T> = ds.iter().map(|&d| d.powf(g)).collect();
        line_fit(&xs, ts)
    };
    let (lo, hi) = (T::lit(1e-3), T::lit(0.999));
    let grid = 200;
    let step = (hi - lo) / T::from_usize_lossy(grid);
    let mut best = 0;
    let mut best_rss = T::max_value().unwrap_or(T::one());
    for i in 0..=grid {
        let r = rss_at(lo + step * T::from_usize_lossy(i)).2;
        if r < best_rss {
            best_rss = r;
            best = i;
        }
    }
    let mut a = (lo + step * T::from_usize_lossy(best.saturating_sub(1))).max(lo);
    let mut b = (lo + step * T::from_usize_lossy(best + 1)).min(hi);
    let ratio = T::lit(0.381_966_011_250_105);
    for _ in 0..80 {
        let x = a + (b - a) * ratio;
        let y = b - (b - a) * ratio;
        if rss_at(x).2 < rss_at(y).2 {
            b = y;
        } else {
            a = x;
        }
    }
    let g = (a + b) * T::half();
    let (ca, cb, rss) = rss_at(g);
    (ca, cb, g, rss)
}

fn aicc<T: Real>(rss: T, n: usize, k: usize, floor: T) -> T {
    let nf = T::from_usize_lossy(n);
    let kf = T::from_usize_lossy(k);
    if n <= k + 1 {
        return T::max_value().unwrap_or(T::one());
    }
    let var = (rss / nf).max(floor * floor);
    nf * var.ln() + T::two() * kf + T::two() * kf * (kf + T::one()) / (nf - kf - T::one())
}

fn resolution<T: Real>(points: &[(T, T)]) -> T {
    let n = T::from_usize_lossy(points.len());
    T::lit(RESOLUTION_FLOOR) * points.iter().fold(T::zero(), |a, p| a + p.1.abs()) / n
}

/// Fits `model` to `(d, t)` points.
pub fn fit_front<T: Real>(points: &[(T, T)], model: FrontModel) -> Result<FrontFit<T>> {
    let needed = model.min_points();
    let points: Vec<(T, T)> = points.iter().copied().filter(|(d, t)| d.is_finite() && t.is_finite()).collect();
    if points.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: points.len(),
        });
    }
    if model != FrontModel::Constant && points.iter().any(|&(d, _)| !(d > T::zero())) {
        return Err(Error::InvalidParameter("distances must be positive".into()));
    }
    let ds: Vec<T> = points.iter().map(|p| p.0).collect();
    let ts: Vec<T> = points.iter().map(|p| p.1).collect();
    let (a, b, gamma, rss) = match model {
        FrontModel::Linear => {
            let (a, b, r) = line_fit(&ds, &ts);
            (a, b, None, r)
        }
        FrontModel::Logarithmic => {
            let xs: Vec<T> = ds.iter().map(|d| d.ln()).collect();
            let (a, b, r) = line_fit(&xs, &ts);
            (a, b, None, r)
        }
        FrontModel::Constant => {
            let zeros = vec![T::zero(); ts.len()];
            let (_, b, r) = line_fit(&zeros, &ts);
            (T::zero(), b, None, r)
        }
        FrontModel::Algebraic => {
            let (a, b, g, r) = algebraic_fit(&ds, &ts);
            (a, b, Some(g), r)
        }
    };
    let n = points.len();
    Ok(FrontFit {
        model,
        a,
        b,
        gamma,
        residual: (rss / T::from_usize_lossy(n)).sqrt(),
        rss,
        aicc: aicc(rss, n, model.parameters(), resolution(&points)),
        points,
    })
}

/// Fits every model and returns the selected one first, followed by all fits
/// in [`FrontModel::ALL`] order.
pub fn classify_front<T: Real>(points: &[(T, T)]) -> Result<(FrontFit<T>, Vec<FrontFit<T>>)> {
    let mut fits = Vec::new();
    for model in FrontModel::ALL {
        match fit_front(points, model) {
            Ok(f) => fits.push(f),
            Err(Error::InsufficientData { .. }) if model == FrontModel::Algebraic && !fits.is_empty() => {}
            Err(e) => return Err(e),
        }
    }
    let tie = T::lit(1e-9);
    let best = fits
        .iter()
        .min_by(|x, y| {
            if (x.aicc - y.aicc).abs() <= tie {
                x.model
                    .parameters()
                    .cmp(&y.model.parameters())
                    .then(x.rss.partial_cmp(&y.rss).unwrap_or(std::cmp::Ordering::Equal))
            } else {
                x.aicc.partial_cmp(&y.aicc).unwrap_or(std::cmp::Ordering::Equal)
            }
        })
        .cloned()
        .expect("at least one model fitted");
    Ok((best, fits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn pts(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (1..=12).map(|i| (i as f64, f(i as f64))).collect()
    }

    #[test]
    fn zero_grid_has_no_front() {
        let g = CorrelationGrid::new(vec![0.0, 1.0], vec![0, 1], 1.0, DMatrix::zeros(2, 2), 0.01).unwrap();
        assert_eq!(correlation_front(&g), Err(Error::NoFront));
    }

    #[test]
    fn step_grid_arrivals() {
        let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let seps: Vec<usize> = (0..5).collect();
        let eps = 1.0;
        let values = DMatrix::from_fn(times.len(), seps.len(), |i, j| {
            let d = (seps[j] + 1) as f64 * eps;
            if times[i] >= 2.0 * d {
                1.0
            } else {
                0.0
            }
        });
        let g = CorrelationGrid::new(times, seps.clone(), eps, values, 1.0).unwrap();
        let a = correlation_front(&g).unwrap();
        for (j, t) in a.iter().enumerate() {
            assert_abs_diff_eq!(t.unwrap(), 2.0 * g.distance(j), epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_recovery() {
        let f = fit_front(&pts(|d| 3.0 * d + 1.0), FrontModel::Linear).unwrap();
        assert_abs_diff_eq!(f.a, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.b, 1.0, epsilon = 1e-12);
        assert!(f.residual < 1e-10);
    }

    #[test]
    fn log_recovery() {
        let f = fit_front(&pts(|d| 2.0 * d.ln() + 0.5), FrontModel::Logarithmic).unwrap();
        assert_abs_diff_eq!(f.a, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(f.b, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn algebraic_recovery() {
        let f = fit_front(&pts(|d| d.powf(0.6)), FrontModel::Algebraic).unwrap();
        assert!((f.gamma.unwrap() - 0.6).abs() < 0.02);
        assert!(fit_front(&pts(|d| d)[..3], FrontModel::Algebraic).is_err());
        assert!(fit_front(&pts(|d| d)[..2], FrontModel::Linear).is_err());
    }

    #[test]
    fn classification_of_exact_models() {
        let (b, _) = classify_front(&pts(|d| 3.0 * d + 1.0)).unwrap();
        assert_eq!(b.model, FrontModel::Linear);
        let (b, _) = classify_front(&pts(|d| 2.0 * d.ln() + 0.5)).unwrap();
        assert_eq!(b.model, FrontModel::Logarithmic);
        let (b, _) = classify_front(&pts(|d| d.powf(0.6))).unwrap();
        assert_eq!(b.model, FrontModel::Algebraic);
        let (b, _) = classify_front(&pts(|_| 1.0)).unwrap();
        assert_eq!(b.model, FrontModel::Constant);
    }

    #[test]
    fn classification_is_stable_under_noise() {
        let models: [(FrontModel, fn(f64) -> f64); 4] = [
            (FrontModel::Linear, |d| 3.0 * d + 1.0),
            (FrontModel::Logarithmic, |d| 2.0 * d.ln() + 0.5),
            (FrontModel::Algebraic, |d| d.powf(0.6)),
            (FrontModel::Constant, |_| 1.0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (model, f) in models {
            let clean: Vec<(f64, f64)> = (1..=16).map(|i| (i as f64, f(i as f64))).collect();
            let mean = clean.iter().map(|p| p.1.abs()).sum::<f64>() / clean.len() as f64;
            let noise = Normal::new(0.0, 0.01 * mean).unwrap();
            let hits = (0..200)
                .filter(|_| {
                    let noisy: Vec<(f64, f64)> = clean.iter().map(|&(d, t)| (d, t + noise.sample(&mut rng))).collect();
                    classify_front(&noisy).unwrap().0.model == model
                })
                .count();
            assert!(hits >= 190, "{model}: {hits}/200");
        }
    }

    #[test]
    fn nearest_point_excluded_by_default() {
        let times = vec![0.0, 1.0, 2.0];
        let values = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
        let g = CorrelationGrid::new(times, vec![0, 1, 2], 0.5, values, 0.5).unwrap();
        let a = correlation_front(&g).unwrap();
        let p = front_points(&g, &a, false);
        assert_eq!(p.len(), 2);
        assert_abs_diff_eq!(p[0].0, 1.0, epsilon = 1e-15);
        assert_eq!(front_points(&g, &a, true).len(), 3);
    }
}
