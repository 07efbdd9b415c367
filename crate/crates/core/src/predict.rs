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

//! Quasi-particle predictions for entanglement and correlation growth after
//! a mass quench from the decoupled ground state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum number of quadrature points over the half Brillouin zone.
pub const QUAD_POINTS: usize = 4096;

/// Dispersion family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionKind {
    Relativistic,
    Fractional { alpha: f64 },
}

/// Mode frequencies and group velocities on an N-site ring, indexed by
/// momentum `k = 0..N−1` with `p = 2πk/(Nε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable<T: Real> {
    pub n: usize,
    pub epsilon: T,
    pub m: T,
    pub kind: DispersionKind,
    pub omega: Vec<T>,
    pub velocity: Vec<T>,
    pub v_max: T,
}

impl<T: Real> DispersionTable<T> {
    pub fn momentum(&self, k: usize) -> T {
        T::two() * T::pi() * T::from_usize_lossy(k) / (T::from_usize_lossy(self.n) * self.epsilon)
    }

    pub fn length(&self) -> T {
        T::from_usize_lossy(self.n) * self.epsilon
    }

    /// Finite-difference step for fractional-dispersion velocities.
    fn fd_step(&self) -> T {
        fd_step(self.n, self.epsilon)
    }

    /// `ω(p)` of the continuous-momentum dispersion.
    pub fn omega_at(&self, p: T) -> T {
        omega_at(self.kind, self.m, self.epsilon, p)
    }

    /// `v(p) = dω/dp`.
    pub fn velocity_at(&self, p: T) -> Result<T> {
        velocity_at(self.kind, self.m, self.epsilon, self.fd_step(), p)
    }

    /// Arrival scale `ℓ / (2 v_max)`.
    pub fn tau(&self, ell: T) -> T {
        ell / (T::two() * self.v_max)
    }
}

fn fd_step<T: Real>(n: usize, epsilon: T) -> T {
    T::two() * T::pi() / (T::lit(10.0) * T::from_usize_lossy(n) * epsilon)
}

fn omega_at<T: Real>(kind: DispersionKind, m: T, eps: T, p: T) -> T {
    let s = (eps * p * T::half()).sin().abs();
    match kind {
        DispersionKind::Relativistic => (m * m + T::lit(4.0) / (eps * eps) * s * s).sqrt(),
        DispersionKind::Fractional { alpha } => {
            let a = T::lit(alpha);
            let mass = if m == T::zero() { T::zero() } else { m.powf(a) };
            let kin = if s == T::zero() { T::zero() } else { s.powf(a) };
            (mass + T::two().powf(a) / (eps * eps) * kin).sqrt()
        }
    }
}

fn velocity_at<T: Real>(kind: DispersionKind, m: T, eps: T, h: T, p: T) -> Result<T> {
    match kind {
        DispersionKind::Relativistic => {
            if m == T::zero() {
                return Ok((eps * p * T::half()).cos());
            }
            let w = omega_at(kind, m, eps, p);
            let num = (eps * p).sin();
            if w == T::zero() {
                return if num.abs() <= T::eps() {
                    Ok(T::zero())
                } else {
                    Err(Error::SingularVelocity { k: 0 })
                };
            }
            Ok(num / (eps * w))
        }
        DispersionKind::Fractional { .. } => {
            Ok((omega_at(kind, m, eps, p + h) - omega_at(kind, m, eps, p - h)) / (T::two() * h))
        }
    }
}

fn check_alpha(kind: DispersionKind) -> Result<()> {
    if let DispersionKind::Fractional { alpha } = kind {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("exponent must be positive, got {alpha}")));
        }
    }
    Ok(())
}

/// Tabulates `ω_k` and `v_k` and finds `v_max`.
pub fn dispersion<T: Real>(kind: DispersionKind, n: usize, epsilon: T, m: T) -> Result<DispersionTable<T>> {
    check_alpha(kind)?;
    if n == 0 {
        return Err(Error::InvalidDimension("need N >= 1".into()));
    }
    if !(epsilon > T::zero()) || !(m >= T::zero()) {
        return Err(Error::InvalidParameter("need ε > 0 and m >= 0".into()));
    }
    let mut table = DispersionTable {
        n,
        epsilon,
        m,
        kind,
        omega: Vec::with_capacity(n),
        velocity: Vec::new(),
        v_max: T::zero(),
    };
    for k in 0..n {
        let w = table.omega_at(table.momentum(k));
        table.omega.push(w);
    }
    let (v, vmax) = group_velocity(&table)?;
    table.velocity = v;
    table.v_max = vmax;
    Ok(table)
}

/// Group velocities on the momentum grid and the maximal speed over the
/// continuous Brillouin zone.
pub fn group_velocity<T: Real>(table: &DispersionTable<T>) -> Result<(Vec<T>, T)> {
    let mut v = Vec::with_capacity(table.n);
    for k in 0..table.n {
        let p = table.momentum(k);
        v.push(table.velocity_at(p).map_err(|e| match e {
            Error::SingularVelocity { .. } => Error::SingularVelocity { k },
            other => other,
        })?);
    }
    let top = T::pi() / table.epsilon;
    let samples = QUAD_POINTS;
    let step = top / T::from_usize_lossy(samples);
    let speed = |p: T| table.velocity_at(p).map(|x| x.abs()).unwrap_or(T::zero());
    let mut best = 0;
    let mut best_v = T::zero();
    for i in 0..=samples {
        let s = speed(step * T::from_usize_lossy(i));
        if s > best_v {
            best_v = s;
            best = i;
        }
    }
    let mut lo = step * T::from_usize_lossy(best.saturating_sub(1));
    let mut hi = (step * T::from_usize_lossy(best + 1)).min(top);
    let ratio = T::lit(0.381_966_011_250_105);
    for _ in 0..100 {
        let a = lo + (hi - lo) * ratio;
        let b = hi - (hi - lo) * ratio;
        if speed(a) < speed(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let refined = speed((lo + hi) * T::half()).max(best_v);
    let grid_max = v.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    Ok((v, refined.max(grid_max)))
}

/// `n_k = (1/(εω_k) + εω_k − 2)/4`. Zero modes diverge; with
/// `exclude_zero_modes` they are set to zero and a warning is logged.
pub fn populations<T: Real>(table: &DispersionTable<T>, exclude_zero_modes: bool) -> Result<Vec<T>> {
    table
        .omega
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let x = table.epsilon * w;
            if x <= T::zero() {
                if exclude_zero_modes {
                    log::warn!("zero mode at k = {k} excluded from quasi-particle sums");
                    Ok(T::zero())
                } else {
                    Err(Error::DivergentPopulation { k })
                }
            } else {
                Ok(population(x))
            }
        })
        .collect()
}

fn population<T: Real>(x: T) -> T {
    ((T::one() / x + x - T::two()) / T::lit(4.0)).max(T::zero())
}

/// Rényi-2 entropy per mode, `ln(1 + 2 n_k)`.
pub fn entropy_density<T: Real>(n: &[T]) -> Result<Vec<T>> {
    n.iter()
        .map(|&x| {
            if x >= T::zero() && x.is_finite() {
                Ok((T::one() + T::two() * x).ln())
            } else {
                Err(Error::InvalidParameter(format!("population {x} is not a finite non-negative number")))
            }
        })
        .collect()
}

/// Continuum entropy density `s(p)`; zero where `ω(p) = 0`.
fn density_at<T: Real>(table: &DispersionTable<T>, p: T) -> T {
    let x = table.epsilon * table.omega_at(p);
    if x <= T::zero() {
        T::zero()
    } else {
        (T::one() + T::two() * population(x)).ln()
    }
}

fn simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, intervals: usize) -> T {
    let m = intervals + intervals % 2;
    let h = (b - a) / T::from_usize_lossy(m);
    let mut sum = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::two() };
        sum += w * f(a + h * T::from_usize_lossy(i));
    }
    sum * h / T::lit(3.0)
}

/// `∫_0^{π/ε} f(p) dp` with panel boundaries at the points where
/// `2|v(p)| t` crosses one of `levels`.
fn integrate_half_zone<T: Real>(table: &DispersionTable<T>, t: T, levels: &[T], f: impl Fn(T) -> T) -> T {
    let top = T::pi() / table.epsilon;
    let grid = QUAD_POINTS;
    let h = top / T::from_usize_lossy(grid);
    let spread = |p: T| T::two() * table.velocity_at(p).map(|v| v.abs()).unwrap_or(T::zero()) * t;
    let mut cuts = vec![T::zero()];
    if t > T::zero() {
        let mut prev = spread(T::zero());
        for i in 1..=grid {
            let p = h * T::from_usize_lossy(i);
            let cur = spread(p);
            for &lvl in levels {
                if (prev - lvl) * (cur - lvl) < T::zero() {
                    let (mut a, mut b) = (p - h, p);
                    let below = prev < lvl;
                    for _ in 0..60 {
                        let mid = (a + b) * T::half();
                        if (spread(mid) < lvl) == below {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    cuts.push((a + b) * T::half());
                }
            }
            prev = cur;
        }
    }
    cuts.push(top);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut total = T::zero();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= T::zero() {
            continue;
        }
        let share = (len / top * T::from_usize_lossy(grid)).ceil().to_usize().unwrap_or(16).max(16);
        total += simpson(&f, w[0], w[1], share);
    }
    total
}

/// Infinite-volume entanglement entropy of an interval of length `ell`.
pub fn entropy_infinite<T: Real>(t: T, ell: T, table: &DispersionTable<T>) -> Result<T> {
    if !(t >= T::zero()) || !(ell > T::zero()) {
        return Err(Error::InvalidParameter("need t >= 0 and ℓ > 0".into()));
    }
    if t == T::zero() {
        return Ok(T::zero());
    }
    let integral = integrate_half_zone(table, t, &[ell], |p| {
        let spread = T::two() * table.velocity_at(p).map(|v| v.abs()).unwrap_or(T::zero()) * t;
        density_at(table, p) * spread.min(ell)
    });
    Ok(integral / T::pi())
}

/// Infinite-volume mutual information of two intervals of length `ell` at
/// separation `d`.
pub fn mutual_information_infinite<T: Real>(t: T, ell: T, d: T, table: &DispersionTable<T>) -> Result<T> {
    if !(t >= T::zero()) || !(ell > T::zero()) || !(d > T::zero()) {
        return Err(Error::InvalidParameter("need t >= 0, ℓ > 0, d > 0".into()));
    }
    if t == T::zero() {
        return Ok(T::zero());
    }
    let levels = [d, d + ell, d + T::two() * ell];
    let integral = integrate_half_zone(table, t, &levels, |p| {
        let x = T::two() * table.velocity_at(p).map(|v| v.abs()).unwrap_or(T::zero()) * t;
        let comb = x.max(d) + x.max(d + T::two() * ell) - T::two() * x.max(d + ell);
        density_at(table, p) * comb.max(T::zero())
    });
    Ok(integral / T::pi())
}

fn frac<T: Real>(x: T) -> T {
    x - x.floor()
}

fn check_finite_geometry<T: Real>(ell: T, l: T, t: T) -> Result<()> {
    if !(ell > T::zero()) || !(ell < l) {
        return Err(Error::Geometry(format!("need 0 < ℓ < L, got ℓ = {ell}, L = {l}")));
    }
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    Ok(())
}

/// Finite-volume entanglement entropy of an interval of length `ell` on a ring
/// of length `l`, given per-mode entropy densities `s`.
pub fn entropy_finite<T: Real>(t: T, ell: T, l: T, table: &DispersionTable<T>, s: &[T]) -> Result<T> {
    check_finite_geometry(ell, l, t)?;
    let r = ell / l;
    Ok(table.velocity.iter().zip(s).fold(T::zero(), |acc, (&v, &sk)| {
        let g = frac(T::two() * v.abs() * t / l);
        acc + sk * g.min(r).min(T::one() - g)
    }))
}

fn mi_term<T: Real>(x: T, r: T, g: T) -> T {
    (x.max(g) + (x + T::two() * r).max(g) - T::two() * (x + r).max(g)).max(T::zero())
}

/// Finite-volume mutual information of two intervals of length `ell` at
/// separation `d` on a ring of length `l`.
pub fn mutual_information_finite<T: Real>(t: T, ell: T, d: T, l: T, table: &DispersionTable<T>, s: &[T]) -> Result<T> {
    check_finite_geometry(ell, l, t)?;
    let dp = l - T::two() * ell - d;
    if dp < T::zero() || !(d >= T::zero()) {
        return Err(Error::Geometry(format!(
            "complementary distance L − 2ℓ − d = {dp} is negative (ℓ = {ell}, d = {d}, L = {l})"
        )));
    }
    let r = ell / l;
    let xs = [d / l, dp / l, (l + d) / l, (l + dp) / l];
    Ok(table.velocity.iter().zip(s).fold(T::zero(), |acc, (&v, &sk)| {
        let g = frac(T::two() * v.abs() * t / l);
        acc + sk * xs.iter().fold(T::zero(), |a, &x| a + mi_term(x, r, g))
    }))
}

/// Early-time slope `(1/L) Σ_k s_k · 2|v_k|` of [`entropy_finite`].
pub fn finite_entropy_slope<T: Real>(table: &DispersionTable<T>, s: &[T]) -> T {
    let l = table.length();
    table
        .velocity
        .iter()
        .zip(s)
        .fold(T::zero(), |acc, (&v, &sk)| acc + sk * T::two() * v.abs())
        / l
}

/// Sampled prediction curves for one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchPrediction<T: Real> {
    pub populations: Vec<T>,
    pub entropy_density: Vec<T>,
    pub tau: T,
    pub times: Vec<T>,
    pub finite: Vec<T>,
    pub infinite: Vec<T>,
}

/// Observable to predict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictedObservable<T> {
    Entropy { ell: T },
    MutualInformation { ell: T, d: T },
}

/// Evaluates finite and infinite-volume predictions on `times`.
pub fn predict<T: Real>(
    table: &DispersionTable<T>,
    observable: PredictedObservable<T>,
    times: &[T],
    exclude_zero_modes: bool,
) -> Result<QuenchPrediction<T>> {
    let n = populations(table, exclude_zero_modes)?;
    let s = entropy_density(&n)?;
    let l = table.length();
    let ell = match observable {
        PredictedObservable::Entropy { ell } | PredictedObservable::MutualInformation { ell, .. } => ell,
    };
    let mut finite = Vec::with_capacity(times.len());
    let mut infinite = Vec::with_capacity(times.len());
    for &t in times {
        match observable {
            PredictedObservable::Entropy { ell } => {
                finite.push(entropy_finite(t, ell, l, table, &s)?);
                infinite.push(entropy_infinite(t, ell, table)?);
            }
            PredictedObservable::MutualInformation { ell, d } => {
                finite.push(mutual_information_finite(t, ell, d, l, table, &s)?);
                infinite.push(mutual_information_infinite(t, ell, d, table)?);
            }
        }
    }
    Ok(QuenchPrediction {
        populations: n,
        entropy_density: s,
        tau: table.tau(ell),
        times: times.to_vec(),
        finite,
        infinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{renyi2_entropy, GaussianState};
    use approx::assert_abs_diff_eq;

    fn fig4(n: usize) -> DispersionTable<f64> {
        dispersion(DispersionKind::Relativistic, n, 2.0, 1.0).unwrap()
    }

    #[test]
    fn relativistic_dispersion_values() {
        let t = fig4(5);
        let expected = [1.0, 1.16, 1.38, 1.38, 1.16];
        for (w, e) in t.omega.iter().zip(expected) {
            assert!((w - e).abs() < 0.01);
        }
        assert_abs_diff_eq!(t.omega[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.velocity[0], 0.0, epsilon = 1e-15);
        for k in 1..5 {
            assert_abs_diff_eq!(t.omega[k], t.omega[5 - k], epsilon = 1e-14);
        }
    }

    #[test]
    fn vmax_for_fig4() {
        let t = fig4(25);
        assert_abs_diff_eq!(t.v_max, 2f64.sqrt() - 1.0, epsilon = 1e-9);
        let ell = t.length() / 5.0;
        assert!((t.tau(ell) / 25.0 - 0.48).abs() < 0.01);
    }

    #[test]
    fn massless_velocity() {
        let t = dispersion::<f64>(DispersionKind::Relativistic, 16, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(t.v_max, 1.0, epsilon = 1e-12);
        for k in 1..16 {
            let p = t.momentum(k);
            assert_abs_diff_eq!(t.velocity[k].abs(), (0.5 * p / 2.0f64).cos().abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn fractional_two_matches_relativistic() {
        for m in [0.0, 1.0] {
            let a = dispersion::<f64>(DispersionKind::Fractional { alpha: 2.0 }, 12, 0.3, m).unwrap();
            let b = dispersion(DispersionKind::Relativistic, 12, 0.3, m).unwrap();
            for k in 0..12 {
                assert_abs_diff_eq!(a.omega[k], b.omega[k], epsilon = 1e-12);
            }
            assert!((a.v_max - b.v_max).abs() < 1e-2);
        }
        assert!(dispersion::<f64>(DispersionKind::Fractional { alpha: 0.0 }, 4, 1.0, 1.0).is_err());
    }

    #[test]
    fn population_values() {
        assert_abs_diff_eq!(population(1.0), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(population(2.0), 0.125, epsilon = 1e-16);
        let t = dispersion(DispersionKind::Relativistic, 6, 1.0, 0.0).unwrap();
        assert_eq!(populations(&t, false), Err(Error::DivergentPopulation { k: 0 }));
        assert_eq!(populations(&t, true).unwrap()[0], 0.0);
    }

    #[test]
    fn entropy_density_matches_thermal_state() {
        for i in 0..=100 {
            let n = i as f64 * 0.1;
            let s = entropy_density(&[n]).unwrap()[0];
            let st = GaussianState::thermal(&[n]);
            assert_abs_diff_eq!(s, renyi2_entropy(&st).unwrap(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(entropy_density(&[0.125]).unwrap()[0], 1.25f64.ln(), epsilon = 1e-15);
        assert!(entropy_density(&[-0.1]).is_err());
    }

    #[test]
    fn infinite_entropy_limits_and_slope() {
        let t = fig4(25);
        let ell = 10.0;
        assert_eq!(entropy_infinite(0.0, ell, &t).unwrap(), 0.0);
        let top = std::f64::consts::PI / t.epsilon;
        let sat = simpson(&|p| density_at(&t, p), 0.0, top, 8192) * ell / std::f64::consts::PI;
        assert!((entropy_infinite(1e9, ell, &t).unwrap() - sat).abs() < 1e-6 * sat);
        let slope = simpson(&|p| density_at(&t, p) * t.velocity_at(p).unwrap().abs(), 0.0, top, 8192) * 2.0
            / std::f64::consts::PI;
        let h = 1e-3;
        let fd = entropy_infinite(h, ell, &t).unwrap() / h;
        assert!((fd - slope).abs() < 1e-6 * slope);
    }

    #[test]
    fn infinite_mi_onset() {
        let t = fig4(20);
        let (ell, d) = (8.0, 8.0);
        let tau = d / (2.0 * t.v_max);
        assert_eq!(mutual_information_infinite(0.0, ell, d, &t).unwrap(), 0.0);
        assert_eq!(mutual_information_infinite(0.99 * tau, ell, d, &t).unwrap(), 0.0);
        assert!(mutual_information_infinite(1.5 * tau, ell, d, &t).unwrap() > 0.0);
    }

    #[test]
    fn finite_entropy_properties() {
        let t = fig4(25);
        let s = entropy_density(&populations(&t, false).unwrap()).unwrap();
        let l = t.length();
        let ell = l / 5.0;
        assert_eq!(entropy_finite(0.0, ell, l, &t, &s).unwrap(), 0.0);
        let slope = finite_entropy_slope(&t, &s);
        let h = 1e-4;
        assert!((entropy_finite(h, ell, l, &t, &s).unwrap() / h - slope).abs() < 1e-2 * slope);
        let tau = t.tau(ell);
        let plateau = (10..40).map(|i| entropy_finite(i as f64 * 0.1 * tau, ell, l, &t, &s).unwrap()).fold(0.0, f64::max);
        let dip = (45..=55).map(|i| entropy_finite(i as f64 * 0.1 * tau, ell, l, &t, &s).unwrap()).fold(f64::MAX, f64::min);
        assert!(dip < 0.9 * plateau);
        assert!(entropy_finite(1.0, l, l, &t, &s).is_err());
    }

    #[test]
    fn single_mode_periodicity() {
        let mut t = fig4(10);
        let k = 3;
        let s: Vec<f64> = (0..10).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        let l = t.length();
        let period = l / (2.0 * t.velocity[k].abs());
        for &x in &[0.3, 1.7, 4.1] {
            let a = entropy_finite(x, 4.0, l, &t, &s).unwrap();
            let b = entropy_finite(x + period, 4.0, l, &t, &s).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        t.velocity[k] = 0.0;
        assert_eq!(entropy_finite(5.0, 4.0, l, &t, &s).unwrap(), 0.0);
    }

    #[test]
    fn finite_mi_properties() {
        let t = fig4(20);
        let s = entropy_density(&populations(&t, false).unwrap()).unwrap();
        let l = t.length();
        let ell = l / 5.0;
        let d = l / 5.0;
        let dp = l - 2.0 * ell - d;
        assert_eq!(mutual_information_finite(0.0, ell, d, l, &t, &s).unwrap(), 0.0);
        for &x in &[3.0, 11.0, 30.0] {
            let a = mutual_information_finite(x, ell, d, l, &t, &s).unwrap();
            let b = mutual_information_finite(x, ell, dp, l, &t, &s).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(matches!(
            mutual_information_finite(1.0, ell, 0.7 * l, l, &t, &s),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn finite_approaches_infinite() {
        let (eps, m) = (1.0f64, 1.0f64);
        let ell = 8.0;
        let time = 5.0;
        let mut gaps = Vec::new();
        for n in [32, 64, 128] {
            let t = dispersion(DispersionKind::Relativistic, n, eps, m).unwrap();
            let s = entropy_density(&populations(&t, false).unwrap()).unwrap();
            let fin = entropy_finite(time, ell, t.length(), &t, &s).unwrap();
            let inf = entropy_infinite(time, ell, &t).unwrap();
            gaps.push((fin - inf).abs());
        }
        assert!(gaps[2] < gaps[0]);
        assert!(gaps[2] < 0.05);
    }
}
