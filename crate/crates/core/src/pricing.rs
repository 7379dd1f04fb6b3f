//! Bond prices, discounted prices and forward-rate dynamics from the curves.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curves::{CurvePair, CurvePoint, Dynamics};
use crate::error::domain;
use crate::math;
use crate::sde::{PathEnsemble, ShortRateModel};
use crate::Result;

fn maturity_gap(t: f64, maturity: f64) -> Result<f64> {
    if !(t.is_finite() && maturity.is_finite()) || maturity < t {
        return Err(domain!("need t <= T, got t = {t}, T = {maturity}"));
    }
    Ok(maturity - t)
}

fn check_rate(r: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(domain!("short rate must be finite and non-negative, got {r}"));
    }
    Ok(())
}

/// `P(t, T) = exp(-A(T - t) - B(T - t) r)`.
pub fn bond_price(pair: &CurvePair, r: f64, t: f64, maturity: f64) -> Result<f64> {
    check_rate(r)?;
    let p = pair.evaluate(maturity_gap(t, maturity)?)?;
    Ok(math::exp(-p.a - p.b * r))
}

/// `P̂(t, T) = P(t, T) exp(-∫₀ᵗ R ds)` along one stored path.
pub fn discounted_price_path(
    pair: &CurvePair,
    ensemble: &PathEnsemble,
    path: usize,
    t: f64,
    maturity: f64,
) -> Result<f64> {
    if path >= ensemble.n_paths {
        return Err(domain!("path {path} out of range (ensemble has {})", ensemble.n_paths));
    }
    let k = ensemble.time_index(t)?;
    let r = ensemble.path(path)[k];
    let q = ensemble.integrated_path(path)[k];
    Ok(bond_price(pair, r, t, maturity)? * math::exp(-q))
}

/// `f(t, T) = A'(T - t) + B'(T - t) r`.
pub fn forward_rate(pair: &CurvePair, r: f64, t: f64, maturity: f64) -> Result<f64> {
    check_rate(r)?;
    let p = pair.evaluate(maturity_gap(t, maturity)?)?;
    Ok(p.a_prime + p.b_prime * r)
}

/// Drift and per-noise volatilities of `df(t, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HjmCoefficients {
    pub drift: f64,
    pub vols: Vec<f64>,
}

/// HJM drift `F(r) B'(v) - A''(v) - B''(v) r` and volatilities
/// `B'(v) Gᵢ(r)` at `v = T - t`.
pub fn hjm_drift_vol(
    pair: &CurvePair,
    model: &ShortRateModel,
    r: f64,
    t: f64,
    maturity: f64,
) -> Result<HjmCoefficients> {
    check_rate(r)?;
    let p = pair.evaluate(maturity_gap(t, maturity)?)?;
    Ok(hjm_coefficients(&p, &pair.dynamics, model, r))
}

/// As [`hjm_drift_vol`] for an already evaluated curve point.
///
/// `A''` and `B''` come from differentiating the curve system, not from
/// numerical differences.
pub fn hjm_coefficients(p: &CurvePoint, dynamics: &Dynamics, model: &ShortRateModel, r: f64) -> HjmCoefficients {
    let (a2, b2) = p.second_derivatives(dynamics);
    HjmCoefficients {
        drift: model.drift(r) * p.b_prime - a2 - b2 * r,
        vols: (0..model.noise.channels().len()).map(|i| p.b_prime * model.diffusion_value(i, r)).collect(),
    }
}

/// Whether a surface holds one path's prices or Monte-Carlo averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceLevel {
    Path(usize),
    Expectation,
    /// Prices from a fixed initial short rate.
    Initial,
}

/// Values on a `(t, T)` grid, row-major in `t`. Entries with `T < t` are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondSurface {
    pub times: Vec<f64>,
    pub maturities: Vec<f64>,
    pub values: Vec<f64>,
    pub level: SurfaceLevel,
}

impl BondSurface {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.maturities.len() + j]
    }

    /// `(t, T, value)` for the entries with `t ≤ T`.
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.times.iter().enumerate().flat_map(move |(i, &t)| {
            self.maturities
                .iter()
                .enumerate()
                .filter(move |(_, &m)| m >= t)
                .map(move |(j, &m)| (t, m, self.get(i, j)))
        })
    }
}

fn fill<F: FnMut(f64, f64) -> Result<f64>>(times: &[f64], maturities: &[f64], mut f: F) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(times.len() * maturities.len());
    for &t in times {
        for &m in maturities {
            values.push(if m < t { f64::NAN } else { f(t, m)? });
        }
    }
    Ok(values)
}

/// `P(0, T)` for `R(0) = r`, or `f(0, T)` when `forward` is set.
pub fn initial_surface(pair: &CurvePair, r: f64, maturities: &[f64], forward: bool) -> Result<BondSurface> {
    let values = fill(&[0.0], maturities, |t, m| {
        if forward {
            forward_rate(pair, r, t, m)
        } else {
            bond_price(pair, r, t, m)
        }
    })?;
    Ok(BondSurface { times: alloc::vec![0.0], maturities: maturities.to_vec(), values, level: SurfaceLevel::Initial })
}

/// `P(t, T)` (or `f(t, T)`) along one stored path.
pub fn path_surface(
    pair: &CurvePair,
    ensemble: &PathEnsemble,
    path: usize,
    times: &[f64],
    maturities: &[f64],
    forward: bool,
) -> Result<BondSurface> {
    if path >= ensemble.n_paths {
        return Err(domain!("path {path} out of range"));
    }
    let values = fill(times, maturities, |t, m| {
        let r = ensemble.path(path)[ensemble.time_index(t)?];
        if forward {
            forward_rate(pair, r, t, m)
        } else {
            bond_price(pair, r, t, m)
        }
    })?;
    Ok(BondSurface {
        times: times.to_vec(),
        maturities: maturities.to_vec(),
        values,
        level: SurfaceLevel::Path(path),
    })
}

/// Ensemble mean of `P̂(t, T)`.
pub fn discounted_expectation_surface(
    pair: &CurvePair,
    ensemble: &PathEnsemble,
    times: &[f64],
    maturities: &[f64],
) -> Result<BondSurface> {
    let values = fill(times, maturities, |t, m| {
        let mut sum = 0.0;
        for p in 0..ensemble.n_paths {
            sum += discounted_price_path(pair, ensemble, p, t, m)?;
        }
        Ok(sum / ensemble.n_paths as f64)
    })?;
    Ok(BondSurface {
        times: times.to_vec(),
        maturities: maturities.to_vec(),
        values,
        level: SurfaceLevel::Expectation,
    })
}
