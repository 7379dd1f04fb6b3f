//! Short-rate models `dR = (aR + b) dt + Σᵢ Gᵢ(R⁻) dZᵢ` and their simulation.
//!
//! The scheme is explicit with full truncation: the diffusion coefficients
//! are evaluated at `max(R, 0)` and a negative post-step state is clamped to
//! zero, each clamp being counted. The linear drift is integrated exactly over
//! a step (`R e^{aΔ} + b (e^{aΔ} - 1)/a`), which keeps the noise-free model on
//! its closed-form path and the scheme's mean on the exact mean.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{self, CurvePair, MaturityGrid};
use crate::error::{domain, inadmissible};
use crate::levy::{IncrementSampler, LevyKind, LevyModel};
use crate::math;
use crate::rng;
use crate::{Error, Result};

/// Diffusion coefficient `G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diffusion {
    /// `G(x) = (c x)^{1/α}`; `c = 0` switches the noise off.
    PowerLaw { c: f64, alpha: f64 },
    /// `G(x) = σ`.
    Constant { sigma: f64 },
    /// `G₁(x) = x^{1/α}`, `G₂(x) = x^{1/β}` on two independent stable noises.
    MultiStable { alpha: f64, beta: f64 },
    /// `G(x) = scale · x^exponent`. Only admissible when `exponent = 1/α`;
    /// other exponents exist for falsification experiments.
    Power { scale: f64, exponent: f64 },
}

/// Driving noise: one Lévy martingale, or two independent ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Noise {
    Single(LevyModel),
    Pair([LevyModel; 2]),
}

impl Noise {
    pub fn channels(&self) -> &[LevyModel] {
        match self {
            Noise::Single(z) => core::slice::from_ref(z),
            Noise::Pair(zs) => zs,
        }
    }
}

/// Short-rate model with affine drift `F(x) = a x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShortRateModel {
    pub drift_a: f64,
    pub drift_b: f64,
    pub x0: f64,
    pub diffusion: Diffusion,
    pub noise: Noise,
}

impl ShortRateModel {
    /// `dR = (aR + b) dt + (cR)^{1/α} dZ^α`.
    pub fn stable(a: f64, b: f64, c: f64, alpha: f64, x0: f64) -> Result<Self> {
        let m = ShortRateModel {
            drift_a: a,
            drift_b: b,
            x0,
            diffusion: Diffusion::PowerLaw { c, alpha },
            noise: Noise::Single(LevyModel::stable(alpha)?),
        };
        m.check_admissible()?;
        Ok(m)
    }

    /// `dR = (aR + b) dt + σ dZ` with compound-Poisson `Z`.
    pub fn constant_vol(a: f64, b: f64, sigma: f64, noise: LevyModel, x0: f64) -> Result<Self> {
        let m = ShortRateModel {
            drift_a: a,
            drift_b: b,
            x0,
            diffusion: Diffusion::Constant { sigma },
            noise: Noise::Single(noise),
        };
        m.check_admissible()?;
        Ok(m)
    }

    /// `dR = (aR + b) dt + R^{1/α} dZ^α + R^{1/β} dZ^β`.
    pub fn multi_stable(a: f64, b: f64, alpha: f64, beta: f64, x0: f64) -> Result<Self> {
        let m = ShortRateModel {
            drift_a: a,
            drift_b: b,
            x0,
            diffusion: Diffusion::MultiStable { alpha, beta },
            noise: Noise::Pair([LevyModel::stable(alpha)?, LevyModel::stable(beta)?]),
        };
        m.check_admissible()?;
        Ok(m)
    }

    /// Same model with the diffusion exponent replaced by `exponent`, keeping
    /// `G(1)`. Used to falsify the functional equation.
    pub fn with_diffusion_exponent(&self, exponent: f64) -> Result<Self> {
        let Diffusion::PowerLaw { c, alpha } = self.diffusion else {
            return Err(Error::UnsupportedModel("exponent perturbation needs a power-law diffusion".to_string()));
        };
        Ok(ShortRateModel {
            diffusion: Diffusion::Power { scale: math::powf(c, 1.0 / alpha), exponent },
            ..*self
        })
    }

    /// `F(x) = a x + b`.
    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        self.drift_a * x + self.drift_b
    }

    /// `Gᵢ(x)` for noise channel `i`, evaluated at `max(x, 0)`.
    #[inline]
    pub fn diffusion_value(&self, channel: usize, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.diffusion {
            Diffusion::PowerLaw { c, alpha } => math::pow_pos(c * x, 1.0 / alpha),
            Diffusion::Constant { sigma } => sigma,
            Diffusion::MultiStable { alpha, beta } => {
                let idx = if channel == 0 { alpha } else { beta };
                math::pow_pos(x, 1.0 / idx)
            }
            Diffusion::Power { scale, exponent } => scale * math::pow_pos(x, exponent),
        }
    }

    /// Sum over channels of `Jᵢ(Gᵢ(x) · u)`.
    pub fn exponent_of_exposure(&self, x: f64, u: f64) -> f64 {
        self.noise
            .channels()
            .iter()
            .enumerate()
            .map(|(i, z)| z.exponent_unchecked(self.diffusion_value(i, x) * u))
            .sum()
    }

    /// Checks the conditions under which the model has the martingale
    /// property and non-negative solutions.
    pub fn check_admissible(&self) -> Result<()> {
        if !(self.x0 >= 0.0 && self.x0.is_finite()) {
            return Err(domain!("initial short rate x0 = {} must be finite and non-negative", self.x0));
        }
        if !(self.drift_a.is_finite() && self.drift_b.is_finite()) {
            return Err(domain!("drift coefficients must be finite"));
        }
        if self.drift_b < 0.0 {
            return Err(inadmissible!("drift intercept b = {} must be non-negative", self.drift_b));
        }
        let chans = self.noise.channels();
        match self.diffusion {
            Diffusion::PowerLaw { c, alpha } => {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(domain!("diffusion scale c = {c} must be finite and non-negative"));
                }
                let [z] = chans else {
                    return Err(inadmissible!("power-law diffusion takes a single noise"));
                };
                check_stable_index(z, alpha)?;
            }
            Diffusion::Constant { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(domain!("volatility sigma = {sigma} must be positive"));
                }
                let [z] = chans else {
                    return Err(inadmissible!("constant diffusion takes a single noise"));
                };
                if z.kind() != LevyKind::CompoundPoissonMartingale {
                    return Err(inadmissible!(
                        "constant diffusion needs pure-jump noise without a Wiener part"
                    ));
                }
                if let Some(lo) = z.jump_support_min() {
                    if lo < 0.0 {
                        return Err(inadmissible!("jump support starts at {lo} < 0"));
                    }
                }
                let mass = z.mean_jump_mass()?;
                if self.drift_b < sigma * mass {
                    return Err(inadmissible!(
                        "drift intercept b = {} is below sigma * int y nu(dy) = {}",
                        self.drift_b,
                        sigma * mass
                    ));
                }
            }
            Diffusion::MultiStable { alpha, beta } => {
                let [z1, z2] = chans else {
                    return Err(inadmissible!("two-noise diffusion takes a pair of noises"));
                };
                check_stable_index(z1, alpha)?;
                check_stable_index(z2, beta)?;
            }
            Diffusion::Power { scale, exponent } => {
                let [z] = chans else {
                    return Err(inadmissible!("power diffusion takes a single noise"));
                };
                if !matches!(z.kind(), LevyKind::StableMartingale | LevyKind::WienerUnit) {
                    return Err(inadmissible!("power diffusion needs stable noise"));
                }
                if scale < 0.0 || (exponent - 1.0 / z.alpha()).abs() > 1e-12 {
                    return Err(inadmissible!(
                        "diffusion exponent {exponent} differs from 1/alpha = {}",
                        1.0 / z.alpha()
                    ));
                }
            }
        }
        Ok(())
    }

    /// Curves `A`, `B` of the bond price for this model.
    pub fn curves(&self, grid: &MaturityGrid) -> Result<CurvePair> {
        self.check_admissible()?;
        let (a, b) = (self.drift_a, self.drift_b);
        match self.diffusion {
            Diffusion::PowerLaw { c, alpha } => curves::solve_stable_riccati(a, b, c, alpha, grid),
            Diffusion::Constant { sigma } => {
                curves::solve_constant_vol_curves(a, b, sigma, &self.noise.channels()[0], grid)
            }
            Diffusion::MultiStable { alpha, beta } => {
                curves::solve_multi_noise_riccati(a, b, alpha, beta, grid)
            }
            Diffusion::Power { scale, exponent } => {
                let alpha = 1.0 / exponent;
                curves::solve_stable_riccati(a, b, math::powf(scale, alpha), alpha, grid)
            }
        }
    }

    /// `E R(t) = x0 e^{at} + b (e^{at} - 1)/a` (`b t` when `a = 0`).
    pub fn mean_rate(&self, t: f64) -> f64 {
        self.x0 * math::exp(self.drift_a * t) + self.drift_b * curves::linear_slope_curve(self.drift_a, t)
    }
}

fn check_stable_index(z: &LevyModel, alpha: f64) -> Result<()> {
    let ok = match z.kind() {
        LevyKind::StableMartingale => z.alpha() == alpha,
        LevyKind::WienerUnit => alpha == 2.0,
        LevyKind::CompoundPoissonMartingale => false,
    };
    if ok {
        Ok(())
    } else {
        Err(inadmissible!("diffusion index {alpha} needs stable noise of the same index"))
    }
}

/// Per-step simulator of one path, shared by stored and streaming runs.
#[derive(Debug, Clone)]
pub struct PathKernel {
    model: ShortRateModel,
    times: Vec<f64>,
    decay: f64,
    drift_step: f64,
    samplers: Vec<IncrementSampler>,
    master_seed: u64,
}

/// Clamp statistics of one or more paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClampReport {
    pub clamped_steps: u64,
    pub total_steps: u64,
    /// Largest `|R|` of a negative pre-clamp state.
    pub max_negative_excursion: f64,
}

impl ClampReport {
    pub fn fraction(&self) -> f64 {
        if self.total_steps == 0 {
            0.0
        } else {
            self.clamped_steps as f64 / self.total_steps as f64
        }
    }

    pub fn merge(&mut self, other: &ClampReport) {
        self.clamped_steps += other.clamped_steps;
        self.total_steps += other.total_steps;
        self.max_negative_excursion = self.max_negative_excursion.max(other.max_negative_excursion);
    }
}

impl PathKernel {
    pub fn new(model: &ShortRateModel, horizon: f64, steps: usize, master_seed: u64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain!("horizon must be positive, got {horizon}"));
        }
        if steps == 0 {
            return Err(domain!("need at least one time step"));
        }
        model.check_admissible()?;
        let dt = horizon / steps as f64;
        let times = (0..=steps).map(|k| if k == steps { horizon } else { k as f64 * dt }).collect();
        let samplers = model
            .noise
            .channels()
            .iter()
            .map(|z| z.increment_sampler(dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(PathKernel {
            model: *model,
            times,
            decay: math::exp(model.drift_a * dt),
            drift_step: model.drift_b * curves::linear_slope_curve(model.drift_a, dt),
            samplers,
            master_seed,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Simulates path `index` into `rates` and `integrated` (each of length
    /// `steps + 1`) and returns its clamp statistics.
    pub fn run(&self, index: u64, rates: &mut [f64], integrated: &mut [f64]) -> ClampReport {
        let mut rng = rng::path(self.master_seed, index);
        self.run_with(&mut rng, rates, integrated)
    }

    fn run_with<R: Rng + ?Sized>(&self, rng: &mut R, rates: &mut [f64], integrated: &mut [f64]) -> ClampReport {
        let n = self.times.len();
        debug_assert!(rates.len() >= n && integrated.len() >= n);
        let mut report = ClampReport { total_steps: (n - 1) as u64, ..Default::default() };
        let mut r = self.model.x0;
        let mut acc = 0.0;
        rates[0] = r;
        integrated[0] = 0.0;
        for k in 1..n {
            let mut next = r * self.decay + self.drift_step;
            for (i, s) in self.samplers.iter().enumerate() {
                let g = self.model.diffusion_value(i, r);
                let dz = s.sample(rng);
                if g != 0.0 {
                    next += g * dz;
                }
            }
            if next < 0.0 {
                report.clamped_steps += 1;
                report.max_negative_excursion = report.max_negative_excursion.max(-next);
                next = 0.0;
            }
            acc += 0.5 * (r + next) * (self.times[k] - self.times[k - 1]);
            r = next;
            rates[k] = r;
            integrated[k] = acc;
        }
        report
    }

    /// Runs paths `range` in order, handing each to `visit`.
    pub fn for_each_path<F>(&self, range: Range<u64>, mut visit: F) -> ClampReport
    where
        F: FnMut(u64, &[f64], &[f64]),
    {
        let n = self.times.len();
        let mut rates = alloc::vec![0.0; n];
        let mut integrated = alloc::vec![0.0; n];
        let mut total = ClampReport::default();
        for i in range {
            let rep = self.run(i, &mut rates, &mut integrated);
            total.merge(&rep);
            visit(i, &rates, &integrated);
        }
        total
    }
}

/// Stored simulation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    pub n_paths: usize,
    /// Row-major `n_paths × times.len()`.
    pub rates: Vec<f64>,
    /// `∫₀ᵗ R ds` by the trapezoid rule, same layout as `rates`.
    pub integrated_rate: Vec<f64>,
    pub master_seed: u64,
    /// Path `i` used stream `rng::PATH_STREAM_BASE + path_streams[i]`.
    pub path_streams: Vec<u64>,
    pub clamps: ClampReport,
    pub model: ShortRateModel,
}

impl PathEnsemble {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let n = self.n_times();
        &self.rates[i * n..(i + 1) * n]
    }

    pub fn integrated_path(&self, i: usize) -> &[f64] {
        let n = self.n_times();
        &self.integrated_rate[i * n..(i + 1) * n]
    }

    /// Index of the time node equal to `t` (within 1e-12 relative).
    pub fn time_index(&self, t: f64) -> Result<usize> {
        time_index(&self.times, t)
    }
}

pub(crate) fn time_index(times: &[f64], t: f64) -> Result<usize> {
    let horizon = times[times.len() - 1];
    let tol = 1e-12 * horizon.max(1.0);
    let k = times.partition_point(|&x| x < t - tol);
    if k < times.len() && (times[k] - t).abs() <= tol {
        Ok(k)
    } else {
        Err(Error::GridMismatch(alloc::format!("t = {t} is not a node of the simulation grid")))
    }
}

/// Simulates `n_paths` paths of `model` over `[0, horizon]` with `steps` steps.
pub fn simulate(
    model: &ShortRateModel,
    horizon: f64,
    steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(domain!("need at least one path"));
    }
    let kernel = PathKernel::new(model, horizon, steps, seed)?;
    let n = kernel.times().len();
    let mut rates = alloc::vec![0.0; n * n_paths];
    let mut integrated = alloc::vec![0.0; n * n_paths];
    let mut clamps = ClampReport::default();
    for (i, (r, q)) in rates.chunks_mut(n).zip(integrated.chunks_mut(n)).enumerate() {
        clamps.merge(&kernel.run(i as u64, r, q));
    }
    Ok(PathEnsemble {
        times: kernel.times().to_vec(),
        n_paths,
        rates,
        integrated_rate: integrated,
        master_seed: seed,
        path_streams: (0..n_paths as u64).collect(),
        clamps,
        model: *model,
    })
}

/// Clamp statistics of a stored ensemble.
pub fn clamp_report(ensemble: &PathEnsemble) -> ClampReport {
    ensemble.clamps
}
