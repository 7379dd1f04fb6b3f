//! Lévy martingales with positive jumps: Laplace exponents, jump measures and
//! increment samplers.
//!
//! The Laplace exponent `J` is defined by `E[exp(-λ Z(t))] = exp(t J(λ))`.
//! Three families are supported:
//!
//! * stable martingales with index `α ∈ (1, 2)` and Lévy measure
//!   `ν(dy) = y^{-1-α} dy` on `(0, ∞)`, for which `J(λ) = c_α λ^α` with
//!   `c_α = Γ(2 - α) / (α (α - 1))`;
//! * the standard Wiener process (`α = 2`), `J(λ) = λ²/2`;
//! * compensated compound-Poisson martingales with a positive jump law.

use alloc::string::String;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, Open01, Poisson, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::math;
use crate::quad;
use crate::rng;
use crate::{Error, Result};

/// Absolute tolerance for exponent quadrature on compound-Poisson models.
pub const EXPONENT_QUAD_TOL: f64 = 1e-10;

/// Noise family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevyKind {
    StableMartingale,
    WienerUnit,
    CompoundPoissonMartingale,
}

/// Law of a single jump. Every member is supported on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpLaw {
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// Point mass at `size`.
    Atom { size: f64 },
    /// Uniform on `[low, high]`.
    Uniform { low: f64, high: f64 },
}

impl JumpLaw {
    /// `E[Y]`.
    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::Exponential { mean } => mean,
            JumpLaw::Atom { size } => size,
            JumpLaw::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    /// Infimum of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            JumpLaw::Exponential { .. } => 0.0,
            JumpLaw::Atom { size } => size,
            JumpLaw::Uniform { low, .. } => low,
        }
    }

    /// `E[g(Y)]` by adaptive quadrature against the density (exact for the atom).
    fn expect<G: FnMut(f64) -> f64>(&self, mut g: G, abs_tol: f64) -> f64 {
        match *self {
            JumpLaw::Exponential { mean } => {
                let rate = 1.0 / mean;
                quad::integrate_to_infinity(|y| g(y) * rate * math::exp(-rate * y), 0.0, mean, abs_tol)
                    .value
            }
            JumpLaw::Atom { size } => g(size),
            JumpLaw::Uniform { low, high } => {
                let dens = 1.0 / (high - low);
                quad::integrate(|y| g(y) * dens, low, high, abs_tol).value
            }
        }
    }

    /// `E[Y; Y > 1]`.
    fn mean_above_one(&self) -> f64 {
        match *self {
            // ∫₁^∞ y e^{-y/μ}/μ dy = (1 + μ) e^{-1/μ}
            JumpLaw::Exponential { mean } => (1.0 + mean) * math::exp(-1.0 / mean),
            JumpLaw::Atom { size } => {
                if size > 1.0 {
                    size
                } else {
                    0.0
                }
            }
            JumpLaw::Uniform { low, high } => {
                let lo = low.max(1.0);
                if high <= lo {
                    0.0
                } else {
                    0.5 * (high * high - lo * lo) / (high - low)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpLaw::Exponential { mean } => mean.is_finite() && mean > 0.0,
            JumpLaw::Atom { size } => size.is_finite() && size > 0.0,
            JumpLaw::Uniform { low, high } => {
                low.is_finite() && high.is_finite() && low > 0.0 && high > low
            }
        };
        if ok {
            Ok(())
        } else {
            Err(domain!("jump law {self:?} must have finite parameters and support in (0, inf)"))
        }
    }
}

/// Compound-Poisson jump part: intensity times a jump law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundPoisson {
    pub intensity: f64,
    pub law: JumpLaw,
}

/// A Lévy martingale `Z` with `E Z(t) = 0`.
///
/// `drift_a` and `gaussian_q` are the linear and Gaussian coefficients of the
/// Lévy–Khintchine form of `J` with truncation function `1_{(-1,1)}`, i.e.
/// `J(λ) = -aλ + qλ²/2 + ∫(e^{-λy} - 1 + λy 1_{|y|<1}) ν(dy)`. For a
/// martingale `a = -∫_{y>1} y ν(dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevySpec", into = "LevySpec")]
pub struct LevyModel {
    kind: LevyKind,
    alpha: f64,
    c_alpha: f64,
    jumps: Option<CompoundPoisson>,
    drift_a: f64,
    gaussian_q: f64,
}

/// `c_α = Γ(2 - α) / (α (α - 1))` for `α ∈ (1, 2)`, and `1/2` at `α = 2`.
pub fn stable_coefficient(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(domain!("stable index {alpha} outside (1, 2]"));
    }
    if alpha == 2.0 {
        return Ok(0.5);
    }
    Ok(math::gamma(2.0 - alpha) / (alpha * (alpha - 1.0)))
}

impl LevyModel {
    /// Stable martingale with index `alpha`; `alpha = 2` gives the Wiener process.
    pub fn stable(alpha: f64) -> Result<Self> {
        let c_alpha = stable_coefficient(alpha)?;
        if alpha == 2.0 {
            return Ok(Self::wiener());
        }
        Ok(LevyModel {
            kind: LevyKind::StableMartingale,
            alpha,
            c_alpha,
            jumps: None,
            drift_a: -1.0 / (alpha - 1.0),
            gaussian_q: 0.0,
        })
    }

    /// Standard Wiener process, `J(λ) = λ²/2`.
    pub fn wiener() -> Self {
        LevyModel {
            kind: LevyKind::WienerUnit,
            alpha: 2.0,
            c_alpha: 0.5,
            jumps: None,
            drift_a: 0.0,
            gaussian_q: 1.0,
        }
    }

    /// Compensated compound-Poisson martingale.
    pub fn compound_poisson(intensity: f64, law: JumpLaw) -> Result<Self> {
        if !(intensity.is_finite() && intensity >= 0.0) {
            return Err(domain!("jump intensity {intensity} must be finite and non-negative"));
        }
        law.validate()?;
        Ok(Self::compound_poisson_unchecked(intensity, law))
    }

    /// Builds a compound-Poisson model without checking the jump law.
    ///
    /// Exists so admissibility checks can be exercised on laws the checked
    /// constructor refuses (for instance jumps with negative support).
    #[doc(hidden)]
    pub fn compound_poisson_unchecked(intensity: f64, law: JumpLaw) -> Self {
        LevyModel {
            kind: LevyKind::CompoundPoissonMartingale,
            alpha: 1.0,
            c_alpha: 0.0,
            jumps: Some(CompoundPoisson { intensity, law }),
            drift_a: -intensity * law.mean_above_one(),
            gaussian_q: 0.0,
        }
    }

    pub fn kind(&self) -> LevyKind {
        self.kind
    }

    /// Stable index; 2 for Wiener. Meaningless for compound-Poisson models.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn jumps(&self) -> Option<&CompoundPoisson> {
        self.jumps.as_ref()
    }

    pub fn drift_a(&self) -> f64 {
        self.drift_a
    }

    pub fn gaussian_q(&self) -> f64 {
        self.gaussian_q
    }

    /// Infimum of the support of the Lévy measure, `None` when there are no jumps.
    pub fn jump_support_min(&self) -> Option<f64> {
        match self.kind {
            LevyKind::StableMartingale => Some(0.0),
            LevyKind::WienerUnit => None,
            LevyKind::CompoundPoissonMartingale => {
                let cp = self.jumps?;
                if cp.intensity > 0.0 {
                    Some(cp.law.support_min())
                } else {
                    None
                }
            }
        }
    }

    /// `J(λ)` for `λ ≥ 0`.
    pub fn laplace_exponent(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(domain!("Laplace exponent needs lambda >= 0, got {lambda}"));
        }
        Ok(self.exponent_unchecked(lambda))
    }

    pub(crate) fn exponent_unchecked(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        match self.kind {
            LevyKind::StableMartingale => self.c_alpha * math::pow_pos(lambda, self.alpha),
            LevyKind::WienerUnit => 0.5 * self.gaussian_q * lambda * lambda,
            LevyKind::CompoundPoissonMartingale => {
                let Some(cp) = self.jumps else { return 0.0 };
                if cp.intensity == 0.0 {
                    return 0.0;
                }
                cp.intensity
                    * cp.law.expect(
                        |y| math::exp_m1(-lambda * y) + lambda * y,
                        EXPONENT_QUAD_TOL / cp.intensity,
                    )
            }
        }
    }

    /// `J'(λ)` for `λ > 0`.
    pub fn laplace_exponent_derivative(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(domain!("exponent derivative needs lambda > 0, got {lambda}"));
        }
        Ok(self.exponent_derivative_unchecked(lambda))
    }

    pub(crate) fn exponent_derivative_unchecked(&self, lambda: f64) -> f64 {
        match self.kind {
            LevyKind::StableMartingale => {
                self.alpha * self.c_alpha * math::pow_pos(lambda, self.alpha - 1.0)
            }
            LevyKind::WienerUnit => self.gaussian_q * lambda,
            LevyKind::CompoundPoissonMartingale => {
                let Some(cp) = self.jumps else { return 0.0 };
                if cp.intensity == 0.0 || lambda == 0.0 {
                    return 0.0;
                }
                cp.intensity
                    * cp.law.expect(|y| -y * math::exp_m1(-lambda * y), EXPONENT_QUAD_TOL / cp.intensity)
            }
        }
    }

    /// `∫₀^∞ y ν(dy)` for compound-Poisson models.
    pub fn mean_jump_mass(&self) -> Result<f64> {
        match (self.kind, self.jumps) {
            (LevyKind::CompoundPoissonMartingale, Some(cp)) => Ok(cp.intensity * cp.law.mean()),
            _ => Err(Error::UnsupportedModel(String::from(
                "mean jump mass is only defined for compound-Poisson noise",
            ))),
        }
    }

    /// Sampler for `Z(t + dt) - Z(t)`.
    pub fn increment_sampler(&self, dt: f64) -> Result<IncrementSampler> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(domain!("time step must be positive, got {dt}"));
        }
        let inner = match self.kind {
            LevyKind::WienerUnit => SamplerInner::Normal { sd: math::sqrt(self.gaussian_q * dt) },
            LevyKind::StableMartingale => {
                let alpha = self.alpha;
                // Totally skewed S_α(σ, 1, 0) has E e^{-λX} = exp(σ^α λ^α / |cos(πα/2)|).
                let cos_term = math::cos(FRAC_PI_2 * alpha).abs();
                let sigma = math::powf(self.c_alpha * cos_term, 1.0 / alpha);
                let zeta = math::tan(FRAC_PI_2 * alpha);
                SamplerInner::Stable {
                    scale: sigma * math::powf(dt, 1.0 / alpha),
                    alpha,
                    inv_alpha: 1.0 / alpha,
                    tail_exp: (1.0 - alpha) / alpha,
                    shift: math::atan(zeta) / alpha,
                    factor: math::powf(1.0 + zeta * zeta, 0.5 / alpha),
                }
            }
            LevyKind::CompoundPoissonMartingale => {
                let cp = self.jumps.ok_or_else(|| domain!("compound-Poisson model without jumps"))?;
                let rate = cp.intensity * dt;
                let count = if rate > 0.0 {
                    Some(Poisson::new(rate).map_err(|e| domain!("Poisson rate {rate}: {e}"))?)
                } else {
                    None
                };
                SamplerInner::CompoundPoisson {
                    count,
                    jump: JumpSampler::new(&cp.law)?,
                    compensator: cp.intensity * cp.law.mean() * dt,
                }
            }
        };
        Ok(IncrementSampler { inner })
    }

    /// `n` independent draws of `Z(dt)` from stream [`rng::INCREMENT_STREAM`] of `seed`.
    pub fn sample_increments(&self, dt: f64, n: usize, seed: u64) -> Result<alloc::vec::Vec<f64>> {
        if n == 0 {
            return Err(domain!("need at least one sample"));
        }
        let sampler = self.increment_sampler(dt)?;
        let mut rng = rng::stream(seed, rng::INCREMENT_STREAM);
        Ok((0..n).map(|_| sampler.sample(&mut rng)).collect())
    }
}

/// Draws increments of a [`LevyModel`] over a fixed time step.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    inner: SamplerInner,
}

#[derive(Debug, Clone)]
enum SamplerInner {
    Normal {
        sd: f64,
    },
    Stable {
        scale: f64,
        alpha: f64,
        inv_alpha: f64,
        tail_exp: f64,
        shift: f64,
        factor: f64,
    },
    CompoundPoisson {
        count: Option<Poisson<f64>>,
        jump: JumpSampler,
        compensator: f64,
    },
}

/// Draws single jumps from a [`JumpLaw`].
#[derive(Debug, Clone)]
pub enum JumpSampler {
    Exponential(Exp<f64>),
    Atom(f64),
    Uniform(Uniform<f64>),
}

impl JumpSampler {
    pub fn new(law: &JumpLaw) -> Result<Self> {
        Ok(match *law {
            JumpLaw::Exponential { mean } => JumpSampler::Exponential(
                Exp::new(1.0 / mean).map_err(|e| domain!("exponential jumps: {e}"))?,
            ),
            JumpLaw::Atom { size } => JumpSampler::Atom(size),
            JumpLaw::Uniform { low, high } => JumpSampler::Uniform(
                Uniform::new_inclusive(low, high).map_err(|e| domain!("uniform jumps: {e}"))?,
            ),
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpSampler::Exponential(d) => d.sample(rng),
            JumpSampler::Atom(s) => *s,
            JumpSampler::Uniform(d) => d.sample(rng),
        }
    }
}

impl IncrementSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            SamplerInner::Normal { sd } => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            SamplerInner::Stable { scale, alpha, inv_alpha, tail_exp, shift, factor } => {
                // Chambers–Mallows–Stuck for skewness 1, α ≠ 1.
                let u: f64 = Open01.sample(rng);
                let v = PI * (u - 0.5);
                let w: f64 = Exp1.sample(rng);
                let arg = alpha * (v + shift);
                let cos_v = math::cos(v);
                let log_mag = tail_exp * (math::ln(math::cos(v - arg)) - math::ln(w))
                    - inv_alpha * math::ln(cos_v);
                scale * factor * math::sin(arg) * math::exp(log_mag)
            }
            SamplerInner::CompoundPoisson { count, jump, compensator } => {
                let n = match count {
                    Some(p) => p.sample(rng) as u64,
                    None => 0,
                };
                let mut total = 0.0;
                for _ in 0..n {
                    total += jump.sample(rng);
                }
                total - compensator
            }
        }
    }
}

// JSON form: {"kind": "stable", "alpha": 1.5} | {"kind": "wiener"}
//          | {"kind": "cpp", "jump": {"family": "exp", "mean": 0.5, "intensity": 2.0}}
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevySpec {
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jump: Option<JumpSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Stable,
    Wiener,
    Cpp,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
enum JumpSpec {
    Exp { mean: f64, intensity: f64 },
    Atom { size: f64, intensity: f64 },
    Uniform { low: f64, high: f64, intensity: f64 },
}

impl TryFrom<LevySpec> for LevyModel {
    type Error = Error;

    fn try_from(spec: LevySpec) -> Result<Self> {
        match spec.kind {
            KindTag::Stable => {
                if spec.jump.is_some() {
                    return Err(domain!("stable noise takes no \"jump\" field"));
                }
                let alpha = spec.alpha.ok_or_else(|| domain!("stable noise needs \"alpha\""))?;
                LevyModel::stable(alpha)
            }
            KindTag::Wiener => {
                if spec.jump.is_some() || spec.alpha.is_some_and(|a| a != 2.0) {
                    return Err(domain!("wiener noise takes no \"jump\" and only alpha = 2"));
                }
                Ok(LevyModel::wiener())
            }
            KindTag::Cpp => {
                if spec.alpha.is_some() {
                    return Err(domain!("compound-Poisson noise takes no \"alpha\""));
                }
                let (intensity, law) = match spec.jump.ok_or_else(|| domain!("cpp noise needs \"jump\""))? {
                    JumpSpec::Exp { mean, intensity } => (intensity, JumpLaw::Exponential { mean }),
                    JumpSpec::Atom { size, intensity } => (intensity, JumpLaw::Atom { size }),
                    JumpSpec::Uniform { low, high, intensity } => {
                        (intensity, JumpLaw::Uniform { low, high })
                    }
                };
                LevyModel::compound_poisson(intensity, law)
            }
        }
    }
}

impl From<LevyModel> for LevySpec {
    fn from(m: LevyModel) -> Self {
        match m.kind {
            LevyKind::StableMartingale => {
                LevySpec { kind: KindTag::Stable, alpha: Some(m.alpha), jump: None }
            }
            LevyKind::WienerUnit => LevySpec { kind: KindTag::Wiener, alpha: None, jump: None },
            LevyKind::CompoundPoissonMartingale => {
                let cp = m.jumps.unwrap_or(CompoundPoisson {
                    intensity: 0.0,
                    law: JumpLaw::Atom { size: 1.0 },
                });
                let jump = match cp.law {
                    JumpLaw::Exponential { mean } => JumpSpec::Exp { mean, intensity: cp.intensity },
                    JumpLaw::Atom { size } => JumpSpec::Atom { size, intensity: cp.intensity },
                    JumpLaw::Uniform { low, high } => {
                        JumpSpec::Uniform { low, high, intensity: cp.intensity }
                    }
                };
                LevySpec { kind: KindTag::Cpp, alpha: None, jump: Some(jump) }
            }
        }
    }
}
