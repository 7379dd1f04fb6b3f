//! The curves `A`, `B` of the affine bond price `exp(-A(v) - B(v) r)`.
//!
//! Every in-scope model leads to an autonomous system in which both
//! derivatives are functions of `B` alone:
//!
//! ```text
//! B'(v) = 1 + a B(v) - K(B(v)),     K(B) = Σᵢ cᵢ c_{αᵢ} B^{αᵢ}
//! A'(v) = b B(v) - L(B(v)),         L(B) = J(σ B)   (constant volatility only)
//! ```
//!
//! with `A(0) = B(0) = 0`. The power terms come from stable diffusions
//! `G(x) = (c x)^{1/α}`; the `L` term from the constant-volatility model.

use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain, inadmissible};
use crate::levy::{self, LevyKind, LevyModel};
use crate::math;
use crate::ode::{DormandPrince, Tolerance};
use crate::quad;
use crate::{Error, Result};

/// Default number of maturity nodes.
pub const DEFAULT_NODES: usize = 512;

/// Absolute tolerance for the quadrature of `A'` in the constant-volatility model.
const LEVEL_QUAD_TOL: f64 = 1e-12;

/// Strictly increasing maturities starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MaturityGrid(Vec<f64>);

impl MaturityGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(domain!("maturity grid needs at least two nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(domain!("maturity grid must start at 0, starts at {}", nodes[0]));
        }
        if nodes.iter().any(|v| !v.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain!("maturity grid must be finite and strictly increasing"));
        }
        Ok(MaturityGrid(nodes))
    }

    /// `nodes` equally spaced points on `[0, v_max]`.
    pub fn uniform(v_max: f64, nodes: usize) -> Result<Self> {
        if !(v_max > 0.0 && v_max.is_finite()) || nodes < 2 {
            return Err(domain!("uniform grid needs v_max > 0 and at least two nodes"));
        }
        let n = nodes - 1;
        Self::new((0..=n).map(|k| if k == n { v_max } else { v_max * k as f64 / n as f64 }).collect())
    }

    /// Uniform grid over `[0, v_max]` with `segments · refine` intervals, so
    /// the coarse points `v_max·k/segments` are nodes.
    pub fn refined(v_max: f64, segments: usize, refine: usize) -> Result<Self> {
        Self::uniform(v_max, segments.max(1) * refine.max(1) + 1)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Index of the node equal to `v`, if any.
    pub fn node_index(&self, v: f64) -> Option<usize> {
        self.0.binary_search_by(|x| x.total_cmp(&v)).ok()
    }

    /// Index `k` with `v ∈ [v_k, v_{k+1}]`.
    pub fn interval(&self, v: f64) -> Result<usize> {
        if !(v >= 0.0 && v <= self.max()) {
            return Err(Error::Range { value: v, lo: 0.0, hi: self.max() });
        }
        let k = self.0.partition_point(|&x| x <= v);
        Ok(k.saturating_sub(1).min(self.0.len() - 2))
    }
}

impl TryFrom<Vec<f64>> for MaturityGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MaturityGrid::new(v)
    }
}

impl From<MaturityGrid> for Vec<f64> {
    fn from(g: MaturityGrid) -> Self {
        g.0
    }
}

/// One `c·c_α·B^α` contribution to `K(B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    /// Diffusion scale `c` in `G(x) = (c x)^{1/α}`.
    pub c: f64,
    pub alpha: f64,
    /// `c_α`.
    pub c_alpha: f64,
}

impl PowerTerm {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(domain!("diffusion scale c = {c} must be finite and non-negative"));
        }
        Ok(PowerTerm { c, alpha, c_alpha: levy::stable_coefficient(alpha)? })
    }

    #[inline]
    fn value(&self, b: f64) -> f64 {
        self.c * self.c_alpha * math::pow_pos(b, self.alpha)
    }

    #[inline]
    fn slope(&self, b: f64) -> f64 {
        self.c * self.c_alpha * self.alpha * math::pow_pos(b, self.alpha - 1.0)
    }
}

/// Right-hand side of the curve system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    pub a: f64,
    pub b: f64,
    pub power_terms: Vec<PowerTerm>,
    /// `(σ, Z)` for the constant-volatility model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_vol: Option<(f64, LevyModel)>,
}

impl Dynamics {
    /// `B'` as a function of `B`.
    #[inline]
    pub fn slope_rate(&self, b: f64) -> f64 {
        1.0 + self.a * b - self.power_terms.iter().map(|t| t.value(b)).sum::<f64>()
    }

    /// `A'` as a function of `B`.
    #[inline]
    pub fn level_rate(&self, b: f64) -> f64 {
        match &self.constant_vol {
            None => self.b * b,
            Some((sigma, z)) => self.b * b - z.exponent_unchecked(sigma * b),
        }
    }

    /// `d B'/dB`, so that `B'' = (d B'/dB) B'`.
    #[inline]
    pub fn slope_rate_derivative(&self, b: f64) -> f64 {
        self.a - self.power_terms.iter().map(|t| t.slope(b)).sum::<f64>()
    }

    /// `d A'/dB`, so that `A'' = (d A'/dB) B'`.
    #[inline]
    pub fn level_rate_derivative(&self, b: f64) -> f64 {
        match &self.constant_vol {
            None => self.b,
            Some((sigma, z)) => {
                let lam = sigma * b;
                let dj = if lam > 0.0 { z.exponent_derivative_unchecked(lam) } else { 0.0 };
                self.b - sigma * dj
            }
        }
    }

    /// Right-hand side for the state `(B, A, B')`.
    fn rhs(&self, y: &[f64; 3]) -> [f64; 3] {
        [self.slope_rate(y[0]), self.level_rate(y[0]), self.slope_rate_derivative(y[0]) * y[2]]
    }
}

/// Curves tabulated on a maturity grid.
///
/// `B'` is integrated as its own state through `B'' = (dB'/dB) B'`, so it
/// stays positive where `1 + aB - Σ c c_α B^α` cancels; `A'` is taken from
/// the system right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePair {
    pub grid: MaturityGrid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a_prime: Vec<f64>,
    pub b_prime: Vec<f64>,
    /// The system that produced the curves.
    pub dynamics: Dynamics,
}

/// `(A, B, A', B')` at one maturity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
}

impl CurvePoint {
    /// `(A'', B'')` from the system, given `(B, B')`.
    pub fn second_derivatives(&self, dynamics: &Dynamics) -> (f64, f64) {
        (
            dynamics.level_rate_derivative(self.b) * self.b_prime,
            dynamics.slope_rate_derivative(self.b) * self.b_prime,
        )
    }
}

/// Integrator settings for the curve systems.
pub const CURVE_TOLERANCE: Tolerance = Tolerance { rel: 1e-12, abs: 1e-14 };

fn curve_solver() -> DormandPrince {
    DormandPrince { tol: CURVE_TOLERANCE, ..DormandPrince::default() }
}

fn integrate_system(dynamics: Dynamics, grid: &MaturityGrid) -> Result<CurvePair> {
    let solver = curve_solver();
    let n = grid.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut b_prime = Vec::with_capacity(n);
    let mut y = [0.0, 0.0, 1.0];
    let mut step = 0.0;
    a.push(0.0);
    b.push(0.0);
    b_prime.push(1.0);
    for w in grid.nodes().windows(2) {
        y = solver.advance(|_, y| dynamics.rhs(y), w[0], y, w[1], &mut step)?;
        b.push(y[0]);
        a.push(y[1]);
        b_prime.push(y[2]);
    }
    Ok(finish(dynamics, grid.clone(), a, b, b_prime))
}

fn finish(dynamics: Dynamics, grid: MaturityGrid, a: Vec<f64>, b: Vec<f64>, b_prime: Vec<f64>) -> CurvePair {
    let a_prime = b.iter().map(|&x| dynamics.level_rate(x)).collect();
    CurvePair { grid, a, b, a_prime, b_prime, dynamics }
}

/// Curves of the stable model `dR = (aR + b) dt + (cR)^{1/α} dZ^α`:
/// `B' = -c c_α B^α + a B + 1`, `A' = b B`.
///
/// `c = 0` is accepted and switches the noise off.
pub fn solve_stable_riccati(a: f64, b: f64, c: f64, alpha: f64, grid: &MaturityGrid) -> Result<CurvePair> {
    if !(b >= 0.0) {
        return Err(domain!("drift intercept b = {b} must be non-negative"));
    }
    if !a.is_finite() {
        return Err(domain!("drift slope a must be finite"));
    }
    let term = PowerTerm::new(c, alpha)?;
    let power_terms = if c > 0.0 { alloc::vec![term] } else { Vec::new() };
    integrate_system(Dynamics { a, b, power_terms, constant_vol: None }, grid)
}

/// Curves of the two-noise model
/// `dR = (aR + b) dt + R^{1/α} dZ^α + R^{1/β} dZ^β`:
/// `B' = -c_α B^α - c_β B^β + a B + 1`, `A' = b B`.
pub fn solve_multi_noise_riccati(
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    grid: &MaturityGrid,
) -> Result<CurvePair> {
    solve_multi_noise_riccati_scaled(a, b, [(1.0, alpha), (1.0, beta)], grid)
}

/// As [`solve_multi_noise_riccati`] with per-noise diffusion scales
/// `G_i(x) = (c_i x)^{1/α_i}`; a zero scale drops that noise.
pub fn solve_multi_noise_riccati_scaled(
    a: f64,
    b: f64,
    noises: [(f64, f64); 2],
    grid: &MaturityGrid,
) -> Result<CurvePair> {
    if !(b >= 0.0) {
        return Err(domain!("drift intercept b = {b} must be non-negative"));
    }
    let mut power_terms = Vec::with_capacity(2);
    for (c, alpha) in noises {
        let t = PowerTerm::new(c, alpha)?;
        if c > 0.0 {
            power_terms.push(t);
        }
    }
    integrate_system(Dynamics { a, b, power_terms, constant_vol: None }, grid)
}

/// Curves of the constant-volatility model `dR = (aR + b) dt + σ dZ` with
/// compound-Poisson `Z`: `B = (e^{av} - 1)/a` and
/// `A' = B (b - σ ∫y ν) + ∫(1 - e^{-σBy}) ν(dy)`.
pub fn solve_constant_vol_curves(
    a: f64,
    b: f64,
    sigma: f64,
    noise: &LevyModel,
    grid: &MaturityGrid,
) -> Result<CurvePair> {
    if noise.kind() != LevyKind::CompoundPoissonMartingale {
        return Err(Error::UnsupportedModel(
            "constant-volatility curves need compound-Poisson noise".to_string(),
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain!("volatility sigma = {sigma} must be positive"));
    }
    let mass = noise.mean_jump_mass()?;
    if b < sigma * mass {
        return Err(inadmissible!(
            "drift intercept b = {b} is below sigma * int y nu(dy) = {}",
            sigma * mass
        ));
    }
    let dynamics = Dynamics { a, b, power_terms: Vec::new(), constant_vol: Some((sigma, *noise)) };
    let bs: Vec<f64> = grid.nodes().iter().map(|&v| linear_slope_curve(a, v)).collect();
    let mut acc = 0.0;
    let mut a_vals = Vec::with_capacity(grid.len());
    a_vals.push(0.0);
    for w in grid.nodes().windows(2) {
        let est = quad::integrate(
            |v| constant_vol_level_rate(b, sigma, mass, noise, linear_slope_curve(a, v)),
            w[0],
            w[1],
            LEVEL_QUAD_TOL,
        );
        if !est.converged || !est.value.is_finite() {
            return Err(Error::Solver { at: w[1], reason: "quadrature of A' did not converge".to_string() });
        }
        acc += est.value;
        a_vals.push(acc);
    }
    let b_prime = grid.nodes().iter().map(|&v| math::exp(a * v)).collect();
    let mut pair = finish(dynamics, grid.clone(), a_vals, bs, b_prime);
    // Same quantity as level_rate, written in the form with the non-negative integral term.
    for (ap, &bv) in pair.a_prime.iter_mut().zip(&pair.b) {
        *ap = constant_vol_level_rate(b, sigma, mass, noise, bv);
    }
    Ok(pair)
}

/// `(e^{av} - 1)/a`, or `v` when `a = 0`.
pub fn linear_slope_curve(a: f64, v: f64) -> f64 {
    if a == 0.0 {
        v
    } else {
        math::exp_m1(a * v) / a
    }
}

fn constant_vol_level_rate(b: f64, sigma: f64, mass: f64, noise: &LevyModel, bv: f64) -> f64 {
    let Some(cp) = noise.jumps() else { return b * bv };
    if cp.intensity == 0.0 || bv == 0.0 {
        return bv * (b - sigma * mass);
    }
    let lam = sigma * bv;
    let integral = cp.intensity * expect_law(&cp.law, |y| -math::exp_m1(-lam * y));
    bv * (b - sigma * mass) + integral
}

fn expect_law<G: FnMut(f64) -> f64>(law: &levy::JumpLaw, mut g: G) -> f64 {
    use levy::JumpLaw;
    match *law {
        JumpLaw::Exponential { mean } => {
            let rate = 1.0 / mean;
            quad::integrate_to_infinity(|y| g(y) * rate * math::exp(-rate * y), 0.0, mean, LEVEL_QUAD_TOL)
                .value
        }
        JumpLaw::Atom { size } => g(size),
        JumpLaw::Uniform { low, high } => {
            let dens = 1.0 / (high - low);
            quad::integrate(|y| g(y) * dens, low, high, LEVEL_QUAD_TOL).value
        }
    }
}

/// Fritsch–Carlson limited Hermite cubic on `[x0, x1]`.
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, mut d0: f64, mut d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let secant = (y1 - y0) / h;
    if secant == 0.0 {
        d0 = 0.0;
        d1 = 0.0;
    } else if d0 * secant >= 0.0 && d1 * secant >= 0.0 {
        let (r0, r1) = (d0 / secant, d1 / secant);
        let norm = r0 * r0 + r1 * r1;
        if norm > 9.0 {
            let tau = 3.0 / math::sqrt(norm);
            d0 *= tau;
            d1 *= tau;
        }
    }
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

impl CurvePair {
    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Values at node `k`.
    pub fn node(&self, k: usize) -> CurvePoint {
        CurvePoint { a: self.a[k], b: self.b[k], a_prime: self.a_prime[k], b_prime: self.b_prime[k] }
    }

    /// Curves at `v ∈ [0, v_max]` by monotone Hermite cubics.
    ///
    /// `A`, `B` use the stored first derivatives; `A'`, `B'` use second
    /// derivatives from the system. Grid nodes return the stored values.
    pub fn evaluate(&self, v: f64) -> Result<CurvePoint> {
        let k = self.grid.interval(v)?;
        let nodes = self.grid.nodes();
        let (x0, x1) = (nodes[k], nodes[k + 1]);
        if v == x0 {
            return Ok(self.node(k));
        }
        if v == x1 {
            return Ok(self.node(k + 1));
        }
        let p0 = self.node(k);
        let p1 = self.node(k + 1);
        let (a2_0, b2_0) = p0.second_derivatives(&self.dynamics);
        let (a2_1, b2_1) = p1.second_derivatives(&self.dynamics);
        Ok(CurvePoint {
            a: hermite(x0, x1, p0.a, p1.a, p0.a_prime, p1.a_prime, v),
            b: hermite(x0, x1, p0.b, p1.b, p0.b_prime, p1.b_prime, v),
            a_prime: hermite(x0, x1, p0.a_prime, p1.a_prime, a2_0, a2_1, v),
            b_prime: hermite(x0, x1, p0.b_prime, p1.b_prime, b2_0, b2_1, v),
        })
    }

    /// Curves at `v` by re-integrating the system from the nearest node at or
    /// below `v`. Accurate to the integrator tolerance anywhere on the grid.
    pub fn evaluate_dense(&self, v: f64) -> Result<CurvePoint> {
        let k = self.grid.interval(v)?;
        let x0 = self.grid.nodes()[k];
        if v == x0 {
            return Ok(self.node(k));
        }
        if let Some(j) = self.grid.node_index(v) {
            return Ok(self.node(j));
        }
        let mut step = 0.0;
        let y = curve_solver().advance(
            |_, y| self.dynamics.rhs(y),
            x0,
            [self.b[k], self.a[k], self.b_prime[k]],
            v,
            &mut step,
        )?;
        Ok(CurvePoint { a: y[1], b: y[0], a_prime: self.dynamics.level_rate(y[0]), b_prime: y[2] })
    }

    /// Adds `rate·v` to `A` (and `rate` to `A'`).
    ///
    /// Produces deliberately wrong curves for falsification experiments.
    pub fn with_level_drift(&self, rate: f64) -> CurvePair {
        let mut out = self.clone();
        for (k, &v) in self.grid.nodes().iter().enumerate() {
            out.a[k] += rate * v;
            out.a_prime[k] += rate;
        }
        out
    }

    /// Largest `|B' - rhs(B)| / max(1, |B'|)` and `|A' - rhs(B)|` over the
    /// nodes. Zero for `A'`; for `B'` it measures the integrator error.
    pub fn max_node_residual(&self) -> f64 {
        self.b
            .iter()
            .zip(&self.b_prime)
            .zip(&self.a_prime)
            .map(|((&b, &bp), &ap)| {
                let slope = (bp - self.dynamics.slope_rate(b)).abs() / bp.abs().max(1.0);
                slope.max((ap - self.dynamics.level_rate(b)).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Closed-form solution of B' = 1 + aB - (s/2) B², B(0) = 0, derived by
    /// factoring the quadratic: γ = √(a² + 2s).
    fn cir_b(a: f64, s: f64, v: f64) -> f64 {
        let g = (a * a + 2.0 * s).sqrt();
        let e = (g * v).exp_m1();
        2.0 * e / ((g - a) * e + 2.0 * g)
    }

    fn grid() -> MaturityGrid {
        MaturityGrid::uniform(10.0, DEFAULT_NODES).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(MaturityGrid::new(alloc::vec![0.0]).is_err());
        assert!(MaturityGrid::new(alloc::vec![0.1, 0.2]).is_err());
        assert!(MaturityGrid::new(alloc::vec![0.0, 0.2, 0.2]).is_err());
        let g = MaturityGrid::refined(10.0, 63, 8).unwrap();
        assert_eq!(g.len(), 505);
        assert_eq!(g.max(), 10.0);
        assert_eq!(g.interval(10.0).unwrap(), 503);
        assert_eq!(g.interval(0.0).unwrap(), 0);
        assert!(g.interval(10.01).is_err());
    }

    #[test]
    fn no_noise_no_drift_gives_identity_slope() {
        for alpha in [1.2, 1.5, 2.0] {
            let pair = solve_stable_riccati(0.0, 0.3, 0.0, alpha, &grid()).unwrap();
            for (v, b) in pair.grid.nodes().iter().zip(&pair.b) {
                assert_abs_diff_eq!(*b, *v, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn linear_case_matches_exponential_closed_form() {
        let pair = solve_stable_riccati(-0.5, 0.1, 0.0, 1.5, &grid()).unwrap();
        for (v, b) in pair.grid.nodes().iter().zip(&pair.b) {
            assert_relative_eq!(*b, 2.0 * (1.0 - (-0.5 * *v).exp()), epsilon = 1e-11);
        }
        // A = b ∫₀ᵛ B = b (2v - 4(1 - e^{-v/2}))
        let v: f64 = 10.0;
        let a_exact = 0.1 * (2.0 * v - 4.0 * (1.0 - (-0.5 * v).exp()));
        assert_relative_eq!(*pair.a.last().unwrap(), a_exact, max_relative = 1e-10);
    }

    #[test]
    fn cir_closed_form() {
        let pair = solve_stable_riccati(-0.5, 0.1, 0.04, 2.0, &grid()).unwrap();
        for (v, b) in pair.grid.nodes().iter().zip(&pair.b).skip(1) {
            assert_relative_eq!(*b, cir_b(-0.5, 0.04, *v), max_relative = 1e-8);
        }
    }

    #[test]
    fn cir_closed_form_against_fixed_step_rk4() {
        // Second, independent integrator: classical RK4 with h = 1e-4.
        let (a, s) = (-0.5, 0.04);
        let f = |b: f64| 1.0 + a * b - 0.5 * s * b * b;
        let h = 1e-4;
        let mut b = 0.0;
        for _ in 0..10_000 {
            let k1 = f(b);
            let k2 = f(b + 0.5 * h * k1);
            let k3 = f(b + 0.5 * h * k2);
            let k4 = f(b + h * k3);
            b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert_relative_eq!(b, cir_b(a, s, 1.0), max_relative = 1e-12);
    }

    #[test]
    fn boundary_conditions() {
        let pair = solve_stable_riccati(0.7, 0.2, 0.5, 1.3, &grid()).unwrap();
        let p = pair.evaluate(0.0).unwrap();
        assert_eq!((p.a, p.b, p.a_prime, p.b_prime), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn node_residual_is_at_solver_tolerance() {
        let pair = solve_stable_riccati(-1.0, 0.4, 0.8, 1.25, &grid()).unwrap();
        assert!(pair.max_node_residual() < 1e-8);
    }

    #[test]
    fn evaluate_is_exact_at_nodes_and_close_between() {
        let pair = solve_stable_riccati(-0.5, 0.1, 0.0, 1.5, &grid()).unwrap();
        for k in [0usize, 1, 100, 511] {
            let v = pair.grid.nodes()[k];
            let p = pair.evaluate(v).unwrap();
            assert_eq!(p.b.to_bits(), pair.b[k].to_bits());
            assert_eq!(p.a_prime.to_bits(), pair.a_prime[k].to_bits());
        }
        let p = pair.evaluate(1.0).unwrap();
        assert_relative_eq!(p.b, 0.786_938_681, max_relative = 1e-9);
        assert_relative_eq!(p.b_prime, (-0.5f64).exp(), max_relative = 1e-9);
        assert!(pair.evaluate(10.5).is_err());
        assert!(pair.evaluate(-0.1).is_err());
    }

    #[test]
    fn dense_evaluation_tracks_closed_form() {
        let pair = solve_stable_riccati(-0.5, 0.04, 0.04, 2.0, &grid()).unwrap();
        for v in [0.003, 0.5, 1.2345, 7.77] {
            let p = pair.evaluate_dense(v).unwrap();
            assert_relative_eq!(p.b, cir_b(-0.5, 0.04, v), max_relative = 1e-9);
        }
    }

    #[test]
    fn multi_noise_reduces_to_single() {
        let g = grid();
        let multi = solve_multi_noise_riccati(-0.4, 0.1, 2.0, 2.0, &g).unwrap();
        let single = solve_stable_riccati(-0.4, 0.1, 2.0, 2.0, &g).unwrap();
        for k in 0..g.len() {
            assert_relative_eq!(multi.b[k], single.b[k], max_relative = 1e-9);
        }
        let dropped = solve_multi_noise_riccati_scaled(-0.4, 0.1, [(0.3, 1.5), (0.0, 1.75)], &g).unwrap();
        let single = solve_stable_riccati(-0.4, 0.1, 0.3, 1.5, &g).unwrap();
        for k in 0..g.len() {
            assert_abs_diff_eq!(dropped.b[k], single.b[k], epsilon = 1e-10);
            assert_abs_diff_eq!(dropped.a[k], single.a[k], epsilon = 1e-10);
        }
        let zero_b = solve_multi_noise_riccati(-0.4, 0.0, 1.5, 1.75, &g).unwrap();
        assert!(zero_b.a.iter().all(|&x| x == 0.0));
        let none = solve_multi_noise_riccati_scaled(0.0, 0.0, [(0.0, 1.5), (0.0, 1.75)], &g).unwrap();
        for (v, b) in g.nodes().iter().zip(&none.b) {
            assert_abs_diff_eq!(*b, *v, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_vol_curves() {
        let g = grid();
        let z = LevyModel::compound_poisson(2.0, levy::JumpLaw::Exponential { mean: 0.5 }).unwrap();
        // boundary case b = σ∫yν: A' = λ_P μB/(1+μB)
        let pair = solve_constant_vol_curves(0.0, 1.0, 1.0, &z, &g).unwrap();
        let p = pair.evaluate_dense(1.0).unwrap();
        assert_relative_eq!(p.b, 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(p.a_prime, 2.0 / 3.0, epsilon = 1e-6);
        for (b, ap) in pair.b.iter().zip(&pair.a_prime) {
            let closed = 2.0 * 0.5 * b / (1.0 + 0.5 * b);
            assert_abs_diff_eq!(*ap, closed, epsilon = 1e-10);
            assert!(*ap >= 0.0);
        }
        // A = ∫ 2·0.5v/(1+0.5v) dv = 2(v - 2 ln(1 + v/2))
        let v = 10.0;
        assert_abs_diff_eq!(*pair.a.last().unwrap(), 2.0 * (v - 2.0 * (1.0 + v / 2.0f64).ln()), epsilon = 1e-9);
        assert_eq!(pair.a_prime[0], 0.0);
        assert_eq!(pair.b_prime[0], 1.0);

        let none = LevyModel::compound_poisson(0.0, levy::JumpLaw::Exponential { mean: 0.5 }).unwrap();
        let pair = solve_constant_vol_curves(0.0, 0.3, 2.0, &none, &g).unwrap();
        for (v, (b, ap)) in g.nodes().iter().zip(pair.b.iter().zip(&pair.a_prime)) {
            assert_eq!(*b, *v);
            assert_abs_diff_eq!(*ap, 0.3 * v, epsilon = 1e-15);
        }

        assert!(matches!(
            solve_constant_vol_curves(0.0, 0.9, 1.0, &z, &g),
            Err(Error::Inadmissible(_))
        ));
        assert!(matches!(
            solve_constant_vol_curves(0.0, 0.9, 1.0, &LevyModel::stable(1.5).unwrap(), &g),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn a_shape_is_monotone_for_admissible_parameters() {
        let pair = solve_stable_riccati(1.5, 0.5, 0.05, 1.8, &grid()).unwrap();
        assert!(pair.b.windows(2).all(|w| w[1] >= w[0]));
        assert!(pair.a.windows(2).all(|w| w[1] >= w[0]));
        assert!(pair.b_prime.iter().all(|&d| d > 0.0));
    }
}
