//! Validators of the martingale property and of the noise model.
//!
//! Two independent routes check that discounted bond prices are martingales:
//!
//! * analytically, through the functional equation
//!   `Σᵢ Jᵢ(Gᵢ(x) B(v)) = -A'(v) - (B'(v) - 1) x + B(v) F(x)` for `x ≥ 0`,
//!   `v ≥ 0` ([`hjm_residual`]), and its integrated drift/volatility form
//!   ([`integrated_hjm_check`]);
//! * statistically, by checking that the ensemble mean of `P̂(t, T)` stays at
//!   `P(0, T)` ([`martingale_mc_test`]). This tests constant expectation,
//!   which is implied by, but weaker than, the (local) martingale property.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curves::CurvePair;
use crate::error::domain;
use crate::levy::{LevyKind, LevyModel};
use crate::math;
use crate::pricing;
use crate::quad;
use crate::rng;
use crate::sde::{self, ClampReport, PathKernel, ShortRateModel};
use crate::{Error, Result};

/// Tolerance of the analytic residual checks.
pub const ANALYTIC_TOL: f64 = 1e-6;

/// Largest admissible `|z|` per checkpoint.
pub const Z_LIMIT: f64 = 3.0;

/// Absolute tolerance of each integral in [`integrated_hjm_check`].
pub const INTEGRATED_QUAD_TOL: f64 = 1e-11;

/// Paths per Monte-Carlo work unit. Fixed so that serial and parallel runs
/// add partial sums in the same order.
pub const MC_CHUNK: u64 = 4096;

/// Statement attached to every Monte-Carlo report.
pub const CONSTANT_EXPECTATION_NOTE: &str = "tests constant expectation of the discounted price, \
a consequence of the martingale property; a strictly local martingale with constant mean would pass";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// One named structural check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportDetails {
    /// Residuals row-major in `x`.
    Residual { x_grid: Vec<f64>, v_grid: Vec<f64>, residuals: Vec<f64> },
    MonteCarlo {
        maturity: f64,
        reference_price: f64,
        checkpoints: Vec<f64>,
        means: Vec<f64>,
        std_errors: Vec<f64>,
        z_scores: Vec<f64>,
        n_paths: u64,
        steps: usize,
        clamps: ClampReport,
        negative_values: u64,
    },
    Checks { items: Vec<CheckItem> },
    Statistics { labels: Vec<String>, values: Vec<f64> },
}

/// Outcome of a validator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub test: String,
    pub description: String,
    /// What `max_statistic` measures.
    pub statistic: String,
    pub max_statistic: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub runtime_secs: Option<f64>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub details: ReportDetails,
}

impl ValidationReport {
    fn new(
        test: &str,
        description: String,
        statistic: &str,
        max_statistic: f64,
        tolerance: f64,
        details: ReportDetails,
    ) -> Self {
        ValidationReport {
            test: test.to_string(),
            description,
            statistic: statistic.to_string(),
            max_statistic,
            tolerance,
            verdict: Verdict::from_bool(max_statistic <= tolerance),
            seed: None,
            runtime_secs: None,
            notes: Vec::new(),
            details,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// `|Σᵢ Jᵢ(Gᵢ(x) B) + A' + (B' - 1) x - B F(x)|` at one point.
pub fn functional_residual(model: &ShortRateModel, x: f64, b: f64, a_prime: f64, b_prime: f64) -> f64 {
    (model.exponent_of_exposure(x, b) + a_prime + (b_prime - 1.0) * x - b * model.drift(x)).abs()
}

/// Residual of the functional equation on `x_grid × v_grid`.
///
/// Curves are evaluated by dense re-integration, so `v_grid` need not lie on
/// curve nodes.
pub fn hjm_residual(
    model: &ShortRateModel,
    pair: &CurvePair,
    x_grid: &[f64],
    v_grid: &[f64],
) -> Result<ValidationReport> {
    if x_grid.iter().any(|&x| !(x >= 0.0)) {
        return Err(domain!("x grid must lie in [0, inf)"));
    }
    let points = v_grid.iter().map(|&v| pair.evaluate_dense(v)).collect::<Result<Vec<_>>>()?;
    let mut residuals = Vec::with_capacity(x_grid.len() * v_grid.len());
    for &x in x_grid {
        for p in &points {
            residuals.push(functional_residual(model, x, p.b, p.a_prime, p.b_prime));
        }
    }
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let max = if residuals.iter().any(|r| r.is_nan()) { f64::INFINITY } else { max };
    Ok(ValidationReport::new(
        "hjm_residual",
        format!("functional equation on {}x{} (x, v) grid", x_grid.len(), v_grid.len()),
        "max abs residual",
        max,
        ANALYTIC_TOL,
        ReportDetails::Residual { x_grid: x_grid.to_vec(), v_grid: v_grid.to_vec(), residuals },
    ))
}

/// `|∫ₜᵀ α(t,s) ds - Σᵢ Jᵢ(∫ₜᵀ σᵢ(t,s) ds)|` with both integrals computed by
/// adaptive quadrature of the HJM drift and volatilities.
pub fn integrated_hjm_check(model: &ShortRateModel, pair: &CurvePair, t: f64, maturity: f64, r: f64) -> Result<f64> {
    if !(maturity >= t) {
        return Err(domain!("need t <= T"));
    }
    if !(r >= 0.0) {
        return Err(domain!("short rate must be non-negative"));
    }
    if maturity == t {
        return Ok(0.0);
    }
    let span = maturity - t;
    pair.evaluate_dense(span)?;
    let mut failure: Option<Error> = None;
    let mut coeff = |s: f64| match pair.evaluate_dense(s - t) {
        Ok(p) => Some(pricing::hjm_coefficients(&p, &pair.dynamics, model, r)),
        Err(e) => {
            failure.get_or_insert(e);
            None
        }
    };
    let drift = quad::integrate(|s| coeff(s).map_or(f64::NAN, |c| c.drift), t, maturity, INTEGRATED_QUAD_TOL);
    let channels = model.noise.channels();
    let mut exponent = 0.0;
    for (i, z) in channels.iter().enumerate() {
        let vol = quad::integrate(|s| coeff(s).map_or(f64::NAN, |c| c.vols[i]), t, maturity, INTEGRATED_QUAD_TOL);
        exponent += z.exponent_unchecked(vol.value.max(0.0));
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((drift.value - exponent).abs())
}

/// [`integrated_hjm_check`] over `r_grid × v_grid` with `t = 0`, `T = v`.
pub fn integrated_hjm_report(
    model: &ShortRateModel,
    pair: &CurvePair,
    r_grid: &[f64],
    v_grid: &[f64],
) -> Result<ValidationReport> {
    let mut residuals = Vec::with_capacity(r_grid.len() * v_grid.len());
    for &r in r_grid {
        for &v in v_grid {
            residuals.push(integrated_hjm_check(model, pair, 0.0, v, r)?);
        }
    }
    let max = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ValidationReport::new(
        "integrated_hjm",
        format!("integrated drift vs exponent of integrated volatility on {}x{} grid", r_grid.len(), v_grid.len()),
        "max abs residual",
        max,
        ANALYTIC_TOL,
        ReportDetails::Residual { x_grid: r_grid.to_vec(), v_grid: v_grid.to_vec(), residuals },
    ))
}

/// Partial sums of a Monte-Carlo martingale run.
#[derive(Debug, Clone, PartialEq)]
pub struct McPartial {
    pub paths: u64,
    /// `Σ (P̂ - P(0,T))` per checkpoint.
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub clamps: ClampReport,
    pub negative_values: u64,
}

impl McPartial {
    fn empty(n: usize) -> Self {
        McPartial {
            paths: 0,
            sum: alloc::vec![0.0; n],
            sum_sq: alloc::vec![0.0; n],
            clamps: ClampReport::default(),
            negative_values: 0,
        }
    }

    pub fn merge(&mut self, other: &McPartial) {
        self.paths += other.paths;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.clamps.merge(&other.clamps);
        self.negative_values += other.negative_values;
    }
}

/// A prepared Monte-Carlo martingale test, runnable chunk by chunk.
#[derive(Debug, Clone)]
pub struct McPlan {
    kernel: PathKernel,
    checkpoints: Vec<f64>,
    indices: Vec<usize>,
    /// `(A(T - t), B(T - t))` per checkpoint.
    curve_at: Vec<(f64, f64)>,
    maturity: f64,
    reference: f64,
    n_paths: u64,
    seed: u64,
}

impl McPlan {
    pub fn new(
        model: &ShortRateModel,
        pair: &CurvePair,
        maturity: f64,
        checkpoints: &[f64],
        n_paths: u64,
        steps: usize,
        seed: u64,
    ) -> Result<Self> {
        if checkpoints.is_empty() {
            return Err(domain!("need at least one checkpoint"));
        }
        if n_paths < 2 {
            return Err(domain!("need at least two paths for a standard error"));
        }
        if checkpoints.iter().any(|&t| !(t >= 0.0 && t <= maturity)) {
            return Err(domain!("checkpoints must lie in [0, T]"));
        }
        let kernel = PathKernel::new(model, maturity, steps, seed)?;
        let indices =
            checkpoints.iter().map(|&t| sde::time_index(kernel.times(), t)).collect::<Result<Vec<_>>>()?;
        let curve_at = checkpoints
            .iter()
            .map(|&t| pair.evaluate(maturity - t).map(|p| (p.a, p.b)))
            .collect::<Result<Vec<_>>>()?;
        let reference = pricing::bond_price(pair, model.x0, 0.0, maturity)?;
        Ok(McPlan {
            kernel,
            checkpoints: checkpoints.to_vec(),
            indices,
            curve_at,
            maturity,
            reference,
            n_paths,
            seed,
        })
    }

    pub fn chunks(&self) -> u64 {
        self.n_paths.div_ceil(MC_CHUNK)
    }

    /// Simulates the paths of chunk `chunk`.
    pub fn run_chunk(&self, chunk: u64) -> McPartial {
        let start = chunk * MC_CHUNK;
        let end = (start + MC_CHUNK).min(self.n_paths);
        let mut part = McPartial::empty(self.checkpoints.len());
        part.paths = end.saturating_sub(start);
        let clamps = self.kernel.for_each_path(start..end, |_, rates, integrated| {
            part.negative_values += rates.iter().filter(|&&r| r < 0.0).count() as u64;
            for (j, (&k, &(a, b))) in self.indices.iter().zip(&self.curve_at).enumerate() {
                let d = math::exp(-a - b * rates[k] - integrated[k]) - self.reference;
                part.sum[j] += d;
                part.sum_sq[j] += d * d;
            }
        });
        part.clamps = clamps;
        part
    }

    /// Combines chunk results given in chunk order.
    pub fn finish(&self, parts: &[McPartial]) -> ValidationReport {
        let mut total = McPartial::empty(self.checkpoints.len());
        for p in parts {
            total.merge(p);
        }
        let n = total.paths as f64;
        let mut means = Vec::new();
        let mut ses = Vec::new();
        let mut zs = Vec::new();
        for j in 0..self.checkpoints.len() {
            let mean_d = total.sum[j] / n;
            let var = ((total.sum_sq[j] - n * mean_d * mean_d) / (n - 1.0)).max(0.0);
            let se = math::sqrt(var / n);
            let z = if se > 0.0 {
                mean_d / se
            } else if mean_d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            means.push(self.reference + mean_d);
            ses.push(se);
            zs.push(z);
        }
        let max_z = zs.iter().map(|z| z.abs()).fold(0.0, f64::max);
        let mut report = ValidationReport::new(
            "martingale_mc",
            format!(
                "mean of discounted bond price P^(t, {}) against P(0, {}) over {} paths, {} steps",
                self.maturity,
                self.maturity,
                total.paths,
                self.kernel.steps()
            ),
            "max |z|",
            max_z,
            Z_LIMIT,
            ReportDetails::MonteCarlo {
                maturity: self.maturity,
                reference_price: self.reference,
                checkpoints: self.checkpoints.clone(),
                means,
                std_errors: ses,
                z_scores: zs,
                n_paths: total.paths,
                steps: self.kernel.steps(),
                clamps: total.clamps,
                negative_values: total.negative_values,
            },
        );
        report.seed = Some(self.seed);
        report.notes.push(CONSTANT_EXPECTATION_NOTE.to_string());
        report.notes.push(format!(
            "each of {} checkpoints is tested two-sided at |z| <= {Z_LIMIT}; the family-wise false-alarm rate is \
             up to {} times the per-checkpoint rate of 0.27%",
            self.checkpoints.len(),
            self.checkpoints.len()
        ));
        report
    }
}

/// Monte-Carlo check that the mean of `P̂(t, T)` equals `P(0, T)` at each checkpoint.
pub fn martingale_mc_test(
    model: &ShortRateModel,
    pair: &CurvePair,
    maturity: f64,
    checkpoints: &[f64],
    n_paths: u64,
    steps: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let plan = McPlan::new(model, pair, maturity, checkpoints, n_paths, steps, seed)?;
    let parts: Vec<McPartial> = (0..plan.chunks()).map(|c| plan.run_chunk(c)).collect();
    Ok(plan.finish(&parts))
}

fn checks_report(test: &str, description: String, items: Vec<CheckItem>) -> ValidationReport {
    let failed = items.iter().filter(|c| !c.passed).count();
    ValidationReport::new(test, description, "failed checks", failed as f64, 0.0, ReportDetails::Checks { items })
}

fn item(name: &str, passed: bool, detail: String) -> CheckItem {
    CheckItem { name: name.to_string(), passed, detail }
}

/// Sequence used for the `J'(0+) = 0` check.
pub const DERIVATIVE_LIMIT_SEQUENCE: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Structural checks on the noise: positive jumps, finite exponent on
/// `[0, 10]`, and `J'(λ) → 0` as `λ ↓ 0`.
pub fn levy_admissibility_check(levy: &LevyModel) -> ValidationReport {
    let items = levy_items(levy, "");
    checks_report("levy_admissibility", format!("{:?} noise", levy.kind()), items)
}

fn levy_items(levy: &LevyModel, prefix: &str) -> Vec<CheckItem> {
    let mut items = Vec::new();
    let name = |s: &str| format!("{prefix}{s}");

    let support = levy.jump_support_min();
    let positive = support.is_none_or(|lo| lo >= 0.0);
    items.push(item(
        &name("positive_jump_support"),
        positive,
        match support {
            Some(lo) => format!("jump support starts at {lo}"),
            None => "no jumps".to_string(),
        },
    ));

    let grid: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&l| levy.exponent_unchecked(l)).collect();
    let finite = values.iter().all(|v| v.is_finite()) && values[0] == 0.0;
    items.push(item(
        &name("exponent_finite_on_0_10"),
        finite,
        format!("J(0) = {}, J(10) = {}", values[0], values[100]),
    ));

    let wiener_ok = levy.kind() == LevyKind::WienerUnit || levy.gaussian_q() == 0.0;
    items.push(item(&name("no_wiener_part"), wiener_ok, format!("q = {}", levy.gaussian_q())));

    let d: Vec<f64> = DERIVATIVE_LIMIT_SEQUENCE.iter().map(|&l| levy.exponent_derivative_unchecked(l)).collect();
    let decreasing = d.windows(2).all(|w| w[1] < w[0]) && d.iter().all(|&x| x >= 0.0);
    // J' ~ λ^p with p > 0 near the origin, read off the last two points
    let slope = math::ln(d[2] / d[1]) / math::ln(DERIVATIVE_LIMIT_SEQUENCE[2] / DERIVATIVE_LIMIT_SEQUENCE[1]);
    let mut limit_ok = decreasing && slope > 0.1 || d.iter().all(|&x| x == 0.0);
    let mut detail = format!("J'({:?}) = {:?}, log-log slope {slope:.3}", DERIVATIVE_LIMIT_SEQUENCE, d);
    if matches!(levy.kind(), LevyKind::StableMartingale | LevyKind::WienerUnit) {
        let (alpha, c) = (levy.alpha(), levy.c_alpha());
        let ratios: Vec<f64> =
            DERIVATIVE_LIMIT_SEQUENCE.iter().map(|&l| levy.exponent_unchecked(l) / l).collect();
        let bounded = DERIVATIVE_LIMIT_SEQUENCE
            .iter()
            .zip(&ratios)
            .all(|(&l, &q)| q.abs() < 10.0 * math::powf(l, alpha - 1.0) * c);
        let ratio_decreasing = ratios.windows(2).all(|w| w[1].abs() < w[0].abs());
        limit_ok &= bounded && ratio_decreasing;
        detail.push_str(&format!("; J(l)/l = {ratios:?}"));
    }
    items.push(item(&name("exponent_derivative_vanishes_at_0"), limit_ok, detail));

    if levy.kind() == LevyKind::CompoundPoissonMartingale {
        let mass = levy.mean_jump_mass();
        let ok = mass.as_ref().is_ok_and(|m| m.is_finite());
        items.push(item(&name("integrable_jumps"), ok, format!("int y nu(dy) = {mass:?}")));
    }
    items
}

/// [`levy_admissibility_check`] on every noise of `model`, plus the model's
/// own admissibility conditions.
pub fn model_admissibility_check(model: &ShortRateModel) -> ValidationReport {
    let mut items = Vec::new();
    let adm = model.check_admissible();
    items.push(item(
        "model_conditions",
        adm.is_ok(),
        match adm {
            Ok(()) => "drift, diffusion and noise are compatible".to_string(),
            Err(e) => e.to_string(),
        },
    ));
    for (i, z) in model.noise.channels().iter().enumerate() {
        items.extend(levy_items(z, &format!("noise{i}.")));
    }
    checks_report("model_admissibility", format!("{:?} diffusion", model.diffusion), items)
}

/// Bootstrap standard errors of `log(mean)` of each column of the row-major
/// `values` (`width` columns), with resampled rows shared between columns.
pub fn bootstrap_log_mean_se<R: Rng + ?Sized>(values: &[f64], width: usize, resamples: usize, rng: &mut R) -> Vec<f64> {
    let n = values.len() / width.max(1);
    let mut stats = alloc::vec![Vec::with_capacity(resamples); width];
    let mut sums = alloc::vec![0.0; width];
    for _ in 0..resamples {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for _ in 0..n {
            let i = rng.random_range(0..n);
            for (s, v) in sums.iter_mut().zip(&values[i * width..(i + 1) * width]) {
                *s += v;
            }
        }
        for (st, s) in stats.iter_mut().zip(&sums) {
            st.push(math::ln(s / n as f64));
        }
    }
    stats
        .iter()
        .map(|st| {
            let m = st.iter().sum::<f64>() / resamples as f64;
            math::sqrt(st.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (resamples as f64 - 1.0))
        })
        .collect()
}

/// Compares `log Ê[e^{-λ Z(dt)}]` with `dt·J(λ)` at each `λ`, in bootstrap
/// standard errors.
pub fn empirical_laplace_check(
    levy: &LevyModel,
    dt: f64,
    n: usize,
    lambdas: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if resamples < 2 {
        return Err(domain!("need at least two bootstrap resamples"));
    }
    let xs = levy.sample_increments(dt, n, seed)?;
    let width = lambdas.len();
    let rows: Vec<f64> = xs.iter().flat_map(|&x| lambdas.iter().map(move |&l| math::exp(-l * x))).collect();
    let ses = bootstrap_log_mean_se(&rows, width, resamples, &mut rng::stream(seed, rng::BOOTSTRAP_STREAM));
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut zmax: f64 = 0.0;
    for (j, (&l, se)) in lambdas.iter().zip(ses).enumerate() {
        let emp = math::ln(rows.iter().skip(j).step_by(width).sum::<f64>() / n as f64);
        let target = dt * levy.laplace_exponent(l)?;
        let z = (emp - target) / se;
        zmax = zmax.max(z.abs());
        labels.push(format!("lambda={l}: empirical"));
        values.push(emp);
        labels.push(format!("lambda={l}: exponent"));
        values.push(target);
        labels.push(format!("lambda={l}: bootstrap se"));
        values.push(se);
        labels.push(format!("lambda={l}: z"));
        values.push(z);
    }
    let mut report = ValidationReport::new(
        "empirical_laplace",
        format!("{n} increments over dt = {dt}, {resamples} bootstrap resamples"),
        "max |z|",
        zmax,
        Z_LIMIT,
        ReportDetails::Statistics { labels, values },
    );
    report.seed = Some(seed);
    Ok(report)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// KS critical value at significance 0.001 for samples of sizes `n`, `m`.
pub fn ks_critical(n: usize, m: usize) -> f64 {
    1.949 * math::sqrt((n + m) as f64 / (n as f64 * m as f64))
}

/// Checks that `Z(t)/t^{1/α}` has the same law for each `t` in `times`.
pub fn stable_scaling_check(levy: &LevyModel, times: &[f64], n: usize, seed: u64) -> Result<ValidationReport> {
    if !matches!(levy.kind(), LevyKind::StableMartingale | LevyKind::WienerUnit) {
        return Err(Error::UnsupportedModel("scaling check needs stable noise".to_string()));
    }
    if times.len() < 2 {
        return Err(domain!("need at least two times"));
    }
    let alpha = levy.alpha();
    let samples = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = math::powf(t, 1.0 / alpha);
            levy.sample_increments(t, n, seed.wrapping_add(i as u64))
                .map(|xs| xs.into_iter().map(|x| x / s).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut dmax: f64 = 0.0;
    for i in 1..samples.len() {
        let d = ks_distance(&samples[0], &samples[i]);
        dmax = dmax.max(d);
        labels.push(format!("KS(t={}, t={})", times[0], times[i]));
        values.push(d);
    }
    let mut report = ValidationReport::new(
        "stable_scaling",
        format!("KS distance of rescaled increments, n = {n} per time"),
        "max KS distance",
        dmax,
        ks_critical(n, n),
        ReportDetails::Statistics { labels, values },
    );
    report.seed = Some(seed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::MaturityGrid;
    use crate::levy::JumpLaw;

    fn grid() -> MaturityGrid {
        MaturityGrid::uniform(10.0, 512).unwrap()
    }

    #[test]
    fn residual_small_for_correct_model() {
        let m = ShortRateModel::stable(-0.5, 0.1, 0.2, 1.5, 0.05).unwrap();
        let pair = m.curves(&grid()).unwrap();
        let xs: Vec<f64> = (0..8).map(|k| 0.25 * k as f64).collect();
        let vs: Vec<f64> = (0..8).map(|k| 1.3 * k as f64).collect();
        let rep = hjm_residual(&m, &pair, &xs, &vs).unwrap();
        assert!(rep.passed(), "{}", rep.max_statistic);
    }

    #[test]
    fn residual_zero_on_x0_row_when_b_zero() {
        let m = ShortRateModel::stable(-0.5, 0.0, 0.2, 1.5, 0.05).unwrap();
        let pair = m.curves(&grid()).unwrap();
        let rep = hjm_residual(&m, &pair, &[0.0], &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(rep.max_statistic, 0.0);
    }

    #[test]
    fn perturbed_exponent_is_detected() {
        let m = ShortRateModel::stable(-0.5, 0.1, 0.2, 1.5, 0.05).unwrap();
        let pair = m.curves(&grid()).unwrap();
        let bad = m.with_diffusion_exponent(1.0 / 1.5 + 0.2).unwrap();
        let xs: Vec<f64> = (0..8).map(|k| 0.25 * k as f64).collect();
        let rep = hjm_residual(&bad, &pair, &xs, &[2.0, 5.0, 10.0]).unwrap();
        assert!(!rep.passed());
        assert!(rep.max_statistic >= 1e-2);
    }

    #[test]
    fn integrated_check_matches_pointwise() {
        let m = ShortRateModel::stable(-0.5, 0.1, 0.2, 1.5, 0.05).unwrap();
        let pair = m.curves(&grid()).unwrap();
        assert_eq!(integrated_hjm_check(&m, &pair, 1.0, 1.0, 0.3).unwrap(), 0.0);
        let bad = m.with_diffusion_exponent(1.0 / 1.5 + 0.2).unwrap();
        for (t, maturity, r) in [(0.0, 1.0, 0.05), (0.5, 3.7, 1.2), (2.0, 9.0, 0.6)] {
            let v = maturity - t;
            let p = pair.evaluate_dense(v).unwrap();
            for model in [&m, &bad] {
                let point = functional_residual(model, r, p.b, p.a_prime, p.b_prime);
                let integrated = integrated_hjm_check(model, &pair, t, maturity, r).unwrap();
                assert!((point - integrated).abs() <= 1e-8, "{point} vs {integrated}");
            }
        }
    }

    #[test]
    fn mc_trivial_checkpoint_and_errors() {
        let m = ShortRateModel::stable(-0.5, 0.1, 0.2, 1.5, 0.05).unwrap();
        let pair = m.curves(&grid()).unwrap();
        let rep = martingale_mc_test(&m, &pair, 1.0, &[0.0], 100, 16, 1).unwrap();
        let ReportDetails::MonteCarlo { means, reference_price, .. } = &rep.details else { panic!() };
        assert_eq!(means[0], *reference_price);
        assert!(rep.passed());
        assert!(martingale_mc_test(&m, &pair, 1.0, &[], 100, 16, 1).is_err());
        assert!(matches!(
            martingale_mc_test(&m, &pair, 1.0, &[0.3], 100, 16, 1),
            Err(Error::GridMismatch(_))
        ));
        let bad = ShortRateModel { drift_b: -0.1, ..m };
        assert!(matches!(
            martingale_mc_test(&bad, &pair, 1.0, &[0.5], 100, 16, 1),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn chunked_merge_is_order_stable() {
        let m = ShortRateModel::stable(-0.5, 0.1, 0.2, 1.5, 0.05).unwrap();
        let pair = m.curves(&grid()).unwrap();
        let plan = McPlan::new(&m, &pair, 1.0, &[0.5, 1.0], 10_000, 32, 5).unwrap();
        assert_eq!(plan.chunks(), 3);
        let parts: Vec<_> = (0..plan.chunks()).rev().map(|c| plan.run_chunk(c)).rev().collect();
        let direct = martingale_mc_test(&m, &pair, 1.0, &[0.5, 1.0], 10_000, 32, 5).unwrap();
        assert_eq!(plan.finish(&parts), direct);
    }

    #[test]
    fn admissibility_reports() {
        assert!(levy_admissibility_check(&LevyModel::stable(1.5).unwrap()).passed());
        assert!(levy_admissibility_check(&LevyModel::wiener()).passed());
        let cpp = LevyModel::compound_poisson(2.0, JumpLaw::Exponential { mean: 0.5 }).unwrap();
        assert!(levy_admissibility_check(&cpp).passed());
        let two_sided = LevyModel::compound_poisson_unchecked(1.0, JumpLaw::Uniform { low: -1.0, high: 1.0 });
        let rep = levy_admissibility_check(&two_sided);
        assert!(!rep.passed());
        let ReportDetails::Checks { items } = &rep.details else { panic!() };
        assert!(!items.iter().find(|c| c.name == "positive_jump_support").unwrap().passed);

        let model = ShortRateModel {
            drift_a: 0.0,
            drift_b: 0.9,
            x0: 0.0,
            diffusion: crate::sde::Diffusion::Constant { sigma: 1.0 },
            noise: crate::sde::Noise::Single(cpp),
        };
        let rep = model_admissibility_check(&model);
        assert!(!rep.passed());
        assert!(model_admissibility_check(&ShortRateModel { drift_b: 1.0, ..model }).passed());
    }

    #[test]
    fn ks_distance_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_distance(&a, &a), 0.0);
        assert_eq!(ks_distance(&a, &[10.0, 11.0]), 1.0);
        assert_eq!(ks_distance(&[1.0, 3.0], &[2.0, 4.0]), 0.5);
    }
}
