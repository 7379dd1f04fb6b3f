//! Command-line front end.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use levy_ats_core::pricing::{discounted_expectation_surface, initial_surface};
use levy_ats_core::validate::{
    empirical_laplace_check, hjm_residual, integrated_hjm_report, levy_admissibility_check,
    model_admissibility_check,
};
use levy_ats_core::{CurvePair, MaturityGrid, ValidationReport};

use crate::config::{ExperimentConfig, Format, Overrides, PriceQuantity, PriceSource};
use crate::error::{CliError, Result};
use crate::manifest::Manifest;
use crate::{formats, parallel, report};

#[derive(Debug, Parser)]
#[command(name = "levy-ats", version, about = "Affine short-rate models with positive-jump Lévy noise")]
pub struct Cli {
    /// Experiment config (JSON), or a manifest from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output format for data files; overrides the config.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Solve the curves A, B on the maturity grid.
    Curve,
    /// Simulate short-rate paths.
    Simulate,
    /// Bond prices or forward rates on a (t, T) grid.
    Price,
    /// Functional-equation residual and its integrated form.
    ValidateHjm,
    /// Monte-Carlo test that discounted bond prices keep their mean.
    ValidateMc,
    /// Admissibility of the driving noise (and optionally its sampled law).
    CheckLevy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curve => "curve",
            Command::Simulate => "simulate",
            Command::Price => "price",
            Command::ValidateHjm => "validate-hjm",
            Command::ValidateMc => "validate-mc",
            Command::CheckLevy => "check-levy",
        }
    }
}

/// Whether the run's checks passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

struct Run {
    cfg: ExperimentConfig,
    dir: PathBuf,
    outputs: Vec<String>,
}

impl Run {
    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    fn grid(&self) -> Result<MaturityGrid> {
        Ok(MaturityGrid::uniform(self.cfg.grid.v_max, self.cfg.grid.nodes)?)
    }

    fn curves(&self) -> Result<CurvePair> {
        Ok(self.cfg.model.curves(&self.grid()?)?)
    }

    fn reports(&mut self, reports: &[ValidationReport]) -> Result<Verdict> {
        let text: Vec<String> = reports.iter().map(report::render).collect();
        let text = text.join("\n");
        print!("{text}");
        let json = self.path("report.json");
        formats::write_json(&json, reports)?;
        let txt = self.path("report.txt");
        formats::write_text(&txt, &text)?;
        Ok(if reports.iter().all(ValidationReport::passed) { Verdict::Pass } else { Verdict::Fail })
    }
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(&Overrides { seed: cli.seed, out: cli.out.clone(), threads: cli.threads, format: cli.format });
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Verdict> {
    let cfg = load_config(cli)?;
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut run = Run { cfg, dir, outputs: Vec::new() };
    let verdict = match cli.command {
        Command::Curve => curve(&mut run)?,
        Command::Simulate => simulate(&mut run)?,
        Command::Price => price(&mut run)?,
        Command::ValidateHjm => validate_hjm(&mut run)?,
        Command::ValidateMc => validate_mc(&mut run)?,
        Command::CheckLevy => check_levy(&mut run)?,
    };
    Manifest::new(cli.command.name(), &run.cfg, run.outputs.clone()).write(&run.dir)?;
    Ok(verdict)
}

fn curve(run: &mut Run) -> Result<Verdict> {
    let pair = run.curves()?;
    match run.cfg.output.format {
        Format::Csv => {
            let p = run.path("curves.csv");
            formats::write_curve_csv(&p, &pair)?
        }
        Format::Json => {
            let p = run.path("curves.json");
            formats::write_json(&p, &pair)?
        }
        Format::Bin => return Err(CliError::Usage("curves are written as csv or json".into())),
    }
    let last = pair.len() - 1;
    println!(
        "curves on {} nodes: A({v}) = {:.9e}, B({v}) = {:.9e}, node residual {:.2e}",
        pair.len(),
        pair.a[last],
        pair.b[last],
        pair.max_node_residual(),
        v = pair.grid.max()
    );
    Ok(Verdict::Pass)
}

fn simulate(run: &mut Run) -> Result<Verdict> {
    let s = run.cfg.simulation.clone();
    let pool = parallel::pool(run.cfg.threads)?;
    let ens = parallel::simulate(&pool, &run.cfg.model, s.horizon, s.steps, s.n_paths, run.cfg.seed)?;
    match run.cfg.output.format {
        Format::Csv => {
            let p = run.path("ensemble.csv");
            formats::write_ensemble_csv(&p, &ens)?
        }
        Format::Json => {
            let p = run.path("ensemble.json");
            formats::write_json(&p, &ens)?
        }
        Format::Bin => {
            let p = run.path("ensemble.bin");
            formats::write_ensemble_bin(&p, &ens)?
        }
    }
    let min = ens.rates.iter().copied().fold(f64::INFINITY, f64::min);
    println!(
        "{} paths x {} steps: min rate {min:.6e}, clamped steps {} ({:.3e})",
        ens.n_paths,
        s.steps,
        ens.clamps.clamped_steps,
        ens.clamps.fraction()
    );
    Ok(Verdict::Pass)
}

fn price(run: &mut Run) -> Result<Verdict> {
    let pair = run.curves()?;
    let p = run.cfg.price.clone();
    let forward = p.quantity == PriceQuantity::Forward;
    let surface = match p.source {
        PriceSource::Initial => initial_surface(&pair, p.rate.unwrap_or(run.cfg.model.x0), &p.maturities, forward)?,
        PriceSource::Ensemble => {
            if forward {
                return Err(CliError::Usage("ensemble averages are available for bond prices only".into()));
            }
            let s = run.cfg.simulation.clone();
            let pool = parallel::pool(run.cfg.threads)?;
            let ens = parallel::simulate(&pool, &run.cfg.model, s.horizon, s.steps, s.n_paths, run.cfg.seed)?;
            discounted_expectation_surface(&pair, &ens, &p.times, &p.maturities)?
        }
    };
    let column = if forward { "f" } else { "P" };
    match run.cfg.output.format {
        Format::Csv => {
            let path = run.path("surface.csv");
            formats::write_surface_csv(&path, &surface, column)?
        }
        Format::Json => {
            let path = run.path("surface.json");
            formats::write_json(&path, &surface)?
        }
        Format::Bin => return Err(CliError::Usage("surfaces are written as csv or json".into())),
    }
    for (t, m, v) in surface.entries() {
        println!("t={t:<8} T={m:<8} {column}={v:.9e}");
    }
    Ok(Verdict::Pass)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect(),
    }
}

fn validate_hjm(run: &mut Run) -> Result<Verdict> {
    let h = run.cfg.hjm.clone();
    if h.x_points == 0 || h.v_points == 0 {
        return Err(CliError::Usage("hjm grids need at least one point".into()));
    }
    let pair = run.curves()?;
    let model = match h.perturb_exponent {
        Some(e) => run.cfg.model.with_diffusion_exponent(e)?,
        None => run.cfg.model,
    };
    let xs = linspace(0.0, h.x_max, h.x_points);
    let vs = linspace(0.0, pair.grid.max(), h.v_points);
    let start = Instant::now();
    let mut pointwise = hjm_residual(&model, &pair, &xs, &vs)?;
    pointwise.runtime_secs = Some(start.elapsed().as_secs_f64());
    let mut reports = vec![pointwise];
    if h.integrated_points > 0 {
        let start = Instant::now();
        let rs = linspace(0.0, h.x_max, h.integrated_points);
        let ts = linspace(0.0, pair.grid.max(), h.integrated_points + 1)[1..].to_vec();
        let mut integrated = integrated_hjm_report(&model, &pair, &rs, &ts)?;
        integrated.runtime_secs = Some(start.elapsed().as_secs_f64());
        reports.push(integrated);
    }
    run.reports(&reports)
}

fn validate_mc(run: &mut Run) -> Result<Verdict> {
    let m = run.cfg.mc.clone();
    if m.checkpoints.is_empty() {
        return Err(CliError::Usage("mc.checkpoints must not be empty".into()));
    }
    let mut pair = run.curves()?;
    if m.level_drift != 0.0 {
        pair = pair.with_level_drift(m.level_drift);
    }
    let s = run.cfg.simulation.clone();
    let pool = parallel::pool(run.cfg.threads)?;
    let start = Instant::now();
    let mut rep = parallel::martingale_mc_test(
        &pool,
        &run.cfg.model,
        &pair,
        m.maturity,
        &m.checkpoints,
        s.n_paths as u64,
        s.steps,
        run.cfg.seed,
    )?;
    rep.runtime_secs = Some(start.elapsed().as_secs_f64());
    run.reports(&[rep])
}

fn check_levy(run: &mut Run) -> Result<Verdict> {
    let model = run.cfg.model;
    let mut reports = vec![model_admissibility_check(&model)];
    let mut noises: Vec<_> = model.noise.channels().to_vec();
    noises.extend(run.cfg.levy.noises.iter().copied());
    for z in run.cfg.levy.noises.iter() {
        reports.push(levy_admissibility_check(z));
    }
    if let Some(l) = run.cfg.levy.laplace.clone() {
        for z in &noises {
            let start = Instant::now();
            let mut rep = empirical_laplace_check(z, l.dt, l.n, &l.lambdas, l.resamples, run.cfg.seed)?;
            rep.runtime_secs = Some(start.elapsed().as_secs_f64());
            reports.push(rep);
        }
    }
    run.reports(&reports)
}

/// Parses arguments, runs, and maps the outcome to the exit status:
/// 0 pass, 1 validation failure, 2 usage or config error, 3 numerical failure.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(Verdict::Pass) => 0,
        Ok(Verdict::Fail) => 1,
        Err(e) => {
            eprintln!("levy-ats {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
