//! Experiment configuration files.
//!
//! A config is a JSON document with a `schema_version`. Command-line flags
//! override the matching fields. A run manifest is also accepted as a config,
//! in which case its embedded resolved config is used.

use std::path::{Path, PathBuf};

use levy_ats_core::{LevyModel, ShortRateModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Bin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ShortRateModel,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads; `None` lets the pool decide.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub hjm: HjmConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub price: PriceConfig,
    #[serde(default)]
    pub levy: LevyCheckConfig,
}

/// Maturity grid `[0, v_max]` with `nodes` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub v_max: f64,
    pub nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { v_max: 10.0, nodes: levy_ats_core::curves::DEFAULT_NODES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub horizon: f64,
    pub steps: usize,
    pub n_paths: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { horizon: 1.0, steps: 1024, n_paths: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), format: Format::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HjmConfig {
    pub x_max: f64,
    pub x_points: usize,
    pub v_points: usize,
    /// Points per axis of the integrated-form check; 0 skips it.
    pub integrated_points: usize,
    /// Diffusion exponent for a falsification run; the curves still come
    /// from the unperturbed model.
    pub perturb_exponent: Option<f64>,
}

impl Default for HjmConfig {
    fn default() -> Self {
        HjmConfig { x_max: 2.0, x_points: 64, v_points: 64, integrated_points: 8, perturb_exponent: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub maturity: f64,
    pub checkpoints: Vec<f64>,
    /// Adds `level_drift·v` to `A`; non-zero values make the test fail on purpose.
    pub level_drift: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { maturity: 1.0, checkpoints: vec![0.25, 0.5, 0.75, 1.0], level_drift: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceQuantity {
    #[default]
    Bond,
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceSource {
    /// `P(t, T)` at a fixed short rate.
    #[default]
    Initial,
    /// Ensemble mean of discounted prices.
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriceConfig {
    /// Short rate for `initial`; defaults to the model's `x0`.
    pub rate: Option<f64>,
    pub times: Vec<f64>,
    pub maturities: Vec<f64>,
    pub quantity: PriceQuantity,
    pub source: PriceSource,
}

impl Default for PriceConfig {
    fn default() -> Self {
        PriceConfig {
            rate: None,
            times: vec![0.0],
            maturities: vec![0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0],
            quantity: PriceQuantity::Bond,
            source: PriceSource::Initial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaplaceConfig {
    pub dt: f64,
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub resamples: usize,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        LaplaceConfig { dt: 1.0, n: 100_000, lambdas: vec![0.5, 1.0, 2.0], resamples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevyCheckConfig {
    /// Extra noises to check besides the model's own.
    pub noises: Vec<LevyModel>,
    pub laplace: Option<LaplaceConfig>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if let Some(t) = o.threads {
            self.threads = Some(t);
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
    }

    /// Parses a config, or the `config` member of a run manifest.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |e: serde_json::Error| CliError::Config { path: path.to_path_buf(), message: e.to_string() };
        let value: serde_json::Value = serde_json::from_str(text).map_err(err)?;
        let cfg: ExperimentConfig = match value.get("config") {
            Some(inner) if value.get("tool").is_some() => serde_json::from_value(inner.clone()).map_err(err)?,
            // re-parse from text so errors carry line and column
            _ => serde_json::from_str(text).map_err(err)?,
        };
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config {
                path: path.to_path_buf(),
                message: format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema_version": 1,
  "model": {
    "drift_a": -0.5, "drift_b": 0.1, "x0": 0.05,
    "diffusion": {"type": "power_law", "c": 0.2, "alpha": 1.5},
    "noise": {"kind": "stable", "alpha": 1.5}
  }
}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL, Path::new("m.json")).unwrap();
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.mc.checkpoints, vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cfg.model.x0, 0.05);
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::parse(MINIMAL, Path::new("m.json")).unwrap();
        cfg.threads = Some(3);
        cfg.hjm.perturb_exponent = Some(0.8666);
        cfg.levy.laplace = Some(LaplaceConfig::default());
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::parse(&text, Path::new("x")).unwrap(), cfg);
    }

    #[test]
    fn errors_point_at_the_line() {
        let bad = MINIMAL.replace("\"x0\": 0.05", "\"x0\": 0.05,\n \"bogus\": 1");
        let e = ExperimentConfig::parse(&bad, Path::new("m.json")).unwrap_err().to_string();
        assert!(e.contains("bogus") && e.contains("line 5"), "{e}");
        let missing = MINIMAL.replace("\"schema_version\": 1,", "");
        let e = ExperimentConfig::parse(&missing, Path::new("m.json")).unwrap_err().to_string();
        assert!(e.contains("schema_version"), "{e}");
        let future = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(ExperimentConfig::parse(&future, Path::new("m.json")).is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = ExperimentConfig::parse(MINIMAL, Path::new("m.json")).unwrap();
        cfg.apply(&Overrides { seed: Some(9), out: None, threads: Some(2), format: Some(Format::Bin) });
        assert_eq!((cfg.seed, cfg.threads, cfg.output.format), (9, Some(2), Format::Bin));
        assert_eq!(cfg.output.dir, PathBuf::from("out"));
    }
}
