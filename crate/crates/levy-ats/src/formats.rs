//! File formats for curves, ensembles, surfaces and reports.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use levy_ats_core::pricing::BondSurface;
use levy_ats_core::{CurvePair, PathEnsemble};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Leading bytes of the binary ensemble format.
pub const ENSEMBLE_MAGIC: &[u8; 8] = b"LATSENS1";

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    finish(path, w)
}

/// `v,A,B,A_prime,B_prime`, ten significant digits.
pub fn write_curve_csv(path: &Path, pair: &CurvePair) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "v,A,B,A_prime,B_prime").map_err(io)?;
    for (k, v) in pair.grid.nodes().iter().enumerate() {
        writeln!(
            w,
            "{v:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            pair.a[k], pair.b[k], pair.a_prime[k], pair.b_prime[k]
        )
        .map_err(io)?;
    }
    finish(path, w)
}

/// Long format `path,t,rate,integrated_rate`.
pub fn write_ensemble_csv(path: &Path, ens: &PathEnsemble) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "path,t,rate,integrated_rate").map_err(io)?;
    for i in 0..ens.n_paths {
        for ((t, r), q) in ens.times.iter().zip(ens.path(i)).zip(ens.integrated_path(i)) {
            writeln!(w, "{i},{t:.9e},{r:.9e},{q:.9e}").map_err(io)?;
        }
    }
    finish(path, w)
}

/// `LATSENS1`, then `n_paths` and `n_times` as u64, then times, rates and
/// integrated rates as f64, all little-endian. Rates are row-major by path.
pub fn write_ensemble_bin(path: &Path, ens: &PathEnsemble) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    w.write_all(ENSEMBLE_MAGIC).map_err(io)?;
    w.write_all(&(ens.n_paths as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(ens.times.len() as u64).to_le_bytes()).map_err(io)?;
    for x in ens.times.iter().chain(&ens.rates).chain(&ens.integrated_rate) {
        w.write_all(&x.to_le_bytes()).map_err(io)?;
    }
    finish(path, w)
}

/// Contents of a binary ensemble file.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleData {
    pub n_paths: usize,
    pub times: Vec<f64>,
    pub rates: Vec<f64>,
    pub integrated_rate: Vec<f64>,
}

pub fn read_ensemble_bin(path: &Path) -> Result<EnsembleData> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    let bad = |m: &str| CliError::Config { path: path.to_path_buf(), message: m.to_string() };
    if bytes.len() < 24 || &bytes[..8] != ENSEMBLE_MAGIC {
        return Err(bad("not a binary ensemble file"));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let (n_paths, n_times) = (word(8) as usize, word(16) as usize);
    let total = n_times + 2 * n_paths * n_times;
    if bytes.len() != 24 + 8 * total {
        return Err(bad("binary ensemble file has the wrong length"));
    }
    let values: Vec<f64> =
        bytes[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let (times, rest) = values.split_at(n_times);
    let (rates, integrated) = rest.split_at(n_paths * n_times);
    Ok(EnsembleData {
        n_paths,
        times: times.to_vec(),
        rates: rates.to_vec(),
        integrated_rate: integrated.to_vec(),
    })
}

/// `t,T,<column>` for every entry with `T ≥ t`.
pub fn write_surface_csv(path: &Path, surface: &BondSurface, column: &str) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "t,T,{column}").map_err(io)?;
    for (t, m, p) in surface.entries() {
        writeln!(w, "{t:.9e},{m:.9e},{p:.9e}").map_err(io)?;
    }
    finish(path, w)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
