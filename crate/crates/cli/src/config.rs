//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::Args;
use hencky_core::convexity::Axis;
use hencky_core::MaterialParams;
use serde::Deserialize;

use crate::CliError;

/// Keys accepted in a `--config` file. Flags given on the command line win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub mu: Option<f64>,
    pub kappa: Option<f64>,
    pub k: Option<f64>,
    pub khat: Option<f64>,
    pub m: Option<u32>,
    pub grid: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub dim: Option<usize>,
    pub method: Option<String>,
    pub k_list: Option<Vec<f64>>,
    pub khat_list: Option<Vec<f64>>,
    pub q_list: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub points: Option<usize>,
    pub trials: Option<usize>,
    pub energy: Option<String>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub affine: Option<Vec<f64>>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file with default values for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub khat: Option<f64>,
    /// Exponent of the volumetric term
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// lo:hi:count[:log|lin]
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Prefix for output files
    #[arg(long, global = true)]
    pub out: Option<String>,
}

/// Flags and file merged.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: FileConfig,
    pub params: MaterialParams,
    pub grid: Option<Axis>,
    pub seed: u64,
    pub out: Option<String>,
}

pub fn resolve(c: &Common) -> Result<Resolved, CliError> {
    let file = FileConfig::load(c.config.as_deref())?;
    let d = MaterialParams::default();
    let params = MaterialParams::new(
        c.mu.or(file.mu).unwrap_or(d.mu),
        c.kappa.or(file.kappa).unwrap_or(d.kappa),
        c.k.or(file.k).unwrap_or(d.k),
        c.khat.or(file.khat).unwrap_or(d.khat),
        c.m.or(file.m).unwrap_or(d.m),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let grid = match c.grid.clone().or(file.grid.clone()) {
        Some(s) => Some(s.parse::<Axis>().map_err(|e| CliError::Config(format!("--grid: {e}")))?),
        None => None,
    };
    Ok(Resolved {
        seed: c.seed.or(file.seed).unwrap_or(1),
        out: c.out.clone().or(file.out.clone()),
        file,
        params,
        grid,
    })
}

impl Resolved {
    /// Output path for `name` under the prefix (default `out/`).
    pub fn path(&self, name: &str) -> PathBuf {
        let prefix = self.out.clone().unwrap_or_else(|| "out/".to_string());
        PathBuf::from(format!("{prefix}{}", sanitize(name)))
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.=,@".contains(c) { c } else { '_' })
        .collect()
}

/// Parses `a,b,c`; entries may be fractions such as `1/3`.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| parse_number(t.trim())).collect()
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            Ok(a / b)
        }
        None => s.parse().map_err(|_| format!("bad number '{s}'")),
    }
}
