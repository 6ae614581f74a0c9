//! Command-line flags and the JSON configuration file they override.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "confine", version, about = "Confined semiclassical eigenvalues and tunneling shifts")]
pub struct Cli {
    /// JSON file with default values for any flag (flags take precedence).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps and oracle tables (0 = all cores, 1 = sequential).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the standing assumptions on a potential and domain.
    Validate {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Sample points per side.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Confinement shift at one h against its leading-order prediction.
    Shift {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Mode index m (0 = ground state).
        #[arg(long)]
        m: Option<u32>,
        /// Semiclassical parameter h > 0.
        #[arg(long)]
        h: Option<f64>,
        /// Also compute the finite-difference eigenvalue.
        #[arg(long)]
        oracle: bool,
        /// Finite-difference grid points (at least 200, default 2000).
        #[arg(long = "grid-n")]
        grid_n: Option<usize>,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Shift reports over a geometric h grid with an empirical order fit.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Mode index m (0 = ground state).
        #[arg(long)]
        m: Option<u32>,
        /// start,stop,count
        #[arg(long = "h-grid")]
        h_grid: Option<String>,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Confined hydrogen levels over a list of box radii.
    Hydrogen {
        /// Principal quantum number n ≥ 1.
        #[arg(long)]
        n: Option<u32>,
        /// Angular momentum l ≤ n − 1.
        #[arg(long)]
        ell: Option<u32>,
        /// Nuclear charge.
        #[arg(long = "Z")]
        z: Option<f64>,
        /// Semiclassical parameter h > 0.
        #[arg(long)]
        h: Option<f64>,
        /// Comma-separated radii.
        #[arg(long = "R-grid")]
        r_grid: Option<String>,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Shooting against extrapolated finite differences for the lowest modes.
    Oracle {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Semiclassical parameter h > 0.
        #[arg(long)]
        h: Option<f64>,
        /// Finite-difference grid points (at least 200, default 2000).
        #[arg(long = "grid-n")]
        grid_n: Option<usize>,
        /// Number of lowest modes to compare (default 3).
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug, Default)]
pub struct ProblemArgs {
    /// Built-in name (harmonic, quartic(c), hydrogen-effective(Z, l)) or expression in x.
    #[arg(long)]
    pub potential: Option<String>,
    /// Expression in x, never interpreted as a built-in name.
    #[arg(long = "potential-expr")]
    pub potential_expr: Option<String>,
    /// Interval a,b for the line problem.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Box radius L for the radial problem.
    #[arg(long = "box")]
    pub box_length: Option<f64>,
    /// Angular index ν ≥ 0 for the radial problem.
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct ToleranceArgs {
    /// Integrator relative tolerance (default 1e-12).
    #[arg(long = "integrate-tol")]
    pub integrate_tol: Option<f64>,
    /// Newton tolerance relative to h (default 1e-10).
    #[arg(long = "newton-tol")]
    pub newton_tol: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// Write the JSON document here ("-" for standard output).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write CSV rows here ("-" for standard output).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Contents of `--config`. Every key is optional and mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub potential: Option<String>,
    pub potential_expr: Option<String>,
    pub domain: Option<String>,
    #[serde(rename = "box")]
    pub box_length: Option<f64>,
    pub nu: Option<f64>,
    pub m: Option<u32>,
    pub h: Option<f64>,
    pub h_grid: Option<String>,
    #[serde(rename = "R-grid")]
    pub r_grid: Option<String>,
    pub n: Option<u32>,
    pub ell: Option<u32>,
    #[serde(rename = "Z")]
    pub z: Option<f64>,
    pub grid_n: Option<usize>,
    pub count: Option<usize>,
    pub samples: Option<usize>,
    pub oracle: Option<bool>,
    pub jobs: Option<usize>,
    pub integrate_tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flag value, else config value.
pub fn pick<T>(flag: Option<T>, config: Option<T>) -> Option<T> {
    flag.or(config)
}

/// Flag value, else config value, else a usage error naming the flag.
pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T, CliError> {
    pick(flag, config).ok_or_else(|| CliError::Usage(format!("missing required --{name}")))
}

pub fn parse_list(text: &str, name: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Usage(format!("--{name} expects comma-separated numbers, got {text:?}"))),
    }
}
