//! Run configuration: an optional TOML or JSON file, overridden by flags.

use std::path::{Path, PathBuf};

use clap::Args;
use mvphi_core::coeff::Params;
use mvphi_core::suites::{SuiteConfig, DEFAULT_GRID};
use serde::Deserialize;

use crate::CliError;

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Residue characteristic.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Degree of K over Q_p.
    #[arg(long, global = true)]
    pub f: Option<usize>,
    /// Degree of the residue field of E over F_p (a multiple of f).
    #[arg(long, global = true)]
    pub h: Option<usize>,
    /// pi-adic working precision N.
    #[arg(long, global = true)]
    pub prec: Option<u32>,
    /// Total-degree window M for power series.
    #[arg(long, global = true)]
    pub deg: Option<usize>,
    /// Bound on cross exponents.
    #[arg(long, global = true)]
    pub band: Option<i64>,
    /// Depth of p-power denominators for perfectoid exponents.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Relative Y_0-window used when inverting units.
    #[arg(long, global = true)]
    pub window: Option<i64>,
    /// Random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suite name for `check`; all suites when omitted.
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Write JSON here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML or JSON configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    p: Option<u64>,
    f: Option<usize>,
    h: Option<usize>,
    prec: Option<u32>,
    deg: Option<usize>,
    band: Option<i64>,
    depth: Option<u32>,
    window: Option<i64>,
    seed: Option<u64>,
    suite: Option<String>,
    out: Option<PathBuf>,
    grid: Option<Vec<(u64, usize, usize)>>,
}

/// Fully merged configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub point: Option<(u64, usize, usize)>,
    pub prec: u32,
    pub deg: usize,
    pub band: Option<i64>,
    pub depth: Option<u32>,
    pub window: Option<i64>,
    pub seed: u64,
    pub suite: Option<String>,
    pub out: Option<PathBuf>,
    pub grid: Option<Vec<(u64, usize, usize)>>,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let p = flags.p.or(file.p);
        let f = flags.f.or(file.f);
        let h = flags.h.or(file.h);
        let point = match (p, f, h) {
            (None, None, None) => None,
            (p, f, h) => {
                let f = f.unwrap_or(1);
                Some((p.unwrap_or(2), f, h.unwrap_or(f)))
            }
        };
        Ok(RunConfig {
            point,
            prec: flags.prec.or(file.prec).unwrap_or(3),
            deg: flags.deg.or(file.deg).unwrap_or(12),
            band: flags.band.or(file.band),
            depth: flags.depth.or(file.depth),
            window: flags.window.or(file.window),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            suite: flags.suite.clone().or(file.suite),
            out: flags.out.clone().or(file.out),
            grid: file.grid,
        })
    }

    /// Parameters for single computations; defaults to `p = 2, f = h = 1`.
    pub fn params(&self) -> Result<Params, CliError> {
        let (p, f, h) = self.point.unwrap_or((2, 1, 1));
        let mut params = Params::new(p, f, h, self.prec, self.deg)?;
        if let Some(b) = self.band {
            params.band = b;
        }
        if let Some(k) = self.depth {
            params.depth = k;
        }
        if let Some(w) = self.window {
            params.window = w;
        }
        params.validate()?;
        Ok(params)
    }

    /// Suite configuration: the selected point, the file grid, or the
    /// default grid.
    pub fn suite_config(&self) -> SuiteConfig {
        let grid = match (&self.point, &self.grid) {
            (Some(pt), _) => vec![*pt],
            (None, Some(g)) => g.clone(),
            (None, None) => DEFAULT_GRID.to_vec(),
        };
        SuiteConfig {
            grid,
            prec: self.prec,
            deg: self.deg,
            band: self.band,
            depth: self.depth,
            seed: self.seed,
        }
    }
}
