//! Run settings resolved from command-line flags, an optional `key = value`
//! config file, and built-in defaults, in that order of precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use resgraph::lsq::SolverConfig;
use resgraph::measurements::NoiseScale;
use resgraph::PenaltyConfig;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Gd,
    Cd,
    Convex,
    Exact,
    Tree,
    Ppr,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by the subcommands that run or configure a solver. Every
/// field is optional so that unset flags fall through to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct SolverFlags {
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Teleport probability of the personalized PageRank data.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated regularization values for the spectral start.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
}

/// Resolved solver settings, echoed into every metrics file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub solver: Solver,
    pub seed: u64,
    pub max_iters: usize,
    pub block_size: usize,
    pub alpha: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub rho_max: f64,
}

impl Settings {
    pub fn resolve(flags: &SolverFlags, file: &ConfigFile) -> Result<Self, Failure> {
        let solver = pick(flags.solver, file, "solver")?.unwrap_or(Solver::Gd);
        let block_default = if solver == Solver::Cd { 5000 } else { 0 };
        let iters_default = if solver == Solver::Cd {
            SolverConfig::block(1).max_iters
        } else {
            SolverConfig::default().max_iters
        };
        let lambda_grid = match flags
            .lambda_grid
            .clone()
            .or_else(|| file.get("lambda_grid").map(str::to_owned))
        {
            Some(text) => Some(parse_list(&text, "lambda_grid")?),
            None => None,
        };
        let settings = Self {
            solver,
            seed: pick(flags.seed, file, "seed")?.unwrap_or(0),
            max_iters: pick(flags.max_iters, file, "max_iters")?.unwrap_or(iters_default),
            block_size: pick(flags.block_size, file, "block_size")?.unwrap_or(block_default),
            alpha: pick(flags.alpha, file, "alpha")?,
            lambda_grid,
            rho_max: pick(flags.rho_max, file, "rho_max")?
                .unwrap_or(PenaltyConfig::default().rho_max),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<(), Failure> {
        match self.solver {
            Solver::Cd if self.block_size == 0 => {
                Err(Failure::usage("solver cd needs --block-size >= 1"))
            }
            Solver::Ppr if self.alpha.is_none() => Err(Failure::usage("solver ppr needs --alpha")),
            _ if self.alpha.is_some_and(|a| !(a > 0.0 && a <= 1.0)) => {
                Err(Failure::usage("--alpha must lie in (0, 1]"))
            }
            _ if !(self.rho_max > 0.0) => Err(Failure::usage("--rho-max must be positive")),
            _ => Ok(()),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let base = if self.solver == Solver::Cd {
            SolverConfig::block(self.block_size)
        } else {
            SolverConfig::default()
        };
        SolverConfig {
            max_iters: self.max_iters,
            block_size: self.block_size,
            lambda_grid: self.lambda_grid.clone(),
            seed: self.seed,
            ..base
        }
    }

    pub fn penalty_config(&self) -> PenaltyConfig {
        let defaults = PenaltyConfig::default();
        PenaltyConfig {
            rho_max: self.rho_max,
            inner: SolverConfig {
                max_iters: self.max_iters,
                seed: self.seed,
                ..defaults.inner.clone()
            },
            ..defaults
        }
    }
}

/// Measurement settings for `measure` and `experiment`.
#[derive(Debug, Clone, Default, Args)]
pub struct NoiseFlags {
    /// Relative noise level.
    #[arg(long)]
    pub sigma2: Option<String>,
    /// Whether sigma2 times the mean resistance is the noise variance or
    /// its standard deviation.
    #[arg(long, value_parser = parse_scale)]
    pub noise_scale: Option<NoiseScale>,
}

fn parse_scale(s: &str) -> Result<NoiseScale, String> {
    s.parse().map_err(|e: resgraph::Error| e.to_string())
}

pub fn scale_name(scale: NoiseScale) -> &'static str {
    match scale {
        NoiseScale::Variance => "variance",
        NoiseScale::StdDev => "stddev",
    }
}

/// Parsed `key = value` config file. Keys may use dashes or underscores.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Failure::usage(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().replace('-', "_");
            if values
                .insert(key.clone(), value.trim().to_owned())
                .is_some()
            {
                return Err(Failure::usage(format!(
                    "{}:{}: duplicate key {key}",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| Failure::usage(format!("config key {key}: {e}")))
            })
            .transpose()
    }
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, Failure>
where
    T::Err: fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.parsed(key),
    }
}

/// Comma-separated reals.
pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Failure::usage(format!("{what}: {t:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let file = ConfigFile::parse(
            "# run\nsolver = cd\nblock-size = 40\nseed=3\nlambda_grid = 0.1, 1\n",
            Path::new("cfg"),
        )
        .unwrap();
        let flags = SolverFlags {
            seed: Some(9),
            ..SolverFlags::default()
        };
        let s = Settings::resolve(&flags, &file).unwrap();
        assert_eq!(s.solver, Solver::Cd);
        assert_eq!(s.block_size, 40);
        assert_eq!(s.seed, 9);
        assert_eq!(s.lambda_grid, Some(vec![0.1, 1.0]));
        assert_eq!(s.solver_config().block_size, 40);
    }

    #[test]
    fn solver_specific_validation() {
        let empty = ConfigFile::default();
        let cd = SolverFlags {
            solver: Some(Solver::Cd),
            block_size: Some(0),
            ..SolverFlags::default()
        };
        assert!(Settings::resolve(&cd, &empty).is_err());
        let ppr = SolverFlags {
            solver: Some(Solver::Ppr),
            ..SolverFlags::default()
        };
        assert!(Settings::resolve(&ppr, &empty).is_err());
        assert!(ConfigFile::parse("solver\n", Path::new("c")).is_err());
        assert!(ConfigFile::parse("a=1\na=2\n", Path::new("c")).is_err());
        let bad = ConfigFile::parse("max_iters = many\n", Path::new("c")).unwrap();
        assert!(Settings::resolve(&SolverFlags::default(), &bad).is_err());
    }
}
