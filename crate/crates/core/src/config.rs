//! Run configuration files.
//!
//! A configuration is a TOML table with the keys below; unknown keys are
//! rejected. Rates are given either as the four explicit rates or as the
//! symmetric shorthand `rho`, which sets `λa = λb = rho` and `μa = μb = 1`.
//!
//! ```toml
//! N = 500
//! n = 5
//! rho = 0.8
//! p0 = 250
//! events = 100000
//! seed = 1
//! runs = 100
//! max_lag = 50
//! output_dir = "out"
//! rho_grid = [0.1, 0.8, 1.0, 1.2, 6.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::EnsembleConfig;
use crate::model::ModelParams;

pub const DEFAULT_GRID_SIZE: usize = 500;
pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_P0: usize = 250;
pub const DEFAULT_EVENTS: usize = 100_000;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_MAX_LAG: usize = 50;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] crate::error::Error),
}

/// Raw contents of a configuration file (or of command-line overrides).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(rename = "N")]
    pub grid_size: Option<usize>,
    #[serde(rename = "n")]
    pub window: Option<usize>,
    pub lambda_a: Option<f64>,
    pub lambda_b: Option<f64>,
    pub mu_a: Option<f64>,
    pub mu_b: Option<f64>,
    pub rho: Option<f64>,
    pub p0: Option<usize>,
    pub events: Option<usize>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub max_lag: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub rho_grid: Option<Vec<f64>>,
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Keys set in `overrides` replace those in `self`. Setting `rho`
    /// clears explicit rates from the file and vice versa.
    pub fn merge(mut self, overrides: RunConfigFile) -> RunConfigFile {
        let explicit_rates = overrides.lambda_a.is_some()
            || overrides.lambda_b.is_some()
            || overrides.mu_a.is_some()
            || overrides.mu_b.is_some();
        if overrides.rho.is_some() {
            self.lambda_a = None;
            self.lambda_b = None;
            self.mu_a = None;
            self.mu_b = None;
        }
        if explicit_rates {
            self.rho = None;
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if overrides.$field.is_some() { self.$field = overrides.$field; })*
            };
        }
        take!(
            grid_size, window, lambda_a, lambda_b, mu_a, mu_b, rho, p0, events, seed, runs,
            max_lag, output_dir, rho_grid
        );
        self
    }

    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let explicit = [self.lambda_a, self.lambda_b, self.mu_a, self.mu_b];
        let given = explicit.iter().filter(|r| r.is_some()).count();
        let rates = match (self.rho, given) {
            (Some(_), 1..) => {
                return Err(ConfigError::Invalid(
                    "give either rho or explicit rates, not both".into(),
                ))
            }
            (Some(rho), 0) => Some(Rates {
                lambda_a: rho,
                lambda_b: rho,
                mu_a: 1.0,
                mu_b: 1.0,
            }),
            (None, 0) => None,
            (None, 4) => Some(Rates {
                lambda_a: explicit[0].unwrap(),
                lambda_b: explicit[1].unwrap(),
                mu_a: explicit[2].unwrap(),
                mu_b: explicit[3].unwrap(),
            }),
            (None, _) => {
                return Err(ConfigError::Invalid(
                    "explicit rates need all of lambda_a, lambda_b, mu_a, mu_b".into(),
                ))
            }
        };
        let config = RunConfig {
            grid_size: self.grid_size.unwrap_or(DEFAULT_GRID_SIZE),
            window: self.window.unwrap_or(DEFAULT_WINDOW),
            p0: self.p0.unwrap_or(DEFAULT_P0),
            rates,
            events: self.events.unwrap_or(DEFAULT_EVENTS),
            seed: self.seed.unwrap_or(0),
            runs: self.runs.unwrap_or(DEFAULT_RUNS),
            max_lag: self.max_lag.unwrap_or(DEFAULT_MAX_LAG),
            output_dir: self
                .output_dir
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            rho_grid: self.rho_grid,
        };
        if config.events < 1 {
            return Err(ConfigError::Invalid("events must be at least 1".into()));
        }
        if config.runs < 1 {
            return Err(ConfigError::Invalid("runs must be at least 1".into()));
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub mu_a: f64,
    pub mu_b: f64,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid_size: usize,
    pub window: usize,
    pub p0: usize,
    pub rates: Option<Rates>,
    pub events: usize,
    pub seed: u64,
    pub runs: usize,
    pub max_lag: usize,
    pub output_dir: PathBuf,
    pub rho_grid: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let r = self.rates.ok_or_else(|| {
            ConfigError::Invalid("no rates given: set rho or lambda_a, lambda_b, mu_a, mu_b".into())
        })?;
        Ok(ModelParams::new(
            self.grid_size,
            self.window,
            r.lambda_a,
            r.lambda_b,
            r.mu_a,
            r.mu_b,
            self.p0,
        )?)
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig, ConfigError> {
        self.ensemble_for(self.params()?)
    }

    fn ensemble_for(&self, params: ModelParams) -> Result<EnsembleConfig, ConfigError> {
        let config = EnsembleConfig {
            params,
            runs: self.runs,
            events_per_run: self.events,
            base_seed: self.seed,
            max_lag: self.max_lag,
        };
        config.validate()?;
        Ok(config)
    }

    /// One symmetric ensemble per entry of `rho_grid`, in grid order.
    pub fn sweep(&self) -> Result<Vec<EnsembleConfig>, ConfigError> {
        let grid = self
            .rho_grid
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("sweep needs rho_grid".into()))?;
        if grid.is_empty() {
            return Err(ConfigError::Invalid("rho_grid is empty".into()));
        }
        grid.iter()
            .map(|&rho| {
                let params = ModelParams::symmetric(self.grid_size, self.window, rho, self.p0)?;
                self.ensemble_for(params)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_shorthand() {
        let cfg = RunConfigFile::parse("N = 100\nn = 3\nrho = 0.8\np0 = 50\nseed = 9")
            .unwrap()
            .resolve()
            .unwrap();
        let p = cfg.params().unwrap();
        assert_eq!((p.grid_size, p.window, p.p0), (100, 3, 50));
        assert_eq!((p.lambda_a, p.lambda_b, p.mu_a, p.mu_b), (0.8, 0.8, 1.0, 1.0));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.events, DEFAULT_EVENTS);
    }

    #[test]
    fn explicit_rates() {
        let text = "lambda_a = 1\nlambda_b = 2\nmu_a = 3\nmu_b = 4";
        let p = RunConfigFile::parse(text)
            .unwrap()
            .resolve()
            .unwrap()
            .params()
            .unwrap();
        assert_eq!((p.lambda_a, p.lambda_b, p.mu_a, p.mu_b), (1.0, 2.0, 3.0, 4.0));
    }

    #[test]
    fn rejects_unknown_and_conflicting_keys() {
        assert!(matches!(
            RunConfigFile::parse("rho = 1\nfoo = 2"),
            Err(ConfigError::Parse(_))
        ));
        let both = RunConfigFile::parse("rho = 1\nmu_a = 2").unwrap();
        assert!(matches!(both.resolve(), Err(ConfigError::Invalid(_))));
        let partial = RunConfigFile::parse("lambda_a = 1").unwrap();
        assert!(partial.resolve().is_err());
        let none = RunConfigFile::parse("N = 10").unwrap().resolve().unwrap();
        assert!(none.params().is_err());
        let bad = RunConfigFile::parse("rho = 1\nn = 600").unwrap().resolve().unwrap();
        assert!(matches!(bad.params(), Err(ConfigError::Model(_))));
    }

    #[test]
    fn overrides_win() {
        let file = RunConfigFile::parse("rho = 0.8\nseed = 1\nevents = 10").unwrap();
        let merged = file.merge(RunConfigFile {
            seed: Some(5),
            lambda_a: Some(1.0),
            lambda_b: Some(1.0),
            mu_a: Some(2.0),
            mu_b: Some(2.0),
            ..Default::default()
        });
        let cfg = merged.resolve().unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.events, 10);
        assert_eq!(cfg.params().unwrap().mu_a, 2.0);
    }

    #[test]
    fn sweep_grid() {
        let cfg = RunConfigFile::parse("rho_grid = [0.8, 1.2, 6.0]\nruns = 2")
            .unwrap()
            .resolve()
            .unwrap();
        let configs = cfg.sweep().unwrap();
        assert_eq!(configs.len(), 3);
        assert_eq!(configs[2].params.lambda_a, 6.0);
        assert_eq!(configs[0].runs, 2);
        let empty = RunConfigFile::parse("rho_grid = []").unwrap().resolve().unwrap();
        assert!(empty.sweep().is_err());
        let missing = RunConfigFile::default().resolve().unwrap();
        assert!(missing.sweep().is_err());
    }
}
