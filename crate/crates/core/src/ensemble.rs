//! Many independent seeded runs, aggregated into ensemble statistics.
//!
//! Run `i` is seeded with [`derive_seed`]`(base_seed, i)`. Runs are executed
//! on a rayon pool and collected back in run-index order before any
//! aggregation, so results do not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{acf, log_returns, summarize, Eccdf, SummaryStats};
use crate::engine;
use crate::error::{Error, Result};
use crate::model::ModelParams;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run` in an ensemble: the SplitMix64 output at state
/// `base_seed + (run + 1) * γ`. The finalizer is a bijection and `γ` is odd,
/// so seeds are pairwise distinct for any `2^64` consecutive run indices.
pub fn derive_seed(base_seed: u64, run: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(run.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub params: ModelParams,
    pub runs: usize,
    pub events_per_run: usize,
    pub base_seed: u64,
    /// Largest lag of the ensemble-mean ACF of absolute returns; 0 skips it.
    pub max_lag: usize,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.runs < 1 {
            return Err(Error::InvalidParams("runs must be at least 1".into()));
        }
        if self.events_per_run < 2 {
            return Err(Error::InvalidParams(
                "events per run must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a single ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub trades: usize,
    /// `None` when the run produced fewer than three trades.
    pub stats: Option<SummaryStats>,
    /// ACF of absolute returns up to `max_lag`, when defined.
    pub abs_acf: Option<Vec<f64>>,
}

/// Mean across runs and its standard error for one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatAggregate {
    pub mean: Option<f64>,
    /// Sample standard deviation across runs over `sqrt(used)`; `None` with
    /// fewer than two contributing runs.
    pub stderr: Option<f64>,
    pub used: usize,
    pub excluded: usize,
}

impl StatAggregate {
    pub fn from_values(values: &[Option<f64>]) -> Self {
        let used: Vec<f64> = values.iter().flatten().copied().collect();
        let n = used.len();
        let mean = (n > 0).then(|| used.iter().sum::<f64>() / n as f64);
        let stderr = match mean {
            Some(m) if n >= 2 => {
                let var = used.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                Some((var / n as f64).sqrt())
            }
            _ => None,
        };
        StatAggregate {
            mean,
            stderr,
            used: n,
            excluded: values.len() - n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mean: StatAggregate,
    pub std_dev: StatAggregate,
    pub skewness: StatAggregate,
    pub kurtosis: StatAggregate,
    pub c1: StatAggregate,
}

impl Aggregates {
    /// `(name, aggregate)` pairs in output order.
    pub fn named(&self) -> [(&'static str, StatAggregate); 5] {
        [
            ("mean", self.mean),
            ("std", self.std_dev),
            ("skewness", self.skewness),
            ("kurtosis", self.kurtosis),
            ("c1", self.c1),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config: EnsembleConfig,
    pub per_run: Vec<RunResult>,
    pub aggregate: Aggregates,
    /// `None` when no run had a defined kurtosis.
    pub eccdf_kurtosis: Option<Eccdf>,
    pub eccdf_c1: Option<Eccdf>,
    /// Lag-wise mean of the per-run absolute-return ACFs.
    pub mean_abs_acf: Vec<f64>,
}

impl EnsembleSummary {
    pub fn values<F>(&self, field: F) -> Vec<Option<f64>>
    where
        F: Fn(&SummaryStats) -> Option<f64>,
    {
        self.per_run
            .iter()
            .map(|r| r.stats.as_ref().and_then(&field))
            .collect()
    }
}

/// Simulates and summarizes run `run` of `config`.
pub fn run_member(config: &EnsembleConfig, run: usize) -> Result<RunResult> {
    let seed = derive_seed(config.base_seed, run as u64);
    let out = engine::run(&config.params, config.events_per_run, seed)?;
    let returns = log_returns(&out.trades);
    let stats = summarize(&returns).ok();
    let abs_acf = if config.max_lag > 0 {
        acf(&returns.absolute(), config.max_lag)
            .ok()
            .map(|a| a.values)
    } else {
        None
    };
    Ok(RunResult {
        run,
        seed,
        trades: out.trades.len(),
        stats,
        abs_acf,
    })
}

/// Runs the ensemble on the global rayon pool.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleSummary> {
    config.validate()?;
    let per_run = (0..config.runs)
        .into_par_iter()
        .map(|i| run_member(config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(*config, per_run))
}

/// Runs the ensemble on a dedicated pool of `workers` threads.
pub fn run_ensemble_with_workers(
    config: &EnsembleConfig,
    workers: usize,
) -> Result<EnsembleSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_ensemble(config))
}

/// Runs the ensemble one member after another on the calling thread.
pub fn run_ensemble_serial(config: &EnsembleConfig) -> Result<EnsembleSummary> {
    config.validate()?;
    let per_run = (0..config.runs)
        .map(|i| run_member(config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(*config, per_run))
}

fn aggregate(config: EnsembleConfig, per_run: Vec<RunResult>) -> EnsembleSummary {
    let field = |f: fn(&SummaryStats) -> Option<f64>| -> Vec<Option<f64>> {
        per_run
            .iter()
            .map(|r| r.stats.as_ref().and_then(f))
            .collect()
    };
    let kurtosis = field(|s| s.kurtosis);
    let c1 = field(|s| s.c1);
    let aggregate = Aggregates {
        mean: StatAggregate::from_values(&field(|s| Some(s.mean))),
        std_dev: StatAggregate::from_values(&field(|s| Some(s.std_dev))),
        skewness: StatAggregate::from_values(&field(|s| s.skewness)),
        kurtosis: StatAggregate::from_values(&kurtosis),
        c1: StatAggregate::from_values(&c1),
    };
    let defined = |v: &[Option<f64>]| v.iter().flatten().copied().collect::<Vec<_>>();
    let eccdf_kurtosis = Eccdf::new(&defined(&kurtosis)).ok();
    let eccdf_c1 = Eccdf::new(&defined(&c1)).ok();

    let acfs: Vec<&Vec<f64>> = per_run.iter().filter_map(|r| r.abs_acf.as_ref()).collect();
    let mean_abs_acf = if acfs.is_empty() {
        Vec::new()
    } else {
        (0..=config.max_lag)
            .map(|lag| acfs.iter().map(|a| a[lag]).sum::<f64>() / acfs.len() as f64)
            .collect()
    };

    EnsembleSummary {
        config,
        per_run,
        aggregate,
        eccdf_kurtosis,
        eccdf_c1,
        mean_abs_acf,
    }
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `λa / μb`, which is `ρ` for symmetric rates.
    pub rho: f64,
    pub summary: EnsembleSummary,
}

/// Runs each configuration in order. All configurations must agree on
/// everything except the rates.
pub fn sweep(configs: &[EnsembleConfig]) -> Result<Vec<SweepRow>> {
    let first = configs
        .first()
        .ok_or_else(|| Error::InvalidParams("sweep grid is empty".into()))?;
    for c in configs {
        let same_shape = c.params.grid_size == first.params.grid_size
            && c.params.window == first.params.window
            && c.params.p0 == first.params.p0
            && c.runs == first.runs
            && c.events_per_run == first.events_per_run
            && c.base_seed == first.base_seed
            && c.max_lag == first.max_lag;
        if !same_shape {
            return Err(Error::InvalidParams(
                "sweep configurations may differ only in their rates".into(),
            ));
        }
    }
    configs
        .iter()
        .map(|c| {
            Ok(SweepRow {
                rho: c.params.lambda_a / c.params.mu_b,
                summary: run_ensemble(c)?,
            })
        })
        .collect()
}
