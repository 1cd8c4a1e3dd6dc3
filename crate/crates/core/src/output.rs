//! File products of the command-line tool.
//!
//! CSV files have a fixed header, fixed column and row order, `\n` line
//! endings and no quoting of numbers. Reals are written in the shortest
//! decimal form that parses back to the same `f64` (at most 17 significant
//! digits), so every file re-reads losslessly. Undefined statistics are
//! empty fields.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::analytics::{acf, log_returns, summarize, Eccdf, ReturnSeries, SummaryStats};
use crate::engine::{EventTally, SimOutput};
use crate::ensemble::{EnsembleSummary, SweepRow};
use crate::model::{ModelParams, Side};
use crate::theory::{
    classify_regime, coupled_best_queue_rates, empty_book_prob, equilibrium_pmf,
    equilibrium_tail, is_ergodic, queue_rates, Regime,
};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, OutputError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

/// Writer with an explicit header row, for files that may have no data rows.
fn headed_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>, OutputError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), OutputError> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ReturnRow {
    index: usize,
    log_return: f64,
}

#[derive(Debug, Serialize)]
struct QueueRow {
    event_index: usize,
    epoch: f64,
    #[serde(rename = "A")]
    asks: u64,
    #[serde(rename = "B")]
    bids: u64,
}

#[derive(Debug, Serialize)]
struct AcfRow {
    lag: usize,
    acf: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub params: ModelParams,
    pub events: usize,
    pub seed: u64,
    pub trades: usize,
    pub returns: usize,
    pub regime: Regime,
    pub ergodic: bool,
    pub tally: EventTally,
    pub final_clock: f64,
    pub final_asks: u64,
    pub final_bids: u64,
    /// `None` with fewer than three trades.
    pub stats: Option<SummaryStats>,
}

/// Writes `trades.csv`, `returns.csv`, `queue.csv`, `acf.csv` (when the
/// absolute-return ACF is defined up to `max_lag`) and `summary.json`.
pub fn write_simulation(
    dir: &Path,
    params: &ModelParams,
    seed: u64,
    out: &SimOutput,
    max_lag: usize,
) -> Result<SimulationSummary, OutputError> {
    fs::create_dir_all(dir)?;
    let returns: ReturnSeries = log_returns(&out.trades);
    write_rows(&dir.join("trades.csv"), &out.trades)?;
    write_rows(
        &dir.join("returns.csv"),
        returns.values.iter().enumerate().map(|(index, &log_return)| ReturnRow {
            index,
            log_return,
        }),
    )?;
    write_rows(
        &dir.join("queue.csv"),
        out.queue.iter().map(|q| QueueRow {
            event_index: q.event_index,
            epoch: q.epoch,
            asks: q.asks,
            bids: q.bids,
        }),
    )?;
    let acf_path = dir.join("acf.csv");
    match acf(&returns.absolute(), max_lag) {
        Ok(series) => write_rows(
            &acf_path,
            series.values.iter().enumerate().map(|(lag, &acf)| AcfRow { lag, acf }),
        )?,
        Err(_) if acf_path.exists() => fs::remove_file(&acf_path)?,
        Err(_) => {}
    }
    let summary = SimulationSummary {
        params: *params,
        events: out.event_count,
        seed,
        trades: out.trades.len(),
        returns: returns.len(),
        regime: classify_regime(params),
        ergodic: is_ergodic(params),
        tally: out.tally,
        final_clock: out.final_clock,
        final_asks: out.final_book.total_asks(),
        final_bids: out.final_book.total_bids(),
        stats: summarize(&returns).ok(),
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct PerRunRow {
    run: usize,
    mean: Option<f64>,
    std: Option<f64>,
    skewness: Option<f64>,
    kurtosis: Option<f64>,
    c1: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AggregateRow {
    statistic: &'static str,
    mean: Option<f64>,
    stderr: Option<f64>,
    excluded_runs: usize,
}

#[derive(Debug, Serialize)]
struct EccdfRow {
    value: f64,
    ccdf_prob: f64,
}

fn write_eccdf(path: &Path, eccdf: Option<&Eccdf>) -> Result<(), OutputError> {
    let points = eccdf.map(Eccdf::points).unwrap_or_default();
    let mut w = headed_writer(path, &["value", "ccdf_prob"])?;
    for (value, ccdf_prob) in points {
        w.serialize(EccdfRow { value, ccdf_prob })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `per_run_stats.csv`, `aggregate.csv`, `eccdf_kurtosis.csv`,
/// `eccdf_c1.csv` and `acf_mean.csv`.
pub fn write_ensemble(dir: &Path, summary: &EnsembleSummary) -> Result<(), OutputError> {
    fs::create_dir_all(dir)?;
    let mut w = headed_writer(
        &dir.join("per_run_stats.csv"),
        &["run", "mean", "std", "skewness", "kurtosis", "c1"],
    )?;
    for r in &summary.per_run {
        let s = r.stats.as_ref();
        w.serialize(PerRunRow {
            run: r.run,
            mean: s.map(|s| s.mean),
            std: s.map(|s| s.std_dev),
            skewness: s.and_then(|s| s.skewness),
            kurtosis: s.and_then(|s| s.kurtosis),
            c1: s.and_then(|s| s.c1),
        })?;
    }
    w.flush()?;

    write_rows(
        &dir.join("aggregate.csv"),
        summary
            .aggregate
            .named()
            .into_iter()
            .map(|(statistic, agg)| AggregateRow {
                statistic,
                mean: agg.mean,
                stderr: agg.stderr,
                excluded_runs: agg.excluded,
            }),
    )?;
    write_eccdf(&dir.join("eccdf_kurtosis.csv"), summary.eccdf_kurtosis.as_ref())?;
    write_eccdf(&dir.join("eccdf_c1.csv"), summary.eccdf_c1.as_ref())?;

    let mut w = headed_writer(&dir.join("acf_mean.csv"), &["lag", "acf"])?;
    for (lag, &acf) in summary.mean_abs_acf.iter().enumerate() {
        w.serialize(AcfRow { lag, acf })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepCsvRow {
    rho: f64,
    std_mean: Option<f64>,
    std_err: Option<f64>,
    kurt_mean: Option<f64>,
    kurt_err: Option<f64>,
    c1_mean: Option<f64>,
    c1_err: Option<f64>,
}

/// Writes `sweep.csv`, one row per grid point in grid order.
pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<(), OutputError> {
    fs::create_dir_all(dir)?;
    write_rows(
        &dir.join("sweep.csv"),
        rows.iter().map(|row| {
            let agg = &row.summary.aggregate;
            SweepCsvRow {
                rho: row.rho,
                std_mean: agg.std_dev.mean,
                std_err: agg.std_dev.stderr,
                kurt_mean: agg.kurtosis.mean,
                kurt_err: agg.kurtosis.stderr,
                c1_mean: agg.c1.mean,
                c1_err: agg.c1.stderr,
            }
        }),
    )
}

/// Plain-text report of the closed-form results for `params`, with the
/// stationary pmf tabulated for `0..=cutoff`.
pub fn theory_report(params: &ModelParams, cutoff: u64) -> String {
    let mut s = String::new();
    let ergodic = is_ergodic(params);
    let _ = writeln!(
        s,
        "parameters: N = {}, n = {}, lambda_a = {}, lambda_b = {}, mu_a = {}, mu_b = {}, p0 = {}",
        params.grid_size,
        params.window,
        params.lambda_a,
        params.lambda_b,
        params.mu_a,
        params.mu_b,
        params.p0
    );
    if let Some(rho) = params.rho() {
        let _ = writeln!(s, "rho: {rho}");
    }
    let _ = writeln!(
        s,
        "ergodicity: {}",
        if ergodic { "ergodic" } else { "non-ergodic" }
    );
    let _ = writeln!(s, "regime: {}", classify_regime(params));
    match empty_book_prob(params) {
        Ok(p) => {
            let _ = writeln!(s, "empty-book probability: {p}");
        }
        Err(_) => {
            let _ = writeln!(s, "empty-book probability: no equilibrium");
        }
    }
    for (label, side) in [("ask", Side::Ask), ("bid", Side::Bid)] {
        let (arrival, service) = coupled_best_queue_rates(params, side);
        let _ = writeln!(
            s,
            "best {label} queue rates: arrival {arrival}, service {service}"
        );
    }
    for (label, side) in [("A (asks)", Side::Ask), ("B (bids)", Side::Bid)] {
        let (lambda, mu) = queue_rates(params, side);
        let _ = writeln!(s, "equilibrium pmf of {label}:");
        if lambda >= mu {
            let _ = writeln!(s, "  no equilibrium");
            continue;
        }
        for k in 0..=cutoff {
            let p = equilibrium_pmf(lambda, mu, k).expect("ergodic side");
            let _ = writeln!(s, "  {k}\t{p}");
        }
        let tail = equilibrium_tail(lambda, mu, cutoff).expect("ergodic side");
        let _ = writeln!(s, "  >{cutoff}\t{tail}");
    }
    s
}
