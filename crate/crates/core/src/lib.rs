//! Continuous double auction modelled as two independent M/M/1 queues.
//!
//! Limit orders for one share arrive as Poisson streams and rest in a book
//! of integer price classes; market orders remove one order at the best
//! price. The crate provides the book ([`model`]), a continuous-time
//! simulator ([`engine`]), return statistics ([`analytics`]), the
//! closed-form queueing results ([`theory`]), seeded ensembles
//! ([`ensemble`]) and the configuration and file formats used by the
//! `cda` command-line tool ([`config`], [`output`]).

pub mod analytics;
pub mod config;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod output;
pub mod theory;

pub use analytics::{
    abs_acf_lag1, acf, log_returns, moments, partition_description, summarize, AcfSeries, Eccdf,
    Moments, PartitionDescription, ReturnSeries, SummaryStats,
};
pub use engine::{
    run, run_with, EventType, QueueSample, RunOptions, SimOutput, Simulator, TradeRecord,
};
pub use ensemble::{
    derive_seed, run_ensemble, sweep, EnsembleConfig, EnsembleSummary, StatAggregate, SweepRow,
};
pub use error::{Error, Result};
pub use model::{ModelParams, OrderBook, PriceClass, Side};
pub use theory::{classify_regime, is_ergodic, Regime, Rho};
