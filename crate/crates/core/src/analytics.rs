//! Observables computed from a trade series: tick-by-tick log-returns,
//! their moments, sample autocorrelations, empirical complementary CDFs,
//! and the partition description of a book.
//!
//! Conventions: natural logarithm; standard deviation with divisor `n - 1`;
//! skewness and (raw, non-excess) kurtosis as standardized central moments
//! with divisor `n`; autocorrelation with the biased divisor `n`.

use serde::{Deserialize, Serialize};

use crate::engine::TradeRecord;
use crate::error::{Error, Result};
use crate::model::{OrderBook, PriceClass, Side};

/// Tick-by-tick log-returns `ln(P(T_{i+1}) / P(T_i))`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when fewer than two trades were available.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn absolute(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.abs()).collect()
    }
}

pub fn log_returns(trades: &[TradeRecord]) -> ReturnSeries {
    let prices: Vec<PriceClass> = trades.iter().map(|t| t.price).collect();
    log_returns_from_prices(&prices)
}

pub fn log_returns_from_prices(prices: &[PriceClass]) -> ReturnSeries {
    let values = prices
        .windows(2)
        .map(|w| (w[1] as f64 / w[0] as f64).ln())
        .collect();
    ReturnSeries { values }
}

/// Online accumulator for the first four central moments.
///
/// Uses the single-pass update of the centred sums `M2`, `M3`, `M4`, which
/// stays accurate for long series of tiny returns.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (divisor `n - 1`).
    pub fn variance(&self) -> Option<f64> {
        (self.count >= 2).then(|| self.m2 / (self.count - 1) as f64)
    }

    pub fn skewness(&self) -> Option<f64> {
        if self.count == 0 || self.m2 <= 0.0 {
            return None;
        }
        let n = self.count as f64;
        Some(n.sqrt() * self.m3 / self.m2.powf(1.5))
    }

    pub fn kurtosis(&self) -> Option<f64> {
        if self.count == 0 || self.m2 <= 0.0 {
            return None;
        }
        let n = self.count as f64;
        Some(n * self.m4 / (self.m2 * self.m2))
    }
}

impl Extend<f64> for MomentAccumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

impl FromIterator<f64> for MomentAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MomentAccumulator::new();
        acc.extend(iter);
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std_dev: f64,
    /// `None` for a zero-variance series.
    pub skewness: Option<f64>,
    /// Raw kurtosis (Gaussian = 3); `None` for a zero-variance series.
    pub kurtosis: Option<f64>,
}

pub fn moments(series: &[f64]) -> Result<Moments> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let acc: MomentAccumulator = series.iter().copied().collect();
    Ok(Moments {
        mean: acc.mean(),
        std_dev: acc.variance().unwrap_or(0.0).sqrt(),
        skewness: acc.skewness(),
        kurtosis: acc.kurtosis(),
    })
}

/// Sample autocorrelations at lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfSeries {
    pub values: Vec<f64>,
}

impl AcfSeries {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn at(&self, lag: usize) -> Option<f64> {
        self.values.get(lag).copied()
    }
}

pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfSeries> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::TooShort {
            needed: max_lag + 1,
            got: n,
        });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if series.iter().all(|&x| x == series[0]) {
        return Err(Error::ZeroVariance);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0: f64 = centred.iter().map(|d| d * d).sum();
    if c0 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let values = (0..=max_lag)
        .map(|h| {
            if h == 0 {
                return 1.0;
            }
            let ch: f64 = centred[..n - h]
                .iter()
                .zip(&centred[h..])
                .map(|(a, b)| a * b)
                .sum();
            (ch / c0).clamp(-1.0, 1.0)
        })
        .collect();
    Ok(AcfSeries { values })
}

/// Lag-1 autocorrelation of the absolute returns, `c1`.
pub fn abs_acf_lag1(series: &ReturnSeries) -> Result<f64> {
    Ok(acf(&series.absolute(), 1)?.values[1])
}

/// Descriptive statistics of one return series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    /// `None` when the absolute returns have zero variance.
    pub c1: Option<f64>,
}

pub fn summarize(series: &ReturnSeries) -> Result<SummaryStats> {
    let m = moments(&series.values)?;
    Ok(SummaryStats {
        mean: m.mean,
        std_dev: m.std_dev,
        skewness: m.skewness,
        kurtosis: m.kurtosis,
        c1: abs_acf_lag1(series).ok(),
    })
}

/// Empirical complementary CDF `P(X > x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eccdf {
    sorted: Vec<f64>,
}

impl Eccdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Eccdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples strictly greater than `value`.
    pub fn prob_greater(&self, value: f64) -> f64 {
        let at_or_below = self.sorted.partition_point(|&x| x <= value);
        (self.sorted.len() - at_or_below) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample `x` with empirical CDF `F(x) >= q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let rank = (q.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.sorted[rank.clamp(1, n) - 1]
    }

    /// One `(value, P(X > value))` point per distinct sample, ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let greater = (self.sorted.len() - i - 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = greater,
                _ => out.push((x, greater)),
            }
        }
        out
    }
}

/// Number of price classes holding exactly `k` orders, per side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDescription {
    pub ask: Vec<u64>,
    pub bid: Vec<u64>,
}

impl PartitionDescription {
    pub fn side(&self, side: Side) -> &[u64] {
        match side {
            Side::Ask => &self.ask,
            Side::Bid => &self.bid,
        }
    }
}

pub fn partition_description(book: &OrderBook) -> PartitionDescription {
    fn occupancy(counts: &[u64]) -> Vec<u64> {
        let max = counts.iter().copied().max().unwrap_or(0) as usize;
        let mut z = vec![0; max + 1];
        for &c in counts {
            z[c as usize] += 1;
        }
        z
    }
    PartitionDescription {
        ask: occupancy(book.ask_counts()),
        bid: occupancy(book.bid_counts()),
    }
}
