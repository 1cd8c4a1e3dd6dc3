//! Closed-form queueing results for the two order queues and the regime
//! classification they imply.
//!
//! The total ask count `A` is an M/M/1 queue fed by limit asks (`λa`) and
//! served by market buys (`μb`); the bid count `B` likewise with `λb` and
//! `μa`. The queues are independent.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `ρ < 1`: both queues are positive recurrent.
    Ergodic,
    /// `1 ≤ ρ < n`: the book grows without bound but the best queues keep
    /// emptying, so prices still move within a limited set.
    NonErgodicFluctuating,
    /// `ρ ≥ n`: the best queues grow without bound and prices alternate
    /// between two values.
    NonErgodicTelegraph,
}

impl Regime {
    pub fn is_ergodic(self) -> bool {
        self == Regime::Ergodic
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Regime::Ergodic => "Ergodic",
            Regime::NonErgodicFluctuating => "NonErgodicFluctuating",
            Regime::NonErgodicTelegraph => "NonErgodicTelegraph",
        };
        f.write_str(name)
    }
}

/// The order parameter `ρ = λ / μ` of a symmetric auction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Rho(f64);

impl Rho {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Rho(value))
        } else {
            Err(Error::InvalidParams(format!(
                "rho must be finite and positive, got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn regime(self, window: usize) -> Regime {
        if self.0 < 1.0 {
            Regime::Ergodic
        } else if self.0 < window as f64 {
            Regime::NonErgodicFluctuating
        } else {
            Regime::NonErgodicTelegraph
        }
    }
}

/// `(arrival, service)` rates of the total queue on `side`.
pub fn queue_rates(params: &ModelParams, side: Side) -> (f64, f64) {
    match side {
        Side::Ask => (params.lambda_a, params.mu_b),
        Side::Bid => (params.lambda_b, params.mu_a),
    }
}

/// `λa < μb` and `λb < μa`.
pub fn is_ergodic(params: &ModelParams) -> bool {
    [Side::Ask, Side::Bid].into_iter().all(|side| {
        let (lambda, mu) = queue_rates(params, side);
        lambda < mu
    })
}

/// Regime of the queues on one side of the book.
pub fn classify_side(params: &ModelParams, side: Side) -> Regime {
    let (lambda, mu) = queue_rates(params, side);
    if lambda < mu {
        Regime::Ergodic
    } else if lambda < params.window as f64 * mu {
        Regime::NonErgodicFluctuating
    } else {
        Regime::NonErgodicTelegraph
    }
}

/// Ergodic when both sides are, telegraph when both best queues are
/// supercritical, fluctuating otherwise. For symmetric rates this is the
/// `ρ < 1`, `1 ≤ ρ < n`, `ρ ≥ n` split.
pub fn classify_regime(params: &ModelParams) -> Regime {
    match (
        classify_side(params, Side::Ask),
        classify_side(params, Side::Bid),
    ) {
        (Regime::Ergodic, Regime::Ergodic) => Regime::Ergodic,
        (Regime::NonErgodicTelegraph, Regime::NonErgodicTelegraph) => {
            Regime::NonErgodicTelegraph
        }
        _ => Regime::NonErgodicFluctuating,
    }
}

/// Stationary probability `(λ/μ)^k (1 - λ/μ)` of an M/M/1 queue.
pub fn equilibrium_pmf(lambda: f64, mu: f64, k: u64) -> Result<f64> {
    let r = load(lambda, mu)?;
    Ok(r.powf(k as f64) * (1.0 - r))
}

/// Tail mass `P(X > k) = (λ/μ)^(k+1)` of the stationary law.
pub fn equilibrium_tail(lambda: f64, mu: f64, k: u64) -> Result<f64> {
    let r = load(lambda, mu)?;
    Ok(r.powf(k as f64 + 1.0))
}

fn load(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(Error::NonPositiveRate(lambda.min(mu)));
    }
    if lambda >= mu {
        return Err(Error::NoEquilibrium { lambda, mu });
    }
    Ok(lambda / mu)
}

/// Stationary probability of `A = a` and `B = b`.
pub fn joint_pmf(params: &ModelParams, a: u64, b: u64) -> Result<f64> {
    let (la, mb) = queue_rates(params, Side::Ask);
    let (lb, ma) = queue_rates(params, Side::Bid);
    Ok(equilibrium_pmf(la, mb, a)? * equilibrium_pmf(lb, ma, b)?)
}

/// Stationary probability that both sides of the book are empty.
pub fn empty_book_prob(params: &ModelParams) -> Result<f64> {
    joint_pmf(params, 0, 0)
}

/// Rates of the M/M/1 queue the best class on `side` is coupled with:
/// limit orders spread evenly over `n` classes, so a `1/n` share of them
/// lands at the best price.
pub fn coupled_best_queue_rates(params: &ModelParams, side: Side) -> (f64, f64) {
    let (lambda, mu) = queue_rates(params, side);
    (lambda / params.window as f64, mu)
}
