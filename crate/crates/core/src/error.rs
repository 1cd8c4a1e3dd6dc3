use thiserror::Error;

use crate::model::Side;

/// Errors raised by the model, the simulator, the statistics and the
/// closed-form queueing results.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("price class {price} is outside the grid 1..={grid_size}")]
    PriceOutOfRange { price: usize, grid_size: usize },

    #[error("{side:?} order at price class {price} would cross the book")]
    CrossedBook { side: Side, price: usize },

    #[error("rate must be strictly positive, got {0}")]
    NonPositiveRate(f64),

    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("sample is empty")]
    EmptySample,

    #[error("sample contains a non-finite value")]
    NonFinite,

    #[error("no equilibrium: arrival rate {lambda} is not below service rate {mu}")]
    NoEquilibrium { lambda: f64, mu: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
