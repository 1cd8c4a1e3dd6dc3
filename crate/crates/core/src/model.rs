//! Order-book state and the deterministic placement and execution rules.
//!
//! Prices are integer classes `1..=N`. Every order is for one share and
//! orders sharing a class are indistinguishable, so the book is nothing more
//! than two vectors of per-class counts plus the price of the last trade.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A price class in `1..=N`.
pub type PriceClass = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

/// Price grid, placement window, the four Poisson rates and the opening
/// price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of price classes `N`.
    pub grid_size: usize,
    /// Width `n` of the window in which limit orders are placed.
    pub window: usize,
    /// Limit ask arrival rate.
    pub lambda_a: f64,
    /// Limit bid arrival rate.
    pub lambda_b: f64,
    /// Market sell arrival rate (consumes bids).
    pub mu_a: f64,
    /// Market buy arrival rate (consumes asks).
    pub mu_b: f64,
    /// Opening price class.
    pub p0: PriceClass,
}

impl ModelParams {
    pub fn new(
        grid_size: usize,
        window: usize,
        lambda_a: f64,
        lambda_b: f64,
        mu_a: f64,
        mu_b: f64,
        p0: PriceClass,
    ) -> Result<Self> {
        let params = ModelParams {
            grid_size,
            window,
            lambda_a,
            lambda_b,
            mu_a,
            mu_b,
            p0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Symmetric auction with `lambda = rho` and `mu = 1`, so that `mu` is
    /// the unit of time.
    pub fn symmetric(grid_size: usize, window: usize, rho: f64, p0: PriceClass) -> Result<Self> {
        Self::new(grid_size, window, rho, rho, 1.0, 1.0, p0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::InvalidParams(format!(
                "grid size N must be at least 2, got {}",
                self.grid_size
            )));
        }
        if self.window < 1 || self.window >= self.grid_size {
            return Err(Error::InvalidParams(format!(
                "window n must satisfy 1 <= n < N = {}, got {}",
                self.grid_size, self.window
            )));
        }
        if self.p0 < 1 || self.p0 > self.grid_size {
            return Err(Error::InvalidParams(format!(
                "initial price p0 must lie in 1..={}, got {}",
                self.grid_size, self.p0
            )));
        }
        for (name, rate) in [
            ("lambda_a", self.lambda_a),
            ("lambda_b", self.lambda_b),
            ("mu_a", self.mu_a),
            ("mu_b", self.mu_b),
        ] {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and strictly positive, got {rate}"
                )));
            }
        }
        Ok(())
    }

    /// Total event rate of the superposed Poisson streams.
    pub fn total_rate(&self) -> f64 {
        self.lambda_a + self.lambda_b + self.mu_a + self.mu_b
    }

    pub fn is_symmetric(&self) -> bool {
        self.lambda_a == self.lambda_b && self.mu_a == self.mu_b
    }

    /// `lambda / mu` for a symmetric auction, `None` otherwise.
    pub fn rho(&self) -> Option<f64> {
        self.is_symmetric().then(|| self.lambda_a / self.mu_a)
    }
}

/// Per-class order counts on both sides of the book.
///
/// Best prices and side totals are cached and kept in sync by every
/// mutation, so lookups are O(1); a depleted best class triggers a scan
/// towards the far end of the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderBook {
    ask_counts: Vec<u64>,
    bid_counts: Vec<u64>,
    last_trade_price: PriceClass,
    total_asks: u64,
    total_bids: u64,
    best_bid: Option<PriceClass>,
    best_ask: Option<PriceClass>,
}

impl OrderBook {
    /// An empty book on `1..=grid_size` whose reference price is `last_trade_price`.
    pub fn new(grid_size: usize, last_trade_price: PriceClass) -> Result<Self> {
        if last_trade_price < 1 || last_trade_price > grid_size {
            return Err(Error::PriceOutOfRange {
                price: last_trade_price,
                grid_size,
            });
        }
        Ok(OrderBook {
            ask_counts: vec![0; grid_size],
            bid_counts: vec![0; grid_size],
            last_trade_price,
            total_asks: 0,
            total_bids: 0,
            best_bid: None,
            best_ask: None,
        })
    }

    /// Builds a book from explicit count vectors (index 0 is price class 1).
    pub fn from_counts(
        ask_counts: Vec<u64>,
        bid_counts: Vec<u64>,
        last_trade_price: PriceClass,
    ) -> Result<Self> {
        let grid_size = ask_counts.len();
        if bid_counts.len() != grid_size {
            return Err(Error::InvalidParams(format!(
                "ask and bid count vectors differ in length ({} vs {})",
                grid_size,
                bid_counts.len()
            )));
        }
        let mut book = OrderBook::new(grid_size, last_trade_price)?;
        book.total_asks = ask_counts.iter().sum();
        book.total_bids = bid_counts.iter().sum();
        book.best_ask = ask_counts.iter().position(|&c| c > 0).map(|i| i + 1);
        book.best_bid = bid_counts.iter().rposition(|&c| c > 0).map(|i| i + 1);
        book.ask_counts = ask_counts;
        book.bid_counts = bid_counts;
        if let (Some(bid), Some(ask)) = (book.best_bid, book.best_ask) {
            if bid >= ask {
                return Err(Error::CrossedBook {
                    side: Side::Bid,
                    price: bid,
                });
            }
        }
        Ok(book)
    }

    pub fn grid_size(&self) -> usize {
        self.ask_counts.len()
    }

    pub fn ask_counts(&self) -> &[u64] {
        &self.ask_counts
    }

    pub fn bid_counts(&self) -> &[u64] {
        &self.bid_counts
    }

    pub fn counts(&self, side: Side) -> &[u64] {
        match side {
            Side::Bid => &self.bid_counts,
            Side::Ask => &self.ask_counts,
        }
    }

    /// Orders resting at `price` on `side`; zero outside the grid.
    pub fn count_at(&self, side: Side, price: PriceClass) -> u64 {
        price
            .checked_sub(1)
            .and_then(|i| self.counts(side).get(i))
            .copied()
            .unwrap_or(0)
    }

    pub fn last_trade_price(&self) -> PriceClass {
        self.last_trade_price
    }

    /// Total number of limit asks, `A`.
    pub fn total_asks(&self) -> u64 {
        self.total_asks
    }

    /// Total number of limit bids, `B`.
    pub fn total_bids(&self) -> u64 {
        self.total_bids
    }

    pub fn is_empty(&self) -> bool {
        self.total_asks == 0 && self.total_bids == 0
    }

    pub fn best_bid(&self) -> Option<PriceClass> {
        self.best_bid
    }

    pub fn best_ask(&self) -> Option<PriceClass> {
        self.best_ask
    }

    pub fn best(&self, side: Side) -> Option<PriceClass> {
        match side {
            Side::Bid => self.best_bid,
            Side::Ask => self.best_ask,
        }
    }

    /// Price classes in which a new limit order on `side` is placed
    /// uniformly. An empty range means the order is discarded.
    ///
    /// Asks go to `p_b+1..=p_b+n` and bids to `p_a-n..=p_a-1`, clipped to
    /// the grid. When the opposite side is empty the reference is the last
    /// trade price `p`: asks go to `p..=p+n`, bids to `p-n..=p`.
    pub fn placement_interval(&self, side: Side, window: usize) -> RangeInclusive<PriceClass> {
        let grid = self.grid_size();
        let p = self.last_trade_price;
        match side {
            Side::Ask => match self.best_bid {
                Some(bid) => (bid + 1)..=(bid + window).min(grid),
                None => p..=(p + window).min(grid),
            },
            Side::Bid => match self.best_ask {
                Some(ask) => ask.saturating_sub(window).max(1)..=(ask - 1),
                None => p.saturating_sub(window).max(1)..=p,
            },
        }
    }

    /// Rests one limit order at `price`.
    pub fn place_limit(&mut self, side: Side, price: PriceClass) -> Result<()> {
        let grid_size = self.grid_size();
        if price < 1 || price > grid_size {
            return Err(Error::PriceOutOfRange { price, grid_size });
        }
        let crosses = match side {
            Side::Bid => self.best_ask.is_some_and(|ask| price >= ask),
            Side::Ask => self.best_bid.is_some_and(|bid| price <= bid),
        };
        if crosses {
            return Err(Error::CrossedBook { side, price });
        }
        match side {
            Side::Bid => {
                self.bid_counts[price - 1] += 1;
                self.total_bids += 1;
                if self.best_bid.is_none_or(|bid| price > bid) {
                    self.best_bid = Some(price);
                }
            }
            Side::Ask => {
                self.ask_counts[price - 1] += 1;
                self.total_asks += 1;
                if self.best_ask.is_none_or(|ask| price < ask) {
                    self.best_ask = Some(price);
                }
            }
        }
        Ok(())
    }

    /// Executes a market order against `side`: `Side::Bid` is a market sell
    /// hitting the best bid, `Side::Ask` a market buy lifting the best ask.
    ///
    /// Returns the trade price, or `None` (book untouched) when the
    /// targeted side is empty.
    pub fn execute_market(&mut self, side: Side) -> Option<PriceClass> {
        let price = self.best(side)?;
        let idx = price - 1;
        match side {
            Side::Bid => {
                self.bid_counts[idx] -= 1;
                self.total_bids -= 1;
                if self.bid_counts[idx] == 0 {
                    self.best_bid = self.bid_counts[..idx]
                        .iter()
                        .rposition(|&c| c > 0)
                        .map(|i| i + 1);
                }
            }
            Side::Ask => {
                self.ask_counts[idx] -= 1;
                self.total_asks -= 1;
                if self.ask_counts[idx] == 0 {
                    self.best_ask = self.ask_counts[idx + 1..]
                        .iter()
                        .position(|&c| c > 0)
                        .map(|i| idx + 2 + i);
                }
            }
        }
        self.last_trade_price = price;
        Some(price)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The ten-class book with asks at 7, 8, 8, 9 and bids at 3, 4, 5, 5, 5.
    pub(crate) fn figure_one_book() -> OrderBook {
        let mut asks = vec![0; 10];
        let mut bids = vec![0; 10];
        asks[6] = 1;
        asks[7] = 2;
        asks[8] = 1;
        bids[2] = 1;
        bids[3] = 1;
        bids[4] = 3;
        OrderBook::from_counts(asks, bids, 6).unwrap()
    }

    #[test]
    fn best_prices_of_figure_one_book() {
        let book = figure_one_book();
        assert_eq!(book.best_bid(), Some(5));
        assert_eq!(book.best_ask(), Some(7));
        assert_eq!(book.total_asks(), 4);
        assert_eq!(book.total_bids(), 5);
    }

    #[test]
    fn best_prices_of_empty_and_singleton_books() {
        let mut book = OrderBook::new(10, 5).unwrap();
        assert_eq!(book.best_bid(), None);
        assert_eq!(book.best_ask(), None);
        book.place_limit(Side::Bid, 1).unwrap();
        assert_eq!(book.best_bid(), Some(1));
        let mut book = OrderBook::new(10, 5).unwrap();
        book.place_limit(Side::Ask, 10).unwrap();
        assert_eq!(book.best_ask(), Some(10));
    }

    #[test]
    fn ask_interval_follows_best_bid() {
        let mut book = OrderBook::new(500, 250).unwrap();
        book.place_limit(Side::Bid, 250).unwrap();
        assert_eq!(book.placement_interval(Side::Ask, 5), 251..=255);
    }

    #[test]
    fn no_bids_when_best_ask_is_one() {
        let mut book = OrderBook::new(500, 3).unwrap();
        book.place_limit(Side::Ask, 1).unwrap();
        assert!(book.placement_interval(Side::Bid, 5).is_empty());
    }

    #[test]
    fn no_asks_when_best_bid_is_top_of_grid() {
        let mut book = OrderBook::new(20, 20).unwrap();
        book.place_limit(Side::Bid, 20).unwrap();
        assert!(book.placement_interval(Side::Ask, 5).is_empty());
    }

    #[test]
    fn empty_book_intervals_are_anchored_at_last_trade() {
        let book = OrderBook::new(500, 3).unwrap();
        assert_eq!(book.placement_interval(Side::Bid, 5), 1..=3);
        assert_eq!(book.placement_interval(Side::Ask, 5), 3..=8);
        let book = OrderBook::new(500, 498).unwrap();
        assert_eq!(book.placement_interval(Side::Ask, 5), 498..=500);
    }

    #[test]
    fn one_sided_book_falls_back_to_last_trade() {
        let mut book = OrderBook::new(500, 250).unwrap();
        book.place_limit(Side::Ask, 252).unwrap();
        // no bids: asks anchor on the last trade
        assert_eq!(book.placement_interval(Side::Ask, 5), 250..=255);
        assert_eq!(book.placement_interval(Side::Bid, 5), 247..=251);
    }

    #[test]
    fn place_limit_increments_one_counter() {
        let mut book = figure_one_book();
        book.place_limit(Side::Ask, 7).unwrap();
        assert_eq!(book.count_at(Side::Ask, 7), 2);
        assert_eq!(book.total_asks(), 5);
        assert_eq!(book.bid_counts(), figure_one_book().bid_counts());
    }

    #[test]
    fn first_order_on_empty_book() {
        let mut book = OrderBook::new(500, 250).unwrap();
        book.place_limit(Side::Bid, 250).unwrap();
        assert_eq!(book.total_bids(), 1);
        assert_eq!(book.best_bid(), Some(250));
    }

    #[test]
    fn place_limit_rejects_off_grid_and_crossing() {
        let mut book = figure_one_book();
        assert_eq!(
            book.place_limit(Side::Bid, 0),
            Err(Error::PriceOutOfRange {
                price: 0,
                grid_size: 10
            })
        );
        assert!(book.place_limit(Side::Ask, 11).is_err());
        assert!(book.place_limit(Side::Bid, 7).is_err());
        assert!(book.place_limit(Side::Ask, 5).is_err());
        assert_eq!(book, figure_one_book());
    }

    #[test]
    fn market_buy_lifts_best_ask() {
        let mut book = figure_one_book();
        assert_eq!(book.execute_market(Side::Ask), Some(7));
        assert_eq!(book.count_at(Side::Ask, 7), 0);
        assert_eq!(book.total_asks(), 3);
        assert_eq!(book.best_ask(), Some(8));
        assert_eq!(book.last_trade_price(), 7);
    }

    #[test]
    fn market_order_on_empty_side_is_not_executed() {
        let mut book = OrderBook::new(10, 4).unwrap();
        let before = book.clone();
        assert_eq!(book.execute_market(Side::Bid), None);
        assert_eq!(book, before);
    }

    #[test]
    fn depleting_last_bid_empties_book() {
        let mut book = OrderBook::new(10, 2).unwrap();
        book.place_limit(Side::Bid, 5).unwrap();
        assert_eq!(book.execute_market(Side::Bid), Some(5));
        assert!(book.is_empty());
        assert_eq!(book.best_bid(), None);
        assert_eq!(book.last_trade_price(), 5);
    }

    #[test]
    fn best_bid_scans_down_after_depletion() {
        let mut book = figure_one_book();
        for _ in 0..3 {
            assert_eq!(book.execute_market(Side::Bid), Some(5));
        }
        assert_eq!(book.best_bid(), Some(4));
        assert_eq!(book.execute_market(Side::Bid), Some(4));
        assert_eq!(book.execute_market(Side::Bid), Some(3));
        assert_eq!(book.execute_market(Side::Bid), None);
    }

    #[test]
    fn unique_best_place_then_execute_is_identity_on_counts() {
        let mut book = figure_one_book();
        book.place_limit(Side::Bid, 6).unwrap();
        assert_eq!(book.execute_market(Side::Bid), Some(6));
        assert_eq!(book.bid_counts(), figure_one_book().bid_counts());
        assert_eq!(book.ask_counts(), figure_one_book().ask_counts());
    }

    #[test]
    fn from_counts_rejects_crossed_book() {
        let asks = vec![0, 1, 0];
        let bids = vec![0, 1, 0];
        assert!(OrderBook::from_counts(asks, bids, 2).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::symmetric(500, 5, 0.8, 250).is_ok());
        assert!(ModelParams::symmetric(1, 1, 0.8, 1).is_err());
        assert!(ModelParams::symmetric(10, 10, 0.8, 5).is_err());
        assert!(ModelParams::symmetric(10, 0, 0.8, 5).is_err());
        assert!(ModelParams::symmetric(10, 3, 0.8, 0).is_err());
        assert!(ModelParams::symmetric(10, 3, 0.8, 11).is_err());
        assert!(ModelParams::symmetric(10, 3, 0.0, 5).is_err());
        assert!(ModelParams::new(10, 3, 1.0, 1.0, f64::NAN, 1.0, 5).is_err());
    }

    #[test]
    fn rho_only_for_symmetric_rates() {
        let p = ModelParams::symmetric(500, 5, 1.2, 250).unwrap();
        assert_eq!(p.rho(), Some(1.2));
        let q = ModelParams::new(500, 5, 1.0, 2.0, 1.0, 1.0, 250).unwrap();
        assert_eq!(q.rho(), None);
    }
}
