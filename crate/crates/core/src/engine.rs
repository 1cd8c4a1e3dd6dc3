//! Continuous-time driver for the book.
//!
//! The four order streams are independent Poisson processes, so their
//! superposition is Poisson with total rate `Λ = λa + λb + μa + μb` and each
//! arrival is of a given type with probability `rate / Λ`. Every event
//! consumes random numbers from a [`SimRng`] in a fixed order:
//!
//! 1. waiting time: `u ~ U(0, 1)` (open), `dt = -ln(u) / Λ`;
//! 2. event type: `u ~ U[0, 1)`, compared against the cumulative rates in
//!    the order limit ask, limit bid, market buy, market sell;
//! 3. limit orders only, when the placement interval is non-empty:
//!    `u ~ U[0, 1)`, class index `floor(u * len)`.
//!
//! The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`.

use rand::distr::{Distribution, Open01, StandardUniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, OrderBook, PriceClass, Side};

/// Deterministic random stream used by one simulation run.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventType {
    /// Rate `λa`.
    LimitAsk,
    /// Rate `λb`.
    LimitBid,
    /// Rate `μb`; lifts the best ask.
    MarketBuy,
    /// Rate `μa`; hits the best bid.
    MarketSell,
}

impl EventType {
    pub const ALL: [EventType; 4] = [
        EventType::LimitAsk,
        EventType::LimitBid,
        EventType::MarketBuy,
        EventType::MarketSell,
    ];

    pub fn rate(self, params: &ModelParams) -> f64 {
        match self {
            EventType::LimitAsk => params.lambda_a,
            EventType::LimitBid => params.lambda_b,
            EventType::MarketBuy => params.mu_b,
            EventType::MarketSell => params.mu_a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    /// Zero-based trade counter.
    pub index: usize,
    pub epoch: f64,
    pub price: PriceClass,
}

/// Queue lengths right after an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueSample {
    pub event_index: usize,
    pub epoch: f64,
    pub asks: u64,
    pub bids: u64,
}

/// What happened to each event.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTally {
    pub limit_placed: usize,
    pub limit_discarded: usize,
    pub market_executed: usize,
    pub market_unfilled: usize,
}

impl EventTally {
    pub fn total(&self) -> usize {
        self.limit_placed + self.limit_discarded + self.market_executed + self.market_unfilled
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub trades: Vec<TradeRecord>,
    pub event_count: usize,
    pub final_book: OrderBook,
    /// Empty unless queue recording was requested.
    pub queue: Vec<QueueSample>,
    pub tally: EventTally,
    pub final_clock: f64,
}

impl SimOutput {
    pub fn prices(&self) -> Vec<PriceClass> {
        self.trades.iter().map(|t| t.price).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub record_queue: bool,
}

/// Exponential waiting time with rate `total_rate`; always strictly positive.
pub fn draw_waiting_time<R: Rng + ?Sized>(total_rate: f64, rng: &mut R) -> Result<f64> {
    if !(total_rate > 0.0 && total_rate.is_finite()) {
        return Err(Error::NonPositiveRate(total_rate));
    }
    let u: f64 = Open01.sample(rng);
    Ok(-u.ln() / total_rate)
}

pub fn draw_event_type<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> EventType {
    let u: f64 = StandardUniform.sample(rng);
    event_from_uniform(params, u)
}

fn event_from_uniform(params: &ModelParams, u: f64) -> EventType {
    let mut x = u * params.total_rate();
    for event in &EventType::ALL[..3] {
        let rate = event.rate(params);
        if x < rate {
            return *event;
        }
        x -= rate;
    }
    EventType::MarketSell
}

/// What a single event did to the book.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub event: EventType,
    pub waiting_time: f64,
    /// Class where a limit order came to rest.
    pub placed: Option<PriceClass>,
    pub trade: Option<TradeRecord>,
}

/// One simulation run: the book, the clock and the random stream.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: ModelParams,
    book: OrderBook,
    clock: f64,
    rng: SimRng,
    events: usize,
    trades: usize,
    tally: EventTally,
}

impl Simulator {
    /// Empty book, last trade price `p0`, clock at zero.
    pub fn new(params: ModelParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Simulator {
            book: OrderBook::new(params.grid_size, params.p0)?,
            params,
            clock: 0.0,
            rng: rng_from_seed(seed),
            events: 0,
            trades: 0,
            tally: EventTally::default(),
        })
    }

    /// Starts from an arbitrary book; `params` must describe the same grid.
    pub fn with_book(params: ModelParams, book: OrderBook, seed: u64) -> Result<Self> {
        params.validate()?;
        if book.grid_size() != params.grid_size {
            return Err(Error::InvalidParams(format!(
                "book has {} price classes but N = {}",
                book.grid_size(),
                params.grid_size
            )));
        }
        let mut sim = Simulator::new(params, seed)?;
        sim.book = book;
        Ok(sim)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn events(&self) -> usize {
        self.events
    }

    pub fn tally(&self) -> EventTally {
        self.tally
    }

    /// Draws the waiting time and event type, then applies the event.
    pub fn step(&mut self) -> StepOutcome {
        let waiting_time = draw_waiting_time(self.params.total_rate(), &mut self.rng)
            .expect("validated rates are positive");
        let event = draw_event_type(&self.params, &mut self.rng);
        self.apply(event, waiting_time)
    }

    /// Applies an event of a given type. The type draw is still consumed so
    /// the stream stays aligned with [`Simulator::step`].
    pub fn step_forced(&mut self, event: EventType) -> StepOutcome {
        let waiting_time = draw_waiting_time(self.params.total_rate(), &mut self.rng)
            .expect("validated rates are positive");
        let _ = draw_event_type(&self.params, &mut self.rng);
        self.apply(event, waiting_time)
    }

    fn apply(&mut self, event: EventType, waiting_time: f64) -> StepOutcome {
        self.clock += waiting_time;
        self.events += 1;
        let mut outcome = StepOutcome {
            event,
            waiting_time,
            placed: None,
            trade: None,
        };
        match event {
            EventType::LimitAsk => outcome.placed = self.place(Side::Ask),
            EventType::LimitBid => outcome.placed = self.place(Side::Bid),
            EventType::MarketBuy => outcome.trade = self.execute(Side::Ask),
            EventType::MarketSell => outcome.trade = self.execute(Side::Bid),
        }
        outcome
    }

    fn place(&mut self, side: Side) -> Option<PriceClass> {
        let interval = self.book.placement_interval(side, self.params.window);
        if interval.is_empty() {
            self.tally.limit_discarded += 1;
            return None;
        }
        let (lo, hi) = interval.into_inner();
        let len = hi - lo + 1;
        let u: f64 = StandardUniform.sample(&mut self.rng);
        let offset = ((u * len as f64) as usize).min(len - 1);
        let price = lo + offset;
        self.book
            .place_limit(side, price)
            .expect("placement interval never crosses the book");
        self.tally.limit_placed += 1;
        Some(price)
    }

    fn execute(&mut self, side: Side) -> Option<TradeRecord> {
        match self.book.execute_market(side) {
            Some(price) => {
                let record = TradeRecord {
                    index: self.trades,
                    epoch: self.clock,
                    price,
                };
                self.trades += 1;
                self.tally.market_executed += 1;
                Some(record)
            }
            None => {
                self.tally.market_unfilled += 1;
                None
            }
        }
    }

    fn queue_sample(&self) -> QueueSample {
        QueueSample {
            event_index: self.events - 1,
            epoch: self.clock,
            asks: self.book.total_asks(),
            bids: self.book.total_bids(),
        }
    }

    /// Runs `num_events` more events and collects the output.
    pub fn run(mut self, num_events: usize, options: RunOptions) -> SimOutput {
        let mut trades = Vec::new();
        let mut queue = Vec::with_capacity(if options.record_queue { num_events } else { 0 });
        for _ in 0..num_events {
            let outcome = self.step();
            if let Some(trade) = outcome.trade {
                trades.push(trade);
            }
            if options.record_queue {
                queue.push(self.queue_sample());
            }
        }
        SimOutput {
            trades,
            event_count: self.events,
            final_book: self.book,
            queue,
            tally: self.tally,
            final_clock: self.clock,
        }
    }
}

/// Simulates `num_events` events from the empty book at clock 0.
pub fn run(params: &ModelParams, num_events: usize, seed: u64) -> Result<SimOutput> {
    run_with(params, num_events, seed, RunOptions::default())
}

pub fn run_with(
    params: &ModelParams,
    num_events: usize,
    seed: u64,
    options: RunOptions,
) -> Result<SimOutput> {
    if num_events == 0 {
        return Err(Error::InvalidParams(
            "number of events must be at least 1".into(),
        ));
    }
    Ok(Simulator::new(*params, seed)?.run(num_events, options))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2(rho: f64) -> ModelParams {
        ModelParams::symmetric(500, 5, rho, 250).unwrap()
    }

    #[test]
    fn waiting_time_mean_and_variance() {
        let mut rng = rng_from_seed(1);
        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| draw_waiting_time(4.0, &mut rng).unwrap())
            .collect();
        assert!(draws.iter().all(|&d| d > 0.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.25).abs() < 0.001, "mean {mean}");

        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| draw_waiting_time(2.0, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((var - 0.25).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn waiting_time_rejects_bad_rate() {
        let mut rng = rng_from_seed(1);
        assert!(draw_waiting_time(0.0, &mut rng).is_err());
        assert!(draw_waiting_time(-1.0, &mut rng).is_err());
        assert!(draw_waiting_time(f64::NAN, &mut rng).is_err());
    }

    fn frequencies(params: &ModelParams, draws: usize) -> [f64; 4] {
        let mut rng = rng_from_seed(7);
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let idx = match draw_event_type(params, &mut rng) {
                EventType::LimitAsk => 0,
                EventType::LimitBid => 1,
                EventType::MarketBuy => 2,
                EventType::MarketSell => 3,
            };
            counts[idx] += 1;
        }
        counts.map(|c| c as f64 / draws as f64)
    }

    #[test]
    fn event_type_frequencies() {
        let sym = ModelParams::symmetric(500, 5, 1.0, 250).unwrap();
        for f in frequencies(&sym, 1_000_000) {
            assert!((f - 0.25).abs() < 0.005, "{f}");
        }
        let skew = ModelParams::new(500, 5, 3.0, 1.0, 1.0, 1.0, 250).unwrap();
        let f = frequencies(&skew, 1_000_000);
        assert!((f[0] - 0.5).abs() < 0.005, "{f:?}");

        let f = frequencies(&fig2(0.8), 1_000_000);
        let market = f[2] + f[3];
        assert!((market - 1.0 / 1.8).abs() < 0.005, "{market}");
    }

    #[test]
    fn uniform_maps_to_cumulative_rates() {
        let p = ModelParams::new(10, 2, 1.0, 2.0, 3.0, 4.0, 5).unwrap();
        // cumulative: ask 1, bid 3, buy (mu_b=4) 7, sell (mu_a=3) 10
        assert_eq!(event_from_uniform(&p, 0.0), EventType::LimitAsk);
        assert_eq!(event_from_uniform(&p, 0.099), EventType::LimitAsk);
        assert_eq!(event_from_uniform(&p, 0.2), EventType::LimitBid);
        assert_eq!(event_from_uniform(&p, 0.5), EventType::MarketBuy);
        assert_eq!(event_from_uniform(&p, 0.95), EventType::MarketSell);
    }

    #[test]
    fn forced_market_buy_on_empty_book() {
        let mut sim = Simulator::new(fig2(0.8), 3).unwrap();
        let before = sim.book().clone();
        let out = sim.step_forced(EventType::MarketBuy);
        assert!(out.trade.is_none());
        assert_eq!(sim.book(), &before);
        assert!(sim.clock() > 0.0);
        assert_eq!(sim.tally().market_unfilled, 1);
    }

    #[test]
    fn forced_limit_bid_on_empty_book() {
        for seed in 0..50 {
            let mut sim = Simulator::new(fig2(0.8), seed).unwrap();
            let out = sim.step_forced(EventType::LimitBid);
            let price = out.placed.unwrap();
            assert!((245..=250).contains(&price));
            assert_eq!(sim.book().total_bids(), 1);
            assert_eq!(sim.book().best_bid(), Some(price));
        }
    }

    #[test]
    fn forced_market_buy_depletes_single_ask() {
        let params = fig2(0.8);
        let mut book = OrderBook::new(500, 250).unwrap();
        book.place_limit(Side::Ask, 251).unwrap();
        let mut sim = Simulator::with_book(params, book, 11).unwrap();
        let out = sim.step_forced(EventType::MarketBuy);
        let trade = out.trade.unwrap();
        assert_eq!(trade.price, 251);
        assert_eq!(trade.index, 0);
        assert!(sim.book().is_empty());
        assert_eq!(sim.book().last_trade_price(), 251);
    }

    #[test]
    fn run_rejects_zero_events() {
        assert!(run(&fig2(0.8), 0, 1).is_err());
        let out = run(&fig2(0.8), 1, 1).unwrap();
        assert!(out.trades.len() <= 1);
        assert_eq!(out.event_count, 1);
    }

    #[test]
    fn run_is_deterministic() {
        let a = run_with(&fig2(0.8), 20_000, 42, RunOptions { record_queue: true }).unwrap();
        let b = run_with(&fig2(0.8), 20_000, 42, RunOptions { record_queue: true }).unwrap();
        assert_eq!(a, b);
        let c = run(&fig2(0.8), 20_000, 43).unwrap();
        assert_ne!(a.trades, c.trades);
    }

    #[test]
    fn events_are_fully_accounted() {
        for rho in [0.1, 0.8, 1.2, 6.0] {
            let out = run(&fig2(rho), 50_000, 5).unwrap();
            assert_eq!(out.tally.total(), 50_000);
            assert_eq!(out.tally.market_executed, out.trades.len());
        }
    }

    #[test]
    fn trade_epochs_increase_and_prices_stay_on_grid() {
        let out = run(&fig2(0.8), 100_000, 9).unwrap();
        for pair in out.trades.windows(2) {
            assert!(pair[1].epoch > pair[0].epoch);
            assert_eq!(pair[1].index, pair[0].index + 1);
        }
        assert!(out.trades.iter().all(|t| (1..=500).contains(&t.price)));
    }

    #[test]
    fn queue_samples_match_final_book() {
        let out = run_with(&fig2(1.2), 10_000, 2, RunOptions { record_queue: true }).unwrap();
        assert_eq!(out.queue.len(), 10_000);
        let last = out.queue.last().unwrap();
        assert_eq!(last.asks, out.final_book.total_asks());
        assert_eq!(last.bids, out.final_book.total_bids());
        assert_eq!(last.epoch, out.final_clock);
    }
}
