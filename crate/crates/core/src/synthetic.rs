//! Seeded synthetic markets for tests, benchmarks, and demos.
//!
//! Each symbol follows a log-random walk driven by a common market factor plus
//! its own idiosyncratic noise; overnight gaps, intraday ranges and volumes
//! are random too. The companion index is the share-weighted average of all
//! symbols, so its OHLC ordering holds by construction.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::market_data::{DailyBar, IndexBar, IndexSeries, MarketDay};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub symbols: usize,
    pub days: usize,
    pub seed: u64,
    pub start: NaiveDate,
    /// Daily standard deviation of the common factor.
    pub market_vol: f64,
    /// Idiosyncratic volatilities are drawn uniformly from this range.
    pub idio_vol: (f64, f64),
    pub gap_vol: f64,
    pub range_vol: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            symbols: 50,
            days: 500,
            seed: 7,
            start: NaiveDate::from_ymd_opt(2001, 1, 2).expect("valid date"),
            market_vol: 0.01,
            idio_vol: (0.005, 0.04),
            gap_vol: 0.003,
            range_vol: 0.006,
        }
    }
}

/// Weekdays from `start` onwards.
pub fn trading_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

struct Symbol {
    name: String,
    close: f64,
    idio: f64,
    base_volume: f64,
    shares: f64,
}

/// Streams one [`MarketDay`] and one index bar per trading date.
pub struct SyntheticMarket {
    rng: ChaCha8Rng,
    cfg: SynthConfig,
    symbols: Vec<Symbol>,
    dates: std::vec::IntoIter<NaiveDate>,
    std_normal: Normal<f64>,
}

impl SyntheticMarket {
    pub fn new(cfg: SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let width = cfg.symbols.max(1).to_string().len();
        let symbols = (0..cfg.symbols)
            .map(|i| Symbol {
                name: format!("S{i:0width$}"),
                close: 5.0 + 195.0 * rng.random::<f64>(),
                idio: cfg.idio_vol.0 + (cfg.idio_vol.1 - cfg.idio_vol.0) * rng.random::<f64>(),
                base_volume: 10f64.powf(3.0 + 4.0 * rng.random::<f64>()),
                shares: 10f64.powf(6.0 + 3.0 * rng.random::<f64>()),
            })
            .collect();
        let dates = trading_dates(cfg.start, cfg.days).into_iter();
        Self { rng, cfg, symbols, dates, std_normal: Normal::new(0.0, 1.0).expect("unit normal") }
    }

    fn z(&mut self) -> f64 {
        self.std_normal.sample(&mut self.rng)
    }

    /// Next day's cross-section and the matching index bar.
    pub fn next_day(&mut self) -> Option<(MarketDay, IndexBar)> {
        let date = self.dates.next()?;
        let common = self.cfg.market_vol * self.z();
        let mut bars = Vec::with_capacity(self.symbols.len());
        let (mut io, mut ih, mut il, mut ic, mut iw, mut iv) = (0.0, 0.0, 0.0, 0.0, 0.0, 0u64);
        for k in 0..self.symbols.len() {
            let gap = self.cfg.gap_vol * self.z();
            let idio = self.symbols[k].idio * self.z();
            let up = (self.cfg.range_vol * self.z()).abs();
            let down = (self.cfg.range_vol * self.z()).abs();
            let vol_noise = 0.4 * self.z();
            let s = &mut self.symbols[k];
            let open = s.close * gap.exp();
            let close = open * (common + idio).exp();
            let high = open.max(close) * up.exp();
            let low = open.min(close) * (-down).exp();
            let volume = (s.base_volume * vol_noise.exp()).round().max(1.0) as u64;
            s.close = close;
            io += s.shares * open;
            ih += s.shares * high;
            il += s.shares * low;
            ic += s.shares * close;
            iw += s.shares;
            iv += volume;
            bars.push(DailyBar { symbol: s.name.clone(), open, high, low, close, volume });
        }
        let day = MarketDay::new(date, bars).expect("unique synthetic symbols");
        let index = IndexBar::new(date, io / iw, ih / iw, il / iw, ic / iw, iv);
        Some((day, index))
    }

    /// Generates everything at once.
    pub fn collect(mut self) -> (Vec<MarketDay>, IndexSeries) {
        let mut days = Vec::with_capacity(self.cfg.days);
        let mut index = Vec::with_capacity(self.cfg.days);
        while let Some((d, b)) = self.next_day() {
            days.push(d);
            index.push(b);
        }
        (days, IndexSeries::new("SYNTH", index).expect("increasing synthetic dates"))
    }
}

impl Iterator for SyntheticMarket {
    type Item = MarketDay;

    fn next(&mut self) -> Option<MarketDay> {
        self.next_day().map(|(d, _)| d)
    }
}
