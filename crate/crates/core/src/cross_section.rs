//! Cross-sectional intrinsic entropy (CSIE) of one market day.
//!
//! Every symbol traded on a day contributes an entropy weight `ψ ln ψ`, where
//! `ψ` is its share of the day's total traded value `S = Σ close·volume`. Two
//! components are weighted with it:
//!
//! * the open-to-close component, driven by the simple return `C/O − 1`;
//! * the range component, `(H/O − 1)(H/C − 1) + (L/O − 1)(L/C − 1)`.
//!
//! They are mixed as `(1 − f)·H_oc + f·H_olhc`, with
//! `f = (α − 1) / (α + (m + 1)/(m − 1))` for `m` symbols. The absolute variant
//! mixes `|H_oc|` and `|H_olhc|` instead.
//!
//! All reductions run in ascending symbol order with compensated summation,
//! so a day's result is bit-identical no matter how days are scheduled.

use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market_data::{DailyBar, MarketDay};
use crate::numeric::{fixed8, mixing_weight, xlogx, CompensatedSum};

pub const DEFAULT_ALPHA: f64 = 1.34;

/// A symbol's share of the day's traded value.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolWeight {
    pub symbol: String,
    pub psi: f64,
}

/// CSIE result for one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsieDay {
    pub date: NaiveDate,
    /// Symbols that carried weight (valid prices, nonzero volume).
    pub m: usize,
    /// All listed rows, including zero-volume ones.
    pub listed: usize,
    pub total_value: f64,
    pub f: f64,
    pub h_oc: f64,
    pub h_olhc: f64,
    pub csie_signed: f64,
    pub csie_abs: f64,
    /// Set when only one symbol traded; every value is then 0.
    pub degenerate: bool,
}

fn accepted(day: &MarketDay) -> Result<Vec<&DailyBar>> {
    let bars: Vec<&DailyBar> = day.accepted().collect();
    if bars.is_empty() {
        return Err(Error::EmptyCrossSection);
    }
    Ok(bars)
}

fn value_sum(bars: &[&DailyBar]) -> f64 {
    bars.iter().map(|b| b.traded_value()).collect::<CompensatedSum>().value()
}

/// Total traded value `Σ close·volume` over the day's accepted bars.
pub fn total_traded_value(day: &MarketDay) -> Result<f64> {
    Ok(value_sum(&accepted(day)?))
}

/// Weight `ψ = close·volume / S` of each accepted bar, in symbol order.
pub fn symbol_weights(day: &MarketDay) -> Result<Vec<SymbolWeight>> {
    let bars = accepted(day)?;
    let total = value_sum(&bars);
    Ok(bars.iter().map(|b| SymbolWeight { symbol: b.symbol.clone(), psi: b.traded_value() / total }).collect())
}

#[inline]
fn oc_term(b: &DailyBar) -> f64 {
    b.close / b.open - 1.0
}

#[inline]
fn olhc_term(b: &DailyBar) -> f64 {
    (b.high / b.open - 1.0) * (b.high / b.close - 1.0) + (b.low / b.open - 1.0) * (b.low / b.close - 1.0)
}

fn weighted_entropy<'a>(day: &'a MarketDay, weights: &[SymbolWeight], term: impl Fn(&DailyBar) -> f64) -> Result<f64> {
    let bars: Vec<&'a DailyBar> = day.accepted().collect();
    if bars.len() != weights.len() {
        return Err(Error::LengthMismatch(bars.len(), weights.len()));
    }
    let mut acc = CompensatedSum::new();
    for (b, w) in bars.iter().zip(weights) {
        debug_assert_eq!(b.symbol, w.symbol);
        acc.add(term(b) * xlogx(w.psi));
    }
    Ok(-acc.value())
}

/// Open-to-close component `−Σ (C/O − 1) ψ ln ψ`.
pub fn csie_h_oc(day: &MarketDay, weights: &[SymbolWeight]) -> Result<f64> {
    weighted_entropy(day, weights, oc_term)
}

/// Range component `−Σ [(H/O − 1)(H/C − 1) + (L/O − 1)(L/C − 1)] ψ ln ψ`.
pub fn csie_h_olhc(day: &MarketDay, weights: &[SymbolWeight]) -> Result<f64> {
    weighted_entropy(day, weights, olhc_term)
}

/// Mixing weight `f = (α − 1) / (α + (m + 1)/(m − 1))`.
pub fn csie_weight_f(m: usize, alpha: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::DegenerateCrossSection(m));
    }
    Ok(mixing_weight(m, alpha))
}

/// CSIE of one day, both the signed and the absolute variant.
pub fn csie_day(day: &MarketDay, alpha: f64) -> Result<CsieDay> {
    let bars = accepted(day)?;
    let total = value_sum(&bars);
    let m = bars.len();

    let mut h_oc = CompensatedSum::new();
    let mut h_olhc = CompensatedSum::new();
    for b in &bars {
        let w = xlogx(b.traded_value() / total);
        h_oc.add(oc_term(b) * w);
        h_olhc.add(olhc_term(b) * w);
    }
    let h_oc = -h_oc.value();
    let h_olhc = -h_olhc.value();

    let out = if m == 1 {
        CsieDay {
            date: day.date(),
            m,
            listed: day.len(),
            total_value: total,
            f: 0.0,
            h_oc: 0.0,
            h_olhc: 0.0,
            csie_signed: 0.0,
            csie_abs: 0.0,
            degenerate: true,
        }
    } else {
        let f = mixing_weight(m, alpha);
        CsieDay {
            date: day.date(),
            m,
            listed: day.len(),
            total_value: total,
            f,
            h_oc,
            h_olhc,
            csie_signed: (1.0 - f) * h_oc + f * h_olhc,
            csie_abs: (1.0 - f) * h_oc.abs() + f * h_olhc.abs(),
            degenerate: false,
        }
    };
    Ok(out)
}

/// CSIE of each day. Days must be in strictly increasing date order.
///
/// Days are independent and computed in parallel on the current rayon pool;
/// the output is the same for any pool size.
pub fn csie_series(days: &[MarketDay], alpha: f64) -> Result<Vec<CsieDay>> {
    for w in days.windows(2) {
        if w[1].date() <= w[0].date() {
            return Err(Error::NonMonotoneDates(w[1].date()));
        }
    }
    days.par_iter().map(|d| csie_day(d, alpha)).collect()
}

pub const CSIE_CSV_HEADER: [&str; 9] =
    ["date", "m", "total_value", "f", "h_oc", "h_olhc", "csie_signed", "csie_abs", "degenerate_flag"];

/// Writes one row per day with eight-decimal fixed notation.
pub fn write_csie_csv<W: Write>(days: &[CsieDay], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSIE_CSV_HEADER)?;
    for d in days {
        w.write_record([
            d.date.format("%Y-%m-%d").to_string(),
            d.m.to_string(),
            fixed8(d.total_value),
            fixed8(d.f),
            fixed8(d.h_oc),
            fixed8(d.h_olhc),
            fixed8(d.csie_signed),
            fixed8(d.csie_abs),
            u8::from(d.degenerate).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
