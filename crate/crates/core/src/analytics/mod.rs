//! Dated series, rolling estimators, and the comparison statistics.

mod grid;

pub use grid::{
    comparison_grid, write_grid_csv, Cell, ComparisonGrid, GridRow, GridSpec, Interval, IntervalSemantics, Statistic,
};

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::cross_section::CsieDay;
use crate::error::{Error, Result};
use crate::estimators::{EntropySign, Estimator, OhlcWindow};
use crate::market_data::IndexSeries;
use crate::numeric::CompensatedSum;

/// Values on strictly increasing dates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatedSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl DatedSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch(dates.len(), values.len()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneDates(w[1]));
        }
        Ok(Self { dates, values })
    }

    pub fn from_pairs<I: IntoIterator<Item = (NaiveDate, f64)>>(pairs: I) -> Result<Self> {
        let (dates, values) = pairs.into_iter().unzip();
        Self::new(dates, values)
    }

    /// Signed or absolute daily CSIE values.
    pub fn from_csie(days: &[CsieDay], sign: EntropySign) -> Result<Self> {
        Self::from_pairs(days.iter().map(|d| {
            let v = match sign {
                EntropySign::Signed => d.csie_signed,
                EntropySign::Absolute => d.csie_abs,
            };
            (d.date, v)
        }))
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }

    /// The last `n` points (all of them if shorter).
    pub fn tail(&self, n: usize) -> DatedSeries {
        let start = self.len().saturating_sub(n);
        DatedSeries { dates: self.dates[start..].to_vec(), values: self.values[start..].to_vec() }
    }

    /// Points whose dates appear in the sorted slice `keep`.
    pub fn restrict(&self, keep: &[NaiveDate]) -> DatedSeries {
        let (dates, values) = self.iter().filter(|(d, _)| keep.binary_search(d).is_ok()).unzip();
        DatedSeries { dates, values }
    }
}

/// A rolling estimator series.
#[derive(Debug, Clone, PartialEq)]
pub struct VolSeries {
    pub estimator: Estimator,
    pub window: usize,
    pub series: DatedSeries,
}

/// Trailing moving average; the first point sits on the `w`-th date.
pub fn moving_average(s: &DatedSeries, w: usize) -> Result<DatedSeries> {
    if w == 0 {
        return Err(Error::InvalidArgument("moving-average window must be positive".into()));
    }
    if s.len() < w {
        return Err(Error::InsufficientData { needed: w, available: s.len() });
    }
    let values = s.values.windows(w).map(mean_of).collect();
    Ok(DatedSeries { dates: s.dates[w - 1..].to_vec(), values })
}

pub fn rolling_estimate(series: &IndexSeries, estimator: Estimator, w: usize) -> Result<VolSeries> {
    rolling_estimate_with(series, estimator, w, EntropySign::Signed)
}

/// Applies `estimator` to every trailing window of `w` days.
///
/// Estimators that need the previous close start one bar later, so a series
/// of `N` bars gives `N − w + 1` points, or `N − w` for those.
pub fn rolling_estimate_with(
    series: &IndexSeries,
    estimator: Estimator,
    w: usize,
    sign: EntropySign,
) -> Result<VolSeries> {
    if w < estimator.min_window() {
        return Err(Error::WindowTooShort { got: w, min: estimator.min_window() });
    }
    let span = estimator.span(w);
    let bars = series.bars();
    if bars.len() < span {
        return Err(Error::InsufficientData { needed: span, available: bars.len() });
    }
    let points: Vec<(NaiveDate, f64)> = (span..=bars.len())
        .into_par_iter()
        .map(|end| {
            let slice = &bars[end - span..end];
            let window = if estimator.needs_seed() { OhlcWindow::seeded(slice)? } else { OhlcWindow::new(slice)? };
            let est = estimator.estimate(&window, sign)?;
            Ok((est.as_of, est.value))
        })
        .collect::<Result<_>>()?;
    Ok(VolSeries { estimator, window: w, series: DatedSeries::from_pairs(points)? })
}

fn mean_of(values: &[f64]) -> f64 {
    if values.iter().all(|&v| v == values[0]) {
        return values[0];
    }
    values.iter().copied().collect::<CompensatedSum>().value() / values.len() as f64
}

/// Population mean and variance (divisor `n`).
pub fn mean_var(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mean = mean_of(values);
    let ss = values.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().value();
    let var = if is_flat(ss, values) { 0.0 } else { ss / values.len() as f64 };
    Ok((mean, var))
}

/// Two series paired on their common dates.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub dates: Vec<NaiveDate>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Inner join on dates.
pub fn align(a: &DatedSeries, b: &DatedSeries) -> Result<Aligned> {
    let mut out = Aligned { dates: Vec::new(), a: Vec::new(), b: Vec::new() };
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a.dates[i].cmp(&b.dates[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.dates.push(a.dates[i]);
                out.a.push(a.values[i]);
                out.b.push(b.values[j]);
                i += 1;
                j += 1;
            }
        }
    }
    if out.dates.is_empty() {
        return Err(Error::NoCommonDates);
    }
    Ok(out)
}

/// Centered sums `(Σ(a−ā)², Σ(b−b̄)², Σ(a−ā)(b−b̄))`.
fn co_moments(a: &[f64], b: &[f64]) -> Result<(f64, f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, available: a.len() });
    }
    let (ma, mb) = (mean_of(a), mean_of(b));
    let mut saa = CompensatedSum::new();
    let mut sbb = CompensatedSum::new();
    let mut sab = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        saa.add(dx * dx);
        sbb.add(dy * dy);
        sab.add(dx * dy);
    }
    let (mut saa, mut sbb, mut sab) = (saa.value(), sbb.value(), sab.value());
    // Rounding in the mean leaves ulp-sized residuals on constant input.
    if is_flat(saa, a) {
        (saa, sab) = (0.0, 0.0);
    }
    if is_flat(sbb, b) {
        (sbb, sab) = (0.0, 0.0);
    }
    Ok((saa, sbb, sab))
}

fn is_flat(sum_sq: f64, xs: &[f64]) -> bool {
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (sum_sq / xs.len() as f64).sqrt() <= 8.0 * f64::EPSILON * scale
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let (saa, sbb, sab) = co_moments(a, b)?;
    if saa <= 0.0 || sbb <= 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    // One square root keeps r exactly ±1 for exactly proportional input.
    let denom = (saa * sbb).sqrt();
    let denom = if denom.is_finite() && denom > 0.0 { denom } else { saa.sqrt() * sbb.sqrt() };
    Ok((sab / denom).clamp(-1.0, 1.0))
}

/// Volatility beta `Cov(index, market) / Var(market)`, population moments.
pub fn vol_beta(index_vol: &[f64], market_csie: &[f64]) -> Result<f64> {
    let (_, smm, sim) = co_moments(index_vol, market_csie)?;
    if smm <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sim / smm)
}
