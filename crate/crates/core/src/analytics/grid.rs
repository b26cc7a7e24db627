//! Interval × window comparison grids between index estimators and CSIE.
//!
//! For a window `w`, the index side is the `w`-day rolling estimator series
//! and the market side is the `w`-day moving average of daily CSIE. Intervals
//! are anchored at the latest common date and extend backwards.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;

use super::{mean_var, moving_average, pearson, rolling_estimate_with, vol_beta, DatedSeries};
use crate::cross_section::CsieDay;
use crate::error::{Error, Result};
use crate::estimators::{EntropySign, Estimator};
use crate::market_data::IndexSeries;
use crate::numeric::fixed8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Mean,
    Variance,
    Pearson,
    Beta,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [Statistic::Mean, Statistic::Variance, Statistic::Pearson, Statistic::Beta];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Variance => "variance",
            Statistic::Pearson => "pearson",
            Statistic::Beta => "beta",
        }
    }

    /// Mean and variance grids carry a CSIE column of their own.
    pub fn has_market_column(self) -> bool {
        matches!(self, Statistic::Mean | Statistic::Variance)
    }
}

/// Trailing extent of a grid row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interval {
    Days(usize),
    All,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Days(n) => write!(f, "{n}"),
            Interval::All => f.write_str("all"),
        }
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Interval::All);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Interval::Days(n)),
            _ => Err(Error::InvalidArgument(format!("bad interval {s:?}"))),
        }
    }
}

/// How an interval of `t` days is cut out of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntervalSemantics {
    /// Last `t` points of the already-windowed, aligned series.
    #[default]
    SmoothedPoints,
    /// Last `t` raw common trading days, windowed afterwards.
    RawDays,
}

impl FromStr for IntervalSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "smoothed-points" => Ok(IntervalSemantics::SmoothedPoints),
            "raw-days" => Ok(IntervalSemantics::RawDays),
            other => Err(Error::InvalidArgument(format!(
                "bad interval semantics {other:?} (expected smoothed-points or raw-days)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub estimators: Vec<Estimator>,
    pub intervals: Vec<Interval>,
    pub windows: Vec<usize>,
    pub semantics: IntervalSemantics,
    /// Entropy variant for the mean and variance grids. Correlation and beta
    /// always use absolute values.
    pub moment_sign: EntropySign,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            estimators: Estimator::ALL.to_vec(),
            intervals: [30, 60, 120, 260, 520, 780, 1300]
                .into_iter()
                .map(Interval::Days)
                .chain([Interval::All])
                .collect(),
            windows: vec![5, 10, 20, 30],
            semantics: IntervalSemantics::SmoothedPoints,
            moment_sign: EntropySign::Signed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    InsufficientData,
    /// The statistic has no value here (zero variance, failed estimator).
    Undefined,
}

impl Cell {
    pub fn value(self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => f.write_str(&fixed8(*v)),
            _ => f.write_str("NA"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub interval: Interval,
    pub window: usize,
    /// One cell per estimator, in [`ComparisonGrid::estimators`] order.
    pub cells: Vec<Cell>,
    /// The CSIE column (mean and variance only).
    pub market: Option<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonGrid {
    pub statistic: Statistic,
    pub estimators: Vec<Estimator>,
    pub rows: Vec<GridRow>,
}

impl ComparisonGrid {
    pub fn cell(&self, interval: Interval, window: usize, estimator: Estimator) -> Option<Cell> {
        let col = self.estimators.iter().position(|&e| e == estimator)?;
        self.rows.iter().find(|r| r.interval == interval && r.window == window).map(|r| r.cells[col])
    }
}

fn sign_for(statistic: Statistic, spec: &GridSpec) -> EntropySign {
    if statistic.has_market_column() {
        spec.moment_sign
    } else {
        EntropySign::Absolute
    }
}

fn sorted_intersection(a: &[NaiveDate], b: &[NaiveDate]) -> Vec<NaiveDate> {
    a.iter().copied().filter(|d| b.binary_search(d).is_ok()).collect()
}

fn single_stat(statistic: Statistic, values: &[f64]) -> Cell {
    match mean_var(values) {
        Ok((m, v)) => Cell::Value(if statistic == Statistic::Mean { m } else { v }),
        Err(_) => Cell::InsufficientData,
    }
}

fn pair_stat(statistic: Statistic, index: &[f64], market: &[f64]) -> Cell {
    let r = match statistic {
        Statistic::Pearson => pearson(index, market),
        Statistic::Beta => vol_beta(index, market),
        Statistic::Mean | Statistic::Variance => unreachable!("moments take one series"),
    };
    match r {
        Ok(v) => Cell::Value(v),
        Err(Error::InsufficientData { .. }) => Cell::InsufficientData,
        Err(_) => Cell::Undefined,
    }
}

/// Windowed series for one window length: `None` marks an estimator whose
/// rolling series could not be built.
struct Windowed {
    index: Vec<Option<DatedSeries>>,
    market: Option<DatedSeries>,
}

fn windowed(
    index: &IndexSeries,
    market: &DatedSeries,
    estimators: &[Estimator],
    w: usize,
    sign: EntropySign,
) -> Windowed {
    Windowed {
        index: estimators.iter().map(|&e| rolling_estimate_with(index, e, w, sign).ok().map(|v| v.series)).collect(),
        market: moving_average(market, w).ok(),
    }
}

/// Evaluates all cells of one row on the given windowed series. `take`
/// limits the common dates to the trailing `take` points.
fn evaluate(
    statistic: Statistic,
    data: &Windowed,
    take: Option<usize>,
    min_points: usize,
) -> (Vec<Cell>, Option<Cell>) {
    let n_est = data.index.len();
    let insufficient =
        || (vec![Cell::InsufficientData; n_est], statistic.has_market_column().then_some(Cell::InsufficientData));
    let Some(market) = &data.market else { return insufficient() };

    let mut common = market.dates().to_vec();
    for s in data.index.iter().flatten() {
        common = sorted_intersection(&common, s.dates());
    }
    let common = match take {
        Some(t) if common.len() < t => return insufficient(),
        Some(t) => common[common.len() - t..].to_vec(),
        None => common,
    };
    if common.len() < min_points {
        return insufficient();
    }

    let market_vals = market.restrict(&common);
    let cells = data
        .index
        .iter()
        .map(|s| match s {
            None => Cell::Undefined,
            Some(s) => {
                let idx = s.restrict(&common);
                if statistic.has_market_column() {
                    single_stat(statistic, idx.values())
                } else {
                    pair_stat(statistic, idx.values(), market_vals.values())
                }
            }
        })
        .collect();
    let market_cell = statistic.has_market_column().then(|| single_stat(statistic, market_vals.values()));
    (cells, market_cell)
}

/// Builds one comparison grid. Rows run over intervals within each window.
pub fn comparison_grid(
    index: &IndexSeries,
    market: &[CsieDay],
    spec: &GridSpec,
    statistic: Statistic,
) -> Result<ComparisonGrid> {
    let sign = sign_for(statistic, spec);
    let market_series = DatedSeries::from_csie(market, sign)?;
    let index_dates: Vec<NaiveDate> = index.dates().collect();
    let raw_common = sorted_intersection(&index_dates, market_series.dates());
    if raw_common.is_empty() {
        return Err(Error::NoCommonDates);
    }
    let min_points = if statistic.has_market_column() { 1 } else { 2 };

    let mut rows = Vec::with_capacity(spec.windows.len() * spec.intervals.len());
    for &w in &spec.windows {
        let full = match spec.semantics {
            IntervalSemantics::SmoothedPoints => Some(windowed(index, &market_series, &spec.estimators, w, sign)),
            IntervalSemantics::RawDays => None,
        };
        for &interval in &spec.intervals {
            let (cells, market_cell) = match (&full, interval) {
                (Some(data), Interval::Days(t)) => evaluate(statistic, data, Some(t), min_points),
                (Some(data), Interval::All) => evaluate(statistic, data, None, min_points),
                (None, interval) => {
                    let t = match interval {
                        Interval::Days(t) => t,
                        Interval::All => raw_common.len(),
                    };
                    if raw_common.len() < t {
                        (
                            vec![Cell::InsufficientData; spec.estimators.len()],
                            statistic.has_market_column().then_some(Cell::InsufficientData),
                        )
                    } else {
                        let days = &raw_common[raw_common.len() - t..];
                        let sub_index = index.slice_dates(days[0], days[days.len() - 1]);
                        let sub_market = market_series.restrict(days);
                        let data = windowed(&sub_index, &sub_market, &spec.estimators, w, sign);
                        evaluate(statistic, &data, None, min_points)
                    }
                }
            };
            rows.push(GridRow { interval, window: w, cells, market: market_cell });
        }
    }
    Ok(ComparisonGrid { statistic, estimators: spec.estimators.clone(), rows })
}

/// One row per (interval, window); `NA` marks cells without a value.
pub fn write_grid_csv<W: Write>(grid: &ComparisonGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["interval".to_string(), "window".to_string()];
    header.extend(grid.estimators.iter().map(|e| e.code().to_string()));
    if grid.statistic.has_market_column() {
        header.push("csie".into());
    }
    w.write_record(&header)?;
    for row in &grid.rows {
        let mut rec = vec![row.interval.to_string(), row.window.to_string()];
        rec.extend(row.cells.iter().map(Cell::to_string));
        if let Some(m) = row.market {
            rec.push(m.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
