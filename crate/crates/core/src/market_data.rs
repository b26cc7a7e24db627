//! End-of-day file ingestion and the in-memory market model.
//!
//! Two input layouts are supported:
//!
//! * EOD files with one row per symbol: `Symbol,Open,High,Low,Close,Volume`.
//!   One file per market per day, named `<MARKET>_<YYYYMMDD>.csv`.
//! * Index files with one row per day: `Date,Open,High,Low,Close[,Adj Close],Volume`
//!   (the usual Yahoo-style download).
//!
//! Both may be comma or tab delimited, with LF or CRLF line endings. A header
//! row is detected and, when present, used to locate columns by name.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// One symbol's OHLCV record for one trading day.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyBar {
    pub symbol: String,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

impl DailyBar {
    pub fn new(symbol: impl Into<String>, open: f64, high: f64, low: f64, close: f64, volume: u64) -> Self {
        Self { symbol: symbol.into(), open, high, low, close, volume }
    }

    /// Traded value `close * volume`.
    #[inline]
    pub fn traded_value(&self) -> f64 {
        self.close * self.volume as f64
    }
}

/// Why a bar is excluded from the cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    NonPositivePrice,
    OhlcOrdering,
    ZeroVolume,
}

impl RejectReason {
    /// Stable machine-readable code.
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::NonPositivePrice => "nonpositive-price",
            RejectReason::OhlcOrdering => "ohlc-ordering",
            RejectReason::ZeroVolume => "zero-volume",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

fn check_prices(open: f64, high: f64, low: f64, close: f64) -> Option<RejectReason> {
    let prices = [open, high, low, close];
    if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Some(RejectReason::NonPositivePrice);
    }
    if low > open.min(close) || high < open.max(close) || low > high {
        return Some(RejectReason::OhlcOrdering);
    }
    None
}

/// Accept iff prices are positive, correctly ordered, and volume is nonzero.
pub fn validate_bar(bar: &DailyBar) -> Verdict {
    if let Some(r) = check_prices(bar.open, bar.high, bar.low, bar.close) {
        return Verdict::Reject(r);
    }
    if bar.volume == 0 {
        return Verdict::Reject(RejectReason::ZeroVolume);
    }
    Verdict::Accept
}

/// All bars traded on one date, sorted by symbol.
///
/// Zero-volume bars are kept so that symbol counts can be reported both ways,
/// but they never enter the cross-section (see [`MarketDay::accepted`]).
#[derive(Debug, Clone, PartialEq)]
pub struct MarketDay {
    date: NaiveDate,
    bars: Vec<DailyBar>,
}

impl MarketDay {
    pub fn new(date: NaiveDate, mut bars: Vec<DailyBar>) -> Result<Self> {
        if bars.is_empty() {
            return Err(Error::EmptyMarketDay);
        }
        bars.sort_unstable_by(|a, b| a.symbol.cmp(&b.symbol));
        if let Some(w) = bars.windows(2).find(|w| w[0].symbol == w[1].symbol) {
            return Err(Error::DuplicateSymbol(w[0].symbol.clone()));
        }
        Ok(Self { date, bars })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    /// Every bar, in ascending symbol order.
    pub fn bars(&self) -> &[DailyBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn get(&self, symbol: &str) -> Option<&DailyBar> {
        self.bars.binary_search_by(|b| b.symbol.as_str().cmp(symbol)).ok().map(|i| &self.bars[i])
    }

    /// Bars that pass [`validate_bar`], in ascending symbol order.
    pub fn accepted(&self) -> impl Iterator<Item = &DailyBar> + '_ {
        self.bars.iter().filter(|b| validate_bar(b).is_accept())
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted().count()
    }

    pub fn zero_volume_count(&self) -> usize {
        self.bars.iter().filter(|b| b.volume == 0).count()
    }
}

/// One dated OHLCV record of a market index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

impl IndexBar {
    pub fn new(date: NaiveDate, open: f64, high: f64, low: f64, close: f64, volume: u64) -> Self {
        Self { date, open, high, low, close, volume }
    }

    pub fn validate(&self) -> Option<RejectReason> {
        check_prices(self.open, self.high, self.low, self.close)
    }
}

/// A named, strictly date-ordered index series.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    name: String,
    bars: Vec<IndexBar>,
}

impl IndexSeries {
    pub fn new(name: impl Into<String>, bars: Vec<IndexBar>) -> Result<Self> {
        for w in bars.windows(2) {
            if w[1].date == w[0].date {
                return Err(Error::DuplicateDate(w[1].date));
            }
            if w[1].date < w[0].date {
                return Err(Error::NonMonotoneDates(w[1].date));
            }
        }
        Ok(Self { name: name.into(), bars })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bars(&self) -> &[IndexBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.bars.iter().map(|b| b.date)
    }

    /// The sub-series whose dates fall in `from..=to`.
    pub fn slice_dates(&self, from: NaiveDate, to: NaiveDate) -> IndexSeries {
        let bars = self.bars.iter().filter(|b| b.date >= from && b.date <= to).copied().collect();
        IndexSeries { name: self.name.clone(), bars }
    }
}

/// Why an input row was dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowProblem {
    MissingFields { expected: usize, found: usize },
    BadNumber { field: &'static str, text: String },
    BadDate(String),
    Invalid(RejectReason),
    DuplicateSymbol(String),
}

impl fmt::Display for RowProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowProblem::MissingFields { expected, found } => {
                write!(f, "expected {expected} fields, found {found}")
            }
            RowProblem::BadNumber { field, text } => write!(f, "unparseable {field}: {text:?}"),
            RowProblem::BadDate(t) => write!(f, "malformed date {t:?}"),
            RowProblem::Invalid(r) => write!(f, "{r}"),
            RowProblem::DuplicateSymbol(s) => write!(f, "duplicate symbol {s:?}"),
        }
    }
}

/// A rejected input row and its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub line: u64,
    pub problem: RowProblem,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.problem)
    }
}

/// A parse result together with the rows that were rejected along the way.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub issues: Vec<RowIssue>,
}

fn sniff_delimiter(bytes: &[u8]) -> u8 {
    let first_line = bytes.split(|&b| b == b'\n').find(|l| !l.iter().all(u8::is_ascii_whitespace));
    match first_line {
        Some(l) if l.contains(&b'\t') => b'\t',
        Some(l) if !l.contains(&b',') && l.contains(&b';') => b';',
        _ => b',',
    }
}

fn read_records(bytes: &[u8]) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(bytes))
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec);
    }
    Ok(out)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn parse_price(field: &'static str, text: &str) -> std::result::Result<f64, RowProblem> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(RowProblem::BadNumber { field, text: text.to_string() }),
    }
}

/// Parses a share count, tolerating thousands separators ("1,878,600") and an
/// integral decimal form ("1878600.0").
fn parse_volume(text: &str) -> std::result::Result<u64, RowProblem> {
    let bad = || RowProblem::BadNumber { field: "volume", text: text.to_string() };
    let cleaned: String = text.chars().filter(|&c| c != ',' && c != '_').collect();
    if let Ok(v) = cleaned.parse::<u64>() {
        return Ok(v);
    }
    match cleaned.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(bad()),
    }
}

fn is_digit_group(s: &str) -> bool {
    s.len() == 3 && s.bytes().all(|b| b.is_ascii_digit())
}

/// Column positions resolved from a header row, or the positional default.
#[derive(Debug, Clone, Copy)]
struct EodColumns {
    symbol: usize,
    open: usize,
    high: usize,
    low: usize,
    close: usize,
    volume: usize,
}

impl EodColumns {
    const POSITIONAL: EodColumns = EodColumns { symbol: 0, open: 1, high: 2, low: 3, close: 4, volume: 5 };

    fn from_header(rec: &csv::StringRecord) -> Self {
        let find = |names: &[&str]| rec.iter().position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)));
        let resolved = (|| {
            Some(EodColumns {
                symbol: find(&["symbol", "ticker"])?,
                open: find(&["open"])?,
                high: find(&["high"])?,
                low: find(&["low"])?,
                close: find(&["close"])?,
                volume: find(&["volume", "vol"])?,
            })
        })();
        resolved.unwrap_or(Self::POSITIONAL)
    }

    fn max(&self) -> usize {
        [self.symbol, self.open, self.high, self.low, self.close, self.volume].into_iter().max().unwrap_or(0)
    }
}

fn parse_eod_row(rec: &csv::StringRecord, cols: &EodColumns) -> std::result::Result<DailyBar, RowProblem> {
    let need = cols.max() + 1;
    if rec.len() < need {
        return Err(RowProblem::MissingFields { expected: need, found: rec.len() });
    }
    let symbol = rec[cols.symbol].to_string();
    let open = parse_price("open", &rec[cols.open])?;
    let high = parse_price("high", &rec[cols.high])?;
    let low = parse_price("low", &rec[cols.low])?;
    let close = parse_price("close", &rec[cols.close])?;
    // An unquoted "1,878,600" in a comma-delimited file splits into trailing
    // three-digit groups; stitch them back together.
    let volume = if cols.volume == need - 1 && rec.len() > need && rec.iter().skip(need).all(is_digit_group) {
        let joined: String = rec.iter().skip(cols.volume).collect();
        parse_volume(&joined)?
    } else {
        parse_volume(&rec[cols.volume])?
    };
    if let Some(r) = check_prices(open, high, low, close) {
        return Err(RowProblem::Invalid(r));
    }
    Ok(DailyBar { symbol, open, high, low, close, volume })
}

/// Parses one EOD file into a [`MarketDay`].
///
/// Malformed rows and rows with invalid prices are dropped and reported.
/// Zero-volume rows are retained. A repeated symbol keeps its first row.
pub fn parse_eod_file(bytes: &[u8], date: NaiveDate) -> Result<Parsed<MarketDay>> {
    let records = read_records(bytes)?;
    let mut iter = records.iter().peekable();
    let mut cols = EodColumns::POSITIONAL;
    if let Some(first) = iter.peek() {
        let looks_numeric = first.get(1).is_some_and(|f| f.parse::<f64>().is_ok());
        if !looks_numeric {
            cols = EodColumns::from_header(first);
            iter.next();
        }
    }

    let mut bars = Vec::new();
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for rec in iter {
        match parse_eod_row(rec, &cols) {
            Ok(bar) => {
                if seen.contains(&bar.symbol) {
                    issues.push(RowIssue { line: line_of(rec), problem: RowProblem::DuplicateSymbol(bar.symbol) });
                } else {
                    seen.insert(bar.symbol.clone());
                    bars.push(bar);
                }
            }
            Err(problem) => issues.push(RowIssue { line: line_of(rec), problem }),
        }
    }
    let day = MarketDay::new(date, bars)?;
    Ok(Parsed { value: day, issues })
}

/// Writes a day back out in the EOD layout, with a header row.
///
/// Prices use the shortest representation that round-trips exactly.
pub fn write_eod_file<W: Write>(day: &MarketDay, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Symbol", "Open", "High", "Low", "Close", "Volume"])?;
    for b in day.bars() {
        w.write_record([
            b.symbol.clone(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an index series as `Date,Open,High,Low,Close,Volume`.
pub fn write_index_csv<W: Write>(series: &IndexSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Date", "Open", "High", "Low", "Close", "Volume"])?;
    for b in series.bars() {
        w.write_record([
            b.date.format("%Y-%m-%d").to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").or_else(|_| NaiveDate::parse_from_str(text, "%Y%m%d")).ok()
}

#[derive(Debug, Clone, Copy)]
struct IndexColumns {
    date: usize,
    open: usize,
    high: usize,
    low: usize,
    close: usize,
    volume: usize,
}

impl IndexColumns {
    fn positional(width: usize) -> Self {
        // Date,Open,High,Low,Close,Volume or the Yahoo order with Adj Close before Volume.
        let volume = if width >= 7 { 6 } else { 5 };
        IndexColumns { date: 0, open: 1, high: 2, low: 3, close: 4, volume }
    }

    fn from_header(rec: &csv::StringRecord) -> Result<Self> {
        let norm = |s: &str| s.to_ascii_lowercase().replace([' ', '_', '-'], "");
        let find = |name: &str| {
            rec.iter()
                .position(|h| norm(h) == name)
                .ok_or_else(|| Error::Parse(format!("index header lacks a {name:?} column")))
        };
        Ok(IndexColumns {
            date: find("date")?,
            open: find("open")?,
            high: find("high")?,
            low: find("low")?,
            close: find("close")?,
            volume: find("volume")?,
        })
    }

    fn max(&self) -> usize {
        [self.date, self.open, self.high, self.low, self.close, self.volume].into_iter().max().unwrap_or(0)
    }
}

fn parse_index_row(rec: &csv::StringRecord, cols: &IndexColumns) -> std::result::Result<IndexBar, RowProblem> {
    let need = cols.max() + 1;
    if rec.len() < need {
        return Err(RowProblem::MissingFields { expected: need, found: rec.len() });
    }
    let date = parse_date(&rec[cols.date]).ok_or_else(|| RowProblem::BadDate(rec[cols.date].to_string()))?;
    let bar = IndexBar {
        date,
        open: parse_price("open", &rec[cols.open])?,
        high: parse_price("high", &rec[cols.high])?,
        low: parse_price("low", &rec[cols.low])?,
        close: parse_price("close", &rec[cols.close])?,
        volume: parse_volume(&rec[cols.volume])?,
    };
    if let Some(r) = bar.validate() {
        return Err(RowProblem::Invalid(r));
    }
    Ok(bar)
}

/// Parses an index OHLCV file. Any "Adj Close" column is ignored.
///
/// Rows come out sorted by date; a repeated date is an error.
pub fn parse_index_csv(bytes: &[u8], name: &str) -> Result<Parsed<IndexSeries>> {
    let records = read_records(bytes)?;
    let Some(first) = records.first() else {
        return Err(Error::EmptySeries);
    };
    let (cols, body) = if parse_date(&first[0]).is_some() {
        (IndexColumns::positional(first.len()), &records[..])
    } else {
        (IndexColumns::from_header(first)?, &records[1..])
    };

    let mut bars = Vec::with_capacity(body.len());
    let mut issues = Vec::new();
    for rec in body {
        match parse_index_row(rec, &cols) {
            Ok(bar) => bars.push(bar),
            Err(problem) => issues.push(RowIssue { line: line_of(rec), problem }),
        }
    }
    if bars.is_empty() {
        return Err(Error::EmptySeries);
    }
    bars.sort_by_key(|b| b.date);
    let series = IndexSeries::new(name, bars)?;
    Ok(Parsed { value: series, issues })
}

/// `<MARKET>_<YYYYMMDD>.csv` → (market, date).
pub fn parse_market_file_name(name: &str) -> Option<(String, NaiveDate)> {
    let stem = name.strip_suffix(".csv").or_else(|| name.strip_suffix(".CSV"))?;
    let (market, date) = stem.rsplit_once('_')?;
    if market.is_empty() || date.len() != 8 {
        return None;
    }
    let date = NaiveDate::parse_from_str(date, "%Y%m%d").ok()?;
    Some((market.to_string(), date))
}

pub fn market_file_name(market: &str, date: NaiveDate) -> String {
    format!("{market}_{}.csv", date.format("%Y%m%d"))
}

/// Outcome of loading a directory of EOD files for one market.
#[derive(Debug, Clone)]
pub struct MarketData {
    pub market: String,
    /// Parsed days, ascending by date.
    pub days: Vec<MarketDay>,
    /// Per-file row rejections.
    pub issues: Vec<(PathBuf, RowIssue)>,
    /// Files that matched the naming scheme but could not be used.
    pub failed: Vec<(PathBuf, Error)>,
}

/// Loads every `<MARKET>_<YYYYMMDD>.csv` in `dir`. Files are parsed in parallel.
///
/// With `market = None` the directory must hold exactly one market.
pub fn load_market_dir(dir: &Path, market: Option<&str>) -> Result<MarketData> {
    let mut found: Vec<(PathBuf, String, NaiveDate)> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let Some(name) = entry.file_name().to_str().map(str::to_string) else { continue };
        if let Some((m, d)) = parse_market_file_name(&name) {
            if market.is_none_or(|want| want == m) {
                found.push((entry.path(), m, d));
            }
        }
    }
    let mut markets: Vec<&str> = found.iter().map(|(_, m, _)| m.as_str()).collect();
    markets.sort_unstable();
    markets.dedup();
    let market = match (market, markets.as_slice()) {
        (Some(m), _) => m.to_string(),
        (None, [m]) => m.to_string(),
        (None, []) => {
            return Err(Error::InvalidArgument(format!("no <MARKET>_<YYYYMMDD>.csv files in {}", dir.display())))
        }
        (None, many) => {
            return Err(Error::InvalidArgument(format!("several markets in directory ({}); pick one", many.join(", "))))
        }
    };
    found.sort_by_key(|(_, _, d)| *d);
    if let Some(w) = found.windows(2).find(|w| w[0].2 == w[1].2) {
        return Err(Error::DuplicateDate(w[0].2));
    }

    let results: Vec<(PathBuf, Result<Parsed<MarketDay>>)> = found
        .into_par_iter()
        .map(|(path, _, date)| {
            let parsed = std::fs::read(&path).map_err(Error::from).and_then(|bytes| parse_eod_file(&bytes, date));
            (path, parsed)
        })
        .collect();

    let mut data = MarketData { market, days: Vec::new(), issues: Vec::new(), failed: Vec::new() };
    for (path, res) in results {
        match res {
            Ok(parsed) => {
                data.issues.extend(parsed.issues.into_iter().map(|i| (path.clone(), i)));
                data.days.push(parsed.value);
            }
            Err(e) => data.failed.push((path, e)),
        }
    }
    Ok(data)
}
