//! Run configuration and its flat `key = value` file format.
//!
//! Settings from the command line are laid over the file, which is laid over
//! the defaults. Both sources go through the same string parsing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;

use crate::analytics::{GridSpec, Interval, IntervalSemantics};
use crate::clustering::PriceTransform;
use crate::cross_section::DEFAULT_ALPHA;
use crate::error::{Error, Result};
use crate::estimators::{EntropySign, Estimator};
use crate::market_data::parse_date;

pub const KEYS: [&str; 15] = [
    "market_dir",
    "market",
    "eod_file",
    "index",
    "estimators",
    "windows",
    "intervals",
    "alpha",
    "abs",
    "ma",
    "bubble",
    "out",
    "interval_semantics",
    "date",
    "log_prices",
];

/// What the bubble diameter encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleSize {
    /// Symbols that traded that day.
    Count,
    /// Total traded value.
    Value,
}

impl FromStr for BubbleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "count" => Ok(BubbleSize::Count),
            "value" => Ok(BubbleSize::Value),
            other => Err(Error::InvalidArgument(format!("bubble must be count or value, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub market_dir: Option<PathBuf>,
    pub market: Option<String>,
    /// A single EOD file, as an alternative to `market_dir`.
    pub eod_file: Option<PathBuf>,
    pub indexes: Vec<(String, PathBuf)>,
    pub estimators: Vec<Estimator>,
    /// Positive, ascending, no repeats.
    pub windows: Vec<usize>,
    pub intervals: Vec<Interval>,
    pub alpha: f64,
    pub sign: EntropySign,
    pub ma: Option<usize>,
    pub bubble: Option<BubbleSize>,
    pub out: PathBuf,
    pub semantics: IntervalSemantics,
    pub date: Option<NaiveDate>,
    pub transform: PriceTransform,
}

impl Default for RunConfig {
    fn default() -> Self {
        let grid = GridSpec::default();
        Self {
            market_dir: None,
            market: None,
            eod_file: None,
            indexes: Vec::new(),
            estimators: grid.estimators,
            windows: grid.windows,
            intervals: grid.intervals,
            alpha: DEFAULT_ALPHA,
            sign: EntropySign::Signed,
            ma: None,
            bubble: None,
            out: PathBuf::from("."),
            semantics: grid.semantics,
            date: None,
            transform: PriceTransform::Raw,
        }
    }
}

impl RunConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            estimators: self.estimators.clone(),
            intervals: self.intervals.clone(),
            windows: self.windows.clone(),
            semantics: self.semantics,
            moment_sign: self.sign,
        }
    }
}

/// Raw settings keyed by name; `index` may repeat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, Vec<String>>);

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Settings {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", n + 1)))?;
            s.push(k, v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidArgument(format!("unknown setting {key:?}")));
        }
        self.0.entry(key).or_default().push(value.into());
        Ok(())
    }

    /// Keys set here replace the same keys in `lower`.
    pub fn over(mut self, lower: Settings) -> Settings {
        for (k, v) in lower.0 {
            self.0.entry(k).or_insert(v);
        }
        self
    }

    fn last(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.last(key)
            .map(|v| v.trim().parse::<T>().map_err(|_| Error::InvalidArgument(format!("bad {key}: {v:?}"))))
            .transpose()
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            market_dir: self.last("market_dir").map(PathBuf::from),
            market: self.last("market").map(str::to_string),
            eod_file: self.last("eod_file").map(PathBuf::from),
            ..RunConfig::default()
        };
        if let Some(list) = self.0.get("index") {
            cfg.indexes = list.iter().map(|s| parse_index_arg(s)).collect::<Result<_>>()?;
        }
        if let Some(v) = self.last("estimators") {
            cfg.estimators = parse_estimators(v)?;
        }
        if let Some(v) = self.last("windows") {
            cfg.windows = parse_windows(v)?;
        }
        if let Some(v) = self.last("intervals") {
            cfg.intervals = parse_intervals(v)?;
        }
        if let Some(a) = self.parsed::<f64>("alpha")? {
            if !(a.is_finite() && a > 1.0) {
                return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {a}")));
            }
            cfg.alpha = a;
        }
        if self.parsed::<bool>("abs")?.unwrap_or(false) {
            cfg.sign = EntropySign::Absolute;
        }
        cfg.ma = self.parsed::<usize>("ma")?;
        if cfg.ma == Some(0) {
            return Err(Error::InvalidArgument("ma must be positive".into()));
        }
        cfg.bubble = self.parsed::<BubbleSize>("bubble")?;
        if let Some(v) = self.last("out") {
            cfg.out = PathBuf::from(v);
        }
        if let Some(v) = self.parsed::<IntervalSemantics>("interval_semantics")? {
            cfg.semantics = v;
        }
        cfg.date = self
            .last("date")
            .map(|v| parse_date(v.trim()).ok_or_else(|| Error::InvalidArgument(format!("bad date {v:?}"))))
            .transpose()?;
        if self.parsed::<bool>("log_prices")?.unwrap_or(false) {
            cfg.transform = PriceTransform::Log;
        }
        Ok(cfg)
    }
}

/// `NAME=PATH`, or a bare path named after its file stem.
pub fn parse_index_arg(s: &str) -> Result<(String, PathBuf)> {
    let s = s.trim();
    if let Some((name, path)) = s.split_once('=') {
        if name.is_empty() || path.is_empty() {
            return Err(Error::InvalidArgument(format!("bad index argument {s:?}")));
        }
        return Ok((name.to_string(), PathBuf::from(path)));
    }
    let path = PathBuf::from(s);
    let name = path
        .file_stem()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::InvalidArgument(format!("bad index argument {s:?}")))?
        .to_string();
    Ok((name, path))
}

fn items(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

pub fn parse_estimators(s: &str) -> Result<Vec<Estimator>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Estimator::ALL.to_vec());
    }
    let mut out: Vec<Estimator> = Vec::new();
    for t in items(s) {
        let e: Estimator = t.parse()?;
        if !out.contains(&e) {
            out.push(e);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no estimators selected".into()));
    }
    Ok(out)
}

pub fn parse_windows(s: &str) -> Result<Vec<usize>> {
    let mut out = items(s)
        .map(|t| match t.parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(Error::InvalidArgument(format!("windows must be positive integers, got {t:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidArgument("no windows given".into()));
    }
    Ok(out)
}

pub fn parse_intervals(s: &str) -> Result<Vec<Interval>> {
    let mut out = items(s).map(str::parse::<Interval>).collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|i| match i {
        Interval::Days(n) => *n,
        Interval::All => usize::MAX,
    });
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidArgument("no intervals given".into()));
    }
    Ok(out)
}
