//! Command pipelines behind the `csie` binary.
//!
//! Each command either fails up front on bad input or returns one
//! [`OutputStatus`] per file it tried to write.

pub mod cli;
mod config;

pub use config::{parse_estimators, parse_index_arg, parse_intervals, parse_windows, BubbleSize, RunConfig, Settings};

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::analytics::{
    comparison_grid, moving_average, rolling_estimate_with, write_grid_csv, DatedSeries, Statistic, VolSeries,
};
use crate::clustering::{agglomerate_with, PriceMatrix};
use crate::cross_section::{csie_day, write_csie_csv, CsieDay};
use crate::error::{Error, Result};
use crate::estimators::{EntropySign, Estimator};
use crate::market_data::{
    load_market_dir, market_file_name, parse_eod_file, parse_index_csv, parse_market_file_name, write_eod_file,
    write_index_csv, IndexSeries, MarketDay,
};
use crate::numeric::fixed8;
use crate::svg::{self, Line, PALETTE};
use crate::synthetic::{SynthConfig, SyntheticMarket};

/// Panel order for the stacked index-volatility chart.
pub const STACK_ORDER: [Estimator; 6] = [
    Estimator::IntrinsicEntropy,
    Estimator::YangZhang,
    Estimator::RogersSatchell,
    Estimator::GarmanKlass,
    Estimator::Parkinson,
    Estimator::CloseToClose,
];

#[derive(Debug, Clone, PartialEq)]
pub struct OutputStatus {
    pub path: PathBuf,
    pub result: std::result::Result<(), String>,
}

impl fmt::Display for OutputStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.result {
            Ok(()) => write!(f, "ok      {}", self.path.display()),
            Err(e) => write!(f, "FAILED  {}: {e}", self.path.display()),
        }
    }
}

/// Writes are buffered in memory and land in one `fs::write` each.
struct Outputs {
    dir: PathBuf,
    status: Vec<OutputStatus>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Io(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), status: Vec::new() })
    }

    fn emit(&mut self, name: &str, render: impl FnOnce() -> Result<Vec<u8>>) {
        let path = self.dir.join(name);
        let result =
            render().and_then(|bytes| std::fs::write(&path, bytes).map_err(Error::from)).map_err(|e| e.to_string());
        self.status.push(OutputStatus { path, result });
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) {
        self.emit(name, || {
            let mut buf = Vec::new();
            write(&mut buf)?;
            Ok(buf)
        });
    }
}

fn warn(msg: impl fmt::Display) {
    eprintln!("warning: {msg}");
}

fn load_days(cfg: &RunConfig) -> Result<Vec<MarketDay>> {
    if let Some(file) = &cfg.eod_file {
        let name = file.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let date = cfg
            .date
            .or_else(|| parse_market_file_name(name).map(|(_, d)| d))
            .ok_or_else(|| Error::InvalidArgument(format!("no date for {}; pass --date", file.display())))?;
        let bytes = std::fs::read(file).map_err(|e| Error::Io(format!("{}: {e}", file.display())))?;
        let parsed = parse_eod_file(&bytes, date)?;
        for issue in &parsed.issues {
            warn(format_args!("{}: {issue}", file.display()));
        }
        return Ok(vec![parsed.value]);
    }
    let dir = cfg.market_dir.as_ref().ok_or_else(|| Error::InvalidArgument("--market-dir is required".into()))?;
    let data = load_market_dir(dir, cfg.market.as_deref())
        .map_err(|e| Error::Io(format!("cannot load market directory {}: {e}", dir.display())))?;
    if !data.issues.is_empty() {
        warn(format_args!("{} rows rejected across {} market", data.issues.len(), data.market));
    }
    for (path, e) in &data.failed {
        warn(format_args!("skipped {}: {e}", path.display()));
    }
    if data.days.is_empty() {
        return Err(Error::InvalidArgument(format!("no valid EOD files in {}", dir.display())));
    }
    Ok(data.days)
}

/// CSIE for every loaded day; days without a usable cross-section are skipped.
fn load_csie(cfg: &RunConfig) -> Result<Vec<CsieDay>> {
    let days = load_days(cfg)?;
    let results: Vec<Result<CsieDay>> = days.par_iter().map(|d| csie_day(d, cfg.alpha)).collect();
    let mut out = Vec::with_capacity(results.len());
    for (day, r) in days.iter().zip(results) {
        match r {
            Ok(c) => out.push(c),
            Err(e) => warn(format_args!("skipped {}: {e}", day.date())),
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no market day has a usable cross-section".into()));
    }
    Ok(out)
}

fn load_index(name: &str, path: &Path) -> Result<IndexSeries> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let parsed = parse_index_csv(&bytes, name)?;
    if !parsed.issues.is_empty() {
        warn(format_args!("{}: {} rows rejected", path.display(), parsed.issues.len()));
    }
    Ok(parsed.value)
}

fn write_dated_csv(out: &mut Vec<u8>, column: &str, series: &DatedSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", column])?;
    for (d, v) in series.iter() {
        w.write_record([d.to_string(), fixed8(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-day CSIE table, series chart, optional moving average and bubble chart.
pub fn cmd_csie(cfg: &RunConfig) -> Result<Vec<OutputStatus>> {
    let csie = load_csie(cfg)?;
    let mut out = Outputs::new(&cfg.out)?;
    out.csv("csie_daily.csv", |buf| write_csie_csv(&csie, buf));

    let series = DatedSeries::from_csie(&csie, cfg.sign)?;
    let label = match cfg.sign {
        EntropySign::Signed => "CSIE",
        EntropySign::Absolute => "CSIE (absolute)",
    };
    let mut lines = vec![Line { label: label.into(), color: PALETTE[0], points: series.iter().collect() }];
    if let Some(w) = cfg.ma {
        match moving_average(&series, w) {
            Ok(ma) => {
                out.csv("csie_ma.csv", |buf| write_dated_csv(buf, &format!("csie_ma{w}"), &ma));
                lines.push(Line {
                    label: format!("{w}-day moving average"),
                    color: PALETTE[1],
                    points: ma.iter().collect(),
                });
            }
            Err(e) => out.emit("csie_ma.csv", || Err(e)),
        }
    }
    out.emit("csie_series.svg", || Ok(svg::line_chart("Cross-sectional intrinsic entropy", &lines).into_bytes()));

    if let Some(kind) = cfg.bubble {
        let (size_label, size): (&str, fn(&CsieDay) -> f64) = match kind {
            BubbleSize::Count => ("symbols traded", |c| c.m as f64),
            BubbleSize::Value => ("traded value", |c| c.total_value),
        };
        let points: Vec<(NaiveDate, f64, f64)> =
            csie.iter().zip(series.values()).map(|(c, &v)| (c.date, v, size(c))).collect();
        out.emit("csie_bubble.svg", || {
            Ok(svg::bubble_chart("Cross-sectional intrinsic entropy", &points, size_label).into_bytes())
        });
    }
    Ok(out.status)
}

fn vol_table(out: &mut Vec<u8>, series: &[VolSeries]) -> Result<()> {
    let dates: BTreeSet<NaiveDate> = series.iter().flat_map(|s| s.series.dates().iter().copied()).collect();
    let mut cursors = vec![0usize; series.len()];
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date".to_string()];
    header.extend(series.iter().map(|s| s.estimator.code().to_string()));
    w.write_record(&header)?;
    for d in dates {
        let mut rec = vec![d.to_string()];
        for (s, c) in series.iter().zip(cursors.iter_mut()) {
            let ds = &s.series;
            if *c < ds.len() && ds.dates()[*c] == d {
                rec.push(fixed8(ds.values()[*c]));
                *c += 1;
            } else {
                rec.push("NA".into());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Rolling estimator table and stacked chart per index and window.
///
/// Rows cover every date any selected estimator reaches; estimators that
/// need the previous close show `NA` on the first row.
pub fn cmd_indexvol(cfg: &RunConfig) -> Result<Vec<OutputStatus>> {
    if cfg.indexes.is_empty() {
        return Err(Error::InvalidArgument("--index is required".into()));
    }
    let indexes = cfg.indexes.iter().map(|(n, p)| Ok((n, load_index(n, p)?))).collect::<Result<Vec<_>>>()?;
    let mut out = Outputs::new(&cfg.out)?;
    for (name, index) in &indexes {
        for &w in &cfg.windows {
            let stem = format!("indexvol_{name}_w{w}");
            let series: Result<Vec<VolSeries>> = cfg
                .estimators
                .iter()
                .map(|&e| {
                    rolling_estimate_with(index, e, w, cfg.sign)
                        .map_err(|err| Error::InvalidArgument(format!("{} with window {w}: {err}", e.label())))
                })
                .collect();
            match series {
                Ok(series) => {
                    out.csv(&format!("{stem}.csv"), |buf| vol_table(buf, &series));
                    let panels: Vec<Line> = STACK_ORDER
                        .iter()
                        .filter_map(|e| series.iter().find(|s| s.estimator == *e))
                        .map(|s| Line {
                            label: s.estimator.label().to_string(),
                            color: PALETTE[Estimator::ALL.iter().position(|e| *e == s.estimator).unwrap_or(0)],
                            points: s.series.iter().collect(),
                        })
                        .collect();
                    let title = format!("{name}: {w}-day volatility estimates");
                    out.emit(&format!("{stem}.svg"), || Ok(svg::stacked_chart(&title, &panels).into_bytes()));
                }
                Err(e) => {
                    let msg = e.to_string();
                    out.emit(&format!("{stem}.csv"), || Err(Error::InvalidArgument(msg.clone())));
                    out.emit(&format!("{stem}.svg"), || Err(Error::InvalidArgument(msg)));
                }
            }
        }
    }
    Ok(out.status)
}

/// Mean, variance, correlation and beta grids of every index against CSIE.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<OutputStatus>> {
    if cfg.indexes.is_empty() {
        return Err(Error::InvalidArgument("--index is required".into()));
    }
    let csie = load_csie(cfg)?;
    let indexes = cfg.indexes.iter().map(|(n, p)| Ok((n, load_index(n, p)?))).collect::<Result<Vec<_>>>()?;
    let spec = cfg.grid_spec();
    let mut grids = Vec::new();
    for (name, index) in &indexes {
        for stat in Statistic::ALL {
            let grid = comparison_grid(index, &csie, &spec, stat)
                .map_err(|e| Error::InvalidArgument(format!("index {name}: {e}")))?;
            grids.push((format!("compare_{name}_{}.csv", stat.name()), grid));
        }
    }
    let mut out = Outputs::new(&cfg.out)?;
    for (file, grid) in &grids {
        out.csv(file, |buf| write_grid_csv(grid, buf));
    }
    Ok(out.status)
}

fn find_day_file(dir: &Path, market: Option<&str>, date: NaiveDate) -> Result<PathBuf> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut hits = Vec::new();
    for entry in entries {
        let entry = entry?;
        let Some(name) = entry.file_name().to_str().map(str::to_string) else { continue };
        if let Some((m, d)) = parse_market_file_name(&name) {
            if d == date && market.is_none_or(|want| want == m) {
                hits.push(entry.path());
            }
        }
    }
    hits.sort();
    match hits.len() {
        0 => Err(Error::InvalidArgument(format!("no EOD file for {date} in {}", dir.display()))),
        1 => Ok(hits.remove(0)),
        _ => Err(Error::InvalidArgument(format!("several markets have a file for {date}; pass --market"))),
    }
}

/// Dendrogram of the O/H/L/C columns on one day.
pub fn cmd_cluster(cfg: &RunConfig) -> Result<Vec<OutputStatus>> {
    let date = cfg.date.ok_or_else(|| Error::InvalidArgument("--date is required".into()))?;
    let path = match (&cfg.eod_file, &cfg.market_dir) {
        (Some(f), _) => f.clone(),
        (None, Some(dir)) => find_day_file(dir, cfg.market.as_deref(), date)?,
        (None, None) => return Err(Error::InvalidArgument("--market-dir is required".into())),
    };
    let bytes = std::fs::read(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let day = parse_eod_file(&bytes, date)?.value;
    let dg = agglomerate_with(&PriceMatrix::from_market_day(&day)?, cfg.transform)?;

    let stem = format!("cluster_{}", date.format("%Y%m%d"));
    let mut out = Outputs::new(&cfg.out)?;
    out.emit(&format!("{stem}.nwk"), || Ok(format!("{}\n", dg.to_newick()).into_bytes()));
    out.csv(&format!("{stem}.csv"), |buf| dg.write_merge_csv(buf));
    let title = format!("Price clustering {date}");
    out.emit(&format!("{stem}.svg"), || Ok(svg::dendrogram_chart(&title, &dg).into_bytes()));
    if dg.inversion {
        warn("dendrogram has a height inversion");
    }
    Ok(out.status)
}

/// Writes a synthetic market (`market/<NAME>_<YYYYMMDD>.csv`) and its index (`index.csv`).
pub fn cmd_synth(synth: SynthConfig, market: &str, out_dir: &Path) -> Result<Vec<OutputStatus>> {
    let (days, index) = SyntheticMarket::new(synth).collect();
    let mut out = Outputs::new(&out_dir.join("market"))?;
    for day in &days {
        out.csv(&market_file_name(market, day.date()), |buf| write_eod_file(day, buf));
    }
    out.dir = out_dir.to_path_buf();
    out.csv("index.csv", |buf| write_index_csv(&index, buf));
    Ok(out.status)
}

/// 0 when every output was written, 1 otherwise.
pub fn exit_code(status: &[OutputStatus]) -> u8 {
    u8::from(status.iter().any(|s| s.result.is_err()))
}
