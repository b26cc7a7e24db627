use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::{cmd_cluster, cmd_compare, cmd_csie, cmd_indexvol, cmd_synth, exit_code, OutputStatus, Settings};
use crate::error::{Error, Result};
use crate::synthetic::SynthConfig;

pub const THREADS_ENV: &str = "CSIE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "csie", version, about = "Market-wide entropy volatility and index volatility estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Daily CSIE table and charts for a market directory.
    Csie(RunArgs),
    /// Rolling volatility estimators for index series.
    Indexvol(RunArgs),
    /// Mean, variance, correlation and beta grids of index estimators against CSIE.
    Compare(RunArgs),
    /// Dendrogram of the open/high/low/close columns on one day.
    Cluster(RunArgs),
    /// Write a seeded synthetic market and index.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat `key = value` file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of `<MARKET>_<YYYYMMDD>.csv` files.
    #[arg(long)]
    market_dir: Option<String>,
    /// Market name to pick when the directory holds several.
    #[arg(long)]
    market: Option<String>,
    /// A single EOD file instead of a directory.
    #[arg(long)]
    eod_file: Option<String>,
    /// Index OHLCV CSV as `NAME=PATH`; repeatable.
    #[arg(long)]
    index: Vec<String>,
    /// Comma list from cc,pk,gk,rs,yz,ie, or `all`.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    windows: Option<String>,
    /// Comma list of day counts and/or `all`.
    #[arg(long)]
    intervals: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Use absolute-value entropy variants.
    #[arg(long)]
    abs: bool,
    /// Moving-average window overlaid on the CSIE chart.
    #[arg(long)]
    ma: Option<String>,
    /// Bubble chart sized by `count` or `value`.
    #[arg(long)]
    bubble: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `smoothed-points` or `raw-days`.
    #[arg(long)]
    interval_semantics: Option<String>,
    /// Day to cluster, or the date of `--eod-file`.
    #[arg(long)]
    date: Option<String>,
    /// Correlate log prices when clustering.
    #[arg(long)]
    log_prices: bool,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        let single = [
            ("market_dir", &self.market_dir),
            ("market", &self.market),
            ("eod_file", &self.eod_file),
            ("estimators", &self.estimators),
            ("windows", &self.windows),
            ("intervals", &self.intervals),
            ("alpha", &self.alpha),
            ("ma", &self.ma),
            ("bubble", &self.bubble),
            ("out", &self.out),
            ("interval_semantics", &self.interval_semantics),
            ("date", &self.date),
        ];
        for (key, value) in single {
            if let Some(v) = value {
                s.push(key, v.as_str())?;
            }
        }
        for i in &self.index {
            s.push("index", i.as_str())?;
        }
        if self.abs {
            s.push("abs", "true")?;
        }
        if self.log_prices {
            s.push("log_prices", "true")?;
        }
        let file = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        Ok(s.over(file))
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    symbols: usize,
    #[arg(long, default_value_t = 90)]
    days: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "SYNTH")]
    market: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<Vec<OutputStatus>> {
    match cli.command {
        Command::Synth(a) => {
            if a.symbols == 0 || a.days == 0 {
                return Err(Error::InvalidArgument("symbols and days must be positive".into()));
            }
            let cfg = SynthConfig { symbols: a.symbols, days: a.days, seed: a.seed, ..SynthConfig::default() };
            cmd_synth(cfg, &a.market, &a.out)
        }
        Command::Csie(a) => cmd_csie(&a.settings()?.resolve()?),
        Command::Indexvol(a) => cmd_indexvol(&a.settings()?.resolve()?),
        Command::Compare(a) => cmd_compare(&a.settings()?.resolve()?),
        Command::Cluster(a) => cmd_cluster(&a.settings()?.resolve()?),
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(None) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Exit codes: 0 all outputs written, 1 some output failed, 2 bad input.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| run(cli)),
        Ok(None) => run(cli),
        Err(e) => Err(e),
    };
    match result {
        Ok(status) => {
            for s in &status {
                if s.result.is_ok() {
                    println!("{s}");
                } else {
                    eprintln!("{s}");
                }
            }
            ExitCode::from(exit_code(&status))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
