//! Historical volatility estimators over trailing OHLC windows of an index.
//!
//! All values are per-day and never annualized. Log price ratios are used
//! throughout, so every estimator is invariant to rescaling prices.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::intrinsic_entropy;
use crate::market_data::IndexBar;
use crate::numeric::{mixing_weight, CompensatedSum};

/// Which estimator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    CloseToClose,
    Parkinson,
    GarmanKlass,
    RogersSatchell,
    YangZhang,
    IntrinsicEntropy,
}

impl Estimator {
    pub const ALL: [Estimator; 6] = [
        Estimator::CloseToClose,
        Estimator::Parkinson,
        Estimator::GarmanKlass,
        Estimator::RogersSatchell,
        Estimator::YangZhang,
        Estimator::IntrinsicEntropy,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Estimator::CloseToClose => "cc",
            Estimator::Parkinson => "pk",
            Estimator::GarmanKlass => "gk",
            Estimator::RogersSatchell => "rs",
            Estimator::YangZhang => "yz",
            Estimator::IntrinsicEntropy => "ie",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Estimator::CloseToClose => "Close-to-close (raw)",
            Estimator::Parkinson => "Parkinson",
            Estimator::GarmanKlass => "Garman-Klass",
            Estimator::RogersSatchell => "Rogers-Satchell",
            Estimator::YangZhang => "Yang-Zhang",
            Estimator::IntrinsicEntropy => "Intrinsic entropy",
        }
    }

    /// Whether the estimator reads the close of the day before the window.
    pub fn needs_seed(self) -> bool {
        matches!(self, Estimator::CloseToClose | Estimator::YangZhang | Estimator::IntrinsicEntropy)
    }

    pub fn min_window(self) -> usize {
        match self {
            Estimator::YangZhang | Estimator::IntrinsicEntropy => 2,
            _ => 1,
        }
    }

    /// Bars consumed by one window of length `n`, seed included.
    pub fn span(self, n: usize) -> usize {
        n + usize::from(self.needs_seed())
    }

    /// Evaluates this estimator on a window. `sign` only matters for IE.
    pub fn estimate(self, w: &OhlcWindow<'_>, sign: EntropySign) -> Result<VolEstimate> {
        match self {
            Estimator::CloseToClose => vol_close_to_close(w),
            Estimator::Parkinson => vol_parkinson(w),
            Estimator::GarmanKlass => vol_garman_klass(w),
            Estimator::RogersSatchell => vol_rogers_satchell(w),
            Estimator::YangZhang => vol_yang_zhang(w),
            Estimator::IntrinsicEntropy => {
                let ie = intrinsic_entropy::ie_estimate(w)?;
                let value = match sign {
                    EntropySign::Signed => ie.value_signed,
                    EntropySign::Absolute => ie.value_abs,
                };
                Ok(VolEstimate { value, estimator: self, window: w.n(), as_of: w.as_of(), clamped: false })
            }
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator {s:?} (expected cc, pk, gk, rs, yz, ie)")))
    }
}

/// Signed entropy estimates or their absolute-component variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropySign {
    #[default]
    Signed,
    Absolute,
}

/// A trailing window of `n` index bars, optionally preceded by a seed bar
/// that supplies the previous close.
#[derive(Debug, Clone, Copy)]
pub struct OhlcWindow<'a> {
    seed: Option<&'a IndexBar>,
    bars: &'a [IndexBar],
}

impl<'a> OhlcWindow<'a> {
    pub fn new(bars: &'a [IndexBar]) -> Result<Self> {
        Self::build(None, bars)
    }

    pub fn with_seed(seed: &'a IndexBar, bars: &'a [IndexBar]) -> Result<Self> {
        Self::build(Some(seed), bars)
    }

    /// Treats `bars[0]` as the seed and the rest as the window.
    pub fn seeded(bars: &'a [IndexBar]) -> Result<Self> {
        match bars.split_first() {
            Some((seed, rest)) => Self::with_seed(seed, rest),
            None => Err(Error::WindowTooShort { got: 0, min: 1 }),
        }
    }

    fn build(seed: Option<&'a IndexBar>, bars: &'a [IndexBar]) -> Result<Self> {
        if bars.is_empty() {
            return Err(Error::WindowTooShort { got: 0, min: 1 });
        }
        let all = seed.into_iter().chain(bars);
        let mut prev: Option<NaiveDate> = None;
        for b in all {
            if [b.open, b.high, b.low, b.close].iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(Error::NonPositivePrice(b.date));
            }
            if prev.is_some_and(|p| b.date <= p) {
                return Err(Error::NonMonotoneDates(b.date));
            }
            prev = Some(b.date);
        }
        Ok(Self { seed, bars })
    }

    pub fn n(&self) -> usize {
        self.bars.len()
    }

    pub fn bars(&self) -> &'a [IndexBar] {
        self.bars
    }

    pub fn seed(&self) -> Option<&'a IndexBar> {
        self.seed
    }

    pub fn as_of(&self) -> NaiveDate {
        self.bars[self.bars.len() - 1].date
    }

    fn require_seed(&self, name: &'static str) -> Result<&'a IndexBar> {
        self.seed.ok_or(Error::MissingSeed(name))
    }

    fn require_n(&self, min: usize) -> Result<()> {
        if self.n() < min {
            return Err(Error::WindowTooShort { got: self.n(), min });
        }
        Ok(())
    }

    /// `(previous close, bar)` pairs, seed first.
    pub(crate) fn with_prev_close(&self, name: &'static str) -> Result<impl Iterator<Item = (f64, &'a IndexBar)> + 'a> {
        let seed = self.require_seed(name)?;
        let prev = std::iter::once(seed).chain(self.bars.iter()).map(|b| b.close);
        Ok(prev.zip(self.bars.iter()))
    }
}

/// One estimator value at the end of a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolEstimate {
    pub value: f64,
    pub estimator: Estimator,
    pub window: usize,
    pub as_of: NaiveDate,
    /// A negative radicand was clamped to zero.
    pub clamped: bool,
}

fn mean<I: IntoIterator<Item = f64>>(values: I, n: usize) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value() / n as f64
}

fn finish(w: &OhlcWindow<'_>, estimator: Estimator, radicand: f64) -> VolEstimate {
    let clamped = radicand < 0.0;
    VolEstimate { value: radicand.max(0.0).sqrt(), estimator, window: w.n(), as_of: w.as_of(), clamped }
}

/// Raw close-to-close: `sqrt(mean(ln(C_i / C_{i-1})²))`, not de-meaned.
pub fn vol_close_to_close(w: &OhlcWindow<'_>) -> Result<VolEstimate> {
    let pairs = w.with_prev_close("close-to-close")?;
    let r = mean(pairs.map(|(prev, b)| (b.close / prev).ln().powi(2)), w.n());
    Ok(finish(w, Estimator::CloseToClose, r))
}

/// Parkinson: `sqrt(mean(ln(H/L)²) / (4 ln 2))`.
pub fn vol_parkinson(w: &OhlcWindow<'_>) -> Result<VolEstimate> {
    let m = mean(w.bars().iter().map(|b| (b.high / b.low).ln().powi(2)), w.n());
    Ok(finish(w, Estimator::Parkinson, m / (4.0 * std::f64::consts::LN_2)))
}

/// Garman–Klass: `sqrt(mean(0.5 ln²(H/L) − (2 ln 2 − 1) ln²(C/O)))`.
///
/// The radicand can dip below zero on bars with a tiny range and a large
/// open-to-close move; it is clamped and `clamped` is set.
pub fn vol_garman_klass(w: &OhlcWindow<'_>) -> Result<VolEstimate> {
    let c = 2.0 * std::f64::consts::LN_2 - 1.0;
    let m =
        mean(w.bars().iter().map(|b| 0.5 * (b.high / b.low).ln().powi(2) - c * (b.close / b.open).ln().powi(2)), w.n());
    Ok(finish(w, Estimator::GarmanKlass, m))
}

/// Per-day Rogers–Satchell term `ln(H/O) ln(H/C) + ln(L/O) ln(L/C)`.
#[inline]
pub fn rogers_satchell_term(b: &IndexBar) -> f64 {
    (b.high / b.open).ln() * (b.high / b.close).ln() + (b.low / b.open).ln() * (b.low / b.close).ln()
}

fn rs_variance(w: &OhlcWindow<'_>) -> f64 {
    mean(w.bars().iter().map(rogers_satchell_term), w.n())
}

/// Rogers–Satchell: `sqrt(mean(rogers_satchell_term))`.
pub fn vol_rogers_satchell(w: &OhlcWindow<'_>) -> Result<VolEstimate> {
    Ok(finish(w, Estimator::RogersSatchell, rs_variance(w)))
}

/// Yang–Zhang mixing constant `k = 0.34 / (1.34 + (n + 1)/(n − 1))`.
pub fn yz_k(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::WindowTooShort { got: n, min: 2 });
    }
    Ok(mixing_weight(n, 1.34))
}

fn centered_variance(xs: &[f64]) -> f64 {
    if xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let n = xs.len();
    let mu = mean(xs.iter().copied(), n);
    mean(xs.iter().map(|x| (x - mu).powi(2)), n)
}

/// Overnight variance: population variance of `ln(O_i / C_{i−1})`.
pub fn vol_overnight(w: &OhlcWindow<'_>) -> Result<f64> {
    let gaps: Vec<f64> = w.with_prev_close("overnight")?.map(|(prev, b)| (b.open / prev).ln()).collect();
    Ok(centered_variance(&gaps))
}

/// Open-to-close variance: population variance of `ln(C_i / O_i)`.
pub fn vol_open_to_close(w: &OhlcWindow<'_>) -> Result<f64> {
    w.require_n(2)?;
    let r: Vec<f64> = w.bars().iter().map(|b| (b.close / b.open).ln()).collect();
    Ok(centered_variance(&r))
}

/// Yang–Zhang: `sqrt(V_co² + k V_oc² + (1 − k) V_rs²)`.
pub fn vol_yang_zhang(w: &OhlcWindow<'_>) -> Result<VolEstimate> {
    w.require_n(2)?;
    let k = yz_k(w.n())?;
    let overnight = vol_overnight(w)?;
    let open_close = vol_open_to_close(w)?;
    let rs = rs_variance(w);
    Ok(finish(w, Estimator::YangZhang, overnight + k * open_close + (1.0 - k) * rs))
}
