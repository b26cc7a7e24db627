//! Intrinsic-entropy (IE) volatility of an index over a trailing window.
//!
//! Each day's log-price terms are weighted by `p ln p`, where `p` is the day's
//! share of the window's traded volume. Three components are combined with the
//! Yang–Zhang constant `k`:
//!
//! ```text
//! H_co   = −Σ ln(O_i / C_{i−1}) · p_{i−1} ln p_{i−1}
//! H_oc   = −Σ ln(C_i / O_i)     · p_i ln p_i
//! H_ohlc = −Σ [ln(H_i/O_i) ln(H_i/C_i) + ln(L_i/O_i) ln(L_i/C_i)] · p_i ln p_i
//! H      = H_co + k H_oc + (1 − k) H_ohlc
//! ```
//!
//! The overnight term for the first window day needs `p_0`, the weight of the
//! seed day, which sits outside the window's volume simplex. By default it is
//! `q_0 / Q` with `Q` summed over the window days only
//! ([`SeedProbability::WindowTotal`]); [`SeedProbability::ExtendedTotal`]
//! instead normalizes every weight by `q_0 + Q`.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::estimators::{yz_k, OhlcWindow};
use crate::numeric::{xlogx, CompensatedSum};

/// How the seed day's volume weight is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedProbability {
    /// `p_0 = q_0 / Q`, `Q = q_1 + … + q_n`; `p_1..p_n` sum to one.
    #[default]
    WindowTotal,
    /// Every weight divided by `q_0 + q_1 + … + q_n`.
    ExtendedTotal,
}

/// Volume weights of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeProbs {
    /// Weight of the seed day, `p_0`.
    pub seed: f64,
    /// `p_1..p_n`, chronological.
    pub probs: Vec<f64>,
    /// The normalizer `Q`.
    pub total_volume: f64,
}

impl VolumeProbs {
    /// `p_{i−1}` for window days `i = 1..n`.
    fn previous(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.seed).chain(self.probs.iter().copied())
    }
}

pub fn volume_probs(w: &OhlcWindow<'_>) -> Result<VolumeProbs> {
    volume_probs_with(w, SeedProbability::WindowTotal)
}

pub fn volume_probs_with(w: &OhlcWindow<'_>, convention: SeedProbability) -> Result<VolumeProbs> {
    let seed = w.seed().ok_or(Error::MissingSeed("intrinsic entropy"))?;
    let window: u128 = w.bars().iter().map(|b| u128::from(b.volume)).sum();
    let total = match convention {
        SeedProbability::WindowTotal => window,
        SeedProbability::ExtendedTotal => window + u128::from(seed.volume),
    };
    if total == 0 || (convention == SeedProbability::WindowTotal && window == 0) {
        return Err(Error::NoVolume);
    }
    let q = total as f64;
    Ok(VolumeProbs {
        seed: seed.volume as f64 / q,
        probs: w.bars().iter().map(|b| b.volume as f64 / q).collect(),
        total_volume: q,
    })
}

fn check_len(w: &OhlcWindow<'_>, p: &VolumeProbs) -> Result<()> {
    if p.probs.len() != w.n() {
        return Err(Error::LengthMismatch(w.n(), p.probs.len()));
    }
    Ok(())
}

/// Overnight component, weighted by the previous day's `p ln p`.
pub fn ie_h_co(w: &OhlcWindow<'_>, p: &VolumeProbs) -> Result<f64> {
    check_len(w, p)?;
    let pairs = w.with_prev_close("intrinsic entropy")?;
    let s: CompensatedSum = pairs.zip(p.previous()).map(|((prev, b), pp)| (b.open / prev).ln() * xlogx(pp)).collect();
    Ok(-s.value())
}

/// Open-to-close component.
pub fn ie_h_oc(w: &OhlcWindow<'_>, p: &VolumeProbs) -> Result<f64> {
    check_len(w, p)?;
    let s: CompensatedSum = w.bars().iter().zip(&p.probs).map(|(b, &pi)| (b.close / b.open).ln() * xlogx(pi)).collect();
    Ok(-s.value())
}

/// Intraday range component.
pub fn ie_h_ohlc(w: &OhlcWindow<'_>, p: &VolumeProbs) -> Result<f64> {
    check_len(w, p)?;
    let s: CompensatedSum =
        w.bars().iter().zip(&p.probs).map(|(b, &pi)| crate::estimators::rogers_satchell_term(b) * xlogx(pi)).collect();
    Ok(-s.value())
}

/// IE estimate of one window, signed and absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IeEstimate {
    pub h_co: f64,
    pub h_oc: f64,
    pub h_ohlc: f64,
    pub k: f64,
    /// `h_co + k h_oc + (1 − k) h_ohlc`; negative values lean to selling.
    pub value_signed: f64,
    /// `|h_co| + k |h_oc| + (1 − k) |h_ohlc|`.
    pub value_abs: f64,
    pub as_of: NaiveDate,
}

pub fn ie_estimate(w: &OhlcWindow<'_>) -> Result<IeEstimate> {
    ie_estimate_with(w, SeedProbability::WindowTotal)
}

pub fn ie_estimate_with(w: &OhlcWindow<'_>, convention: SeedProbability) -> Result<IeEstimate> {
    let k = yz_k(w.n())?;
    let p = volume_probs_with(w, convention)?;
    let h_co = ie_h_co(w, &p)?;
    let h_oc = ie_h_oc(w, &p)?;
    let h_ohlc = ie_h_ohlc(w, &p)?;
    Ok(IeEstimate {
        h_co,
        h_oc,
        h_ohlc,
        k,
        value_signed: h_co + k * h_oc + (1.0 - k) * h_ohlc,
        value_abs: h_co.abs() + k * h_oc.abs() + (1.0 - k) * h_ohlc.abs(),
        as_of: w.as_of(),
    })
}
