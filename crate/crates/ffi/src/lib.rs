//! C interface to the `csie` library.
//!
//! Every fallible call returns a [`CsieStatus`]; on failure the message is
//! available from [`csie_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chrono::NaiveDate;
use csie::analytics::rolling_estimate_with;
use csie::market_data::{parse_eod_file, parse_index_csv};
use csie::{csie_day, csie_weight_f as weight_f, yz_k, EntropySign, Error, Estimator, IndexSeries, MarketDay};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsieStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InsufficientData = 4,
    Degenerate = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsieEstimator {
    CloseToClose = 0,
    Parkinson = 1,
    GarmanKlass = 2,
    RogersSatchell = 3,
    YangZhang = 4,
    IntrinsicEntropy = 5,
}

/// Maps a raw [`CsieEstimator`] value; C callers may pass anything.
fn estimator_from_raw(raw: u32) -> Option<Estimator> {
    Estimator::ALL.get(raw as usize).copied()
}

/// One day's CSIE values.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsieDayResult {
    /// Date as `YYYYMMDD`.
    pub date: u32,
    pub m: usize,
    pub listed: usize,
    pub total_value: f64,
    pub f: f64,
    pub h_oc: f64,
    pub h_olhc: f64,
    pub csie_signed: f64,
    pub csie_abs: f64,
    pub degenerate: bool,
}

/// A parsed end-of-day cross-section.
pub struct CsieMarketDay(MarketDay);

/// A parsed index OHLCV series.
pub struct CsieIndexSeries(IndexSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CsieStatus {
    match err {
        Error::Parse(_) | Error::EmptyMarketDay | Error::DuplicateSymbol(_) | Error::DuplicateDate(_) => {
            CsieStatus::Parse
        }
        Error::InsufficientData { .. } | Error::WindowTooShort { .. } | Error::EmptySeries | Error::EmptySample => {
            CsieStatus::InsufficientData
        }
        Error::EmptyCrossSection
        | Error::DegenerateCrossSection(_)
        | Error::NoVolume
        | Error::UndefinedCorrelation
        | Error::ZeroVariance
        | Error::DegenerateColumn(_) => CsieStatus::Degenerate,
        _ => CsieStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for [`csie_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (CsieStatus, String)>) -> CsieStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsieStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CsieStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (CsieStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CsieStatus, String) {
    (CsieStatus::NullPointer, format!("{what} is null"))
}

fn date_from_u32(yyyymmdd: u32) -> Result<NaiveDate, (CsieStatus, String)> {
    NaiveDate::from_ymd_opt((yyyymmdd / 10_000) as i32, yyyymmdd / 100 % 100, yyyymmdd % 100)
        .ok_or_else(|| (CsieStatus::InvalidArgument, format!("bad date {yyyymmdd}")))
}

fn date_to_u32(d: NaiveDate) -> u32 {
    use chrono::Datelike;
    d.year() as u32 * 10_000 + d.month() * 100 + d.day()
}

/// # Safety
/// `data` must point to `len` readable bytes, or be null with `len == 0`.
unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], (CsieStatus, String)> {
    if data.is_null() {
        return if len == 0 { Ok(&[]) } else { Err(null("data")) };
    }
    // SAFETY: caller guarantees `len` readable bytes at `data`.
    Ok(unsafe { std::slice::from_raw_parts(data, len) })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn csie_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn csie_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Mixing weight `f(m)` for a cross-section of `m` symbols.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn csie_weight_f(m: usize, alpha: f64, out: *mut f64) -> CsieStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = weight_f(m, alpha).map_err(lib_err)?;
        // SAFETY: checked non-null; caller guarantees validity.
        unsafe { *out = v };
        Ok(())
    })
}

/// Yang–Zhang mixing constant for a window of `n` days.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn csie_yz_k(n: usize, out: *mut f64) -> CsieStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = yz_k(n).map_err(lib_err)?;
        // SAFETY: checked non-null; caller guarantees validity.
        unsafe { *out = v };
        Ok(())
    })
}

/// Parses one EOD file (`symbol,open,high,low,close,volume` rows) for the date `YYYYMMDD`.
///
/// Malformed rows are skipped; the call fails only if no row survives.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn csie_market_day_parse(
    data: *const u8,
    len: usize,
    yyyymmdd: u32,
    out: *mut *mut CsieMarketDay,
) -> CsieStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: forwarded caller contract.
        let bytes = unsafe { bytes(data, len)? };
        let day = parse_eod_file(bytes, date_from_u32(yyyymmdd)?).map_err(lib_err)?.value;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(CsieMarketDay(day))) };
        Ok(())
    })
}

/// Rows in the cross-section, including zero-volume ones. 0 for null.
///
/// # Safety
/// `day` must be null or a live handle from [`csie_market_day_parse`].
#[no_mangle]
pub unsafe extern "C" fn csie_market_day_len(day: *const CsieMarketDay) -> usize {
    // SAFETY: caller contract.
    unsafe { day.as_ref() }.map_or(0, |d| d.0.len())
}

/// Computes the day's CSIE with mixing parameter `alpha` (1.34 by convention).
///
/// # Safety
/// `day` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csie_market_day_compute(
    day: *const CsieMarketDay,
    alpha: f64,
    out: *mut CsieDayResult,
) -> CsieStatus {
    guard(|| {
        // SAFETY: caller contract.
        let day = unsafe { day.as_ref() }.ok_or_else(|| null("day"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = csie_day(&day.0, alpha).map_err(lib_err)?;
        let res = CsieDayResult {
            date: date_to_u32(c.date),
            m: c.m,
            listed: c.listed,
            total_value: c.total_value,
            f: c.f,
            h_oc: c.h_oc,
            h_olhc: c.h_olhc,
            csie_signed: c.csie_signed,
            csie_abs: c.csie_abs,
            degenerate: c.degenerate,
        };
        // SAFETY: checked non-null.
        unsafe { *out = res };
        Ok(())
    })
}

/// # Safety
/// `day` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csie_market_day_free(day: *mut CsieMarketDay) {
    if !day.is_null() {
        // SAFETY: created by Box::into_raw in csie_market_day_parse.
        drop(unsafe { Box::from_raw(day) });
    }
}

/// Parses an index CSV (`Date,Open,High,Low,Close[,Adj Close],Volume`).
///
/// # Safety
/// `data` must point to `len` readable bytes; `name` must be null or NUL-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn csie_index_parse(
    data: *const u8,
    len: usize,
    name: *const c_char,
    out: *mut *mut CsieIndexSeries,
) -> CsieStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: forwarded caller contract.
        let bytes = unsafe { bytes(data, len)? };
        let name = if name.is_null() {
            String::from("index")
        } else {
            // SAFETY: caller guarantees a NUL-terminated string.
            unsafe { CStr::from_ptr(name) }.to_string_lossy().into_owned()
        };
        let series = parse_index_csv(bytes, &name).map_err(lib_err)?.value;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(CsieIndexSeries(series))) };
        Ok(())
    })
}

/// Number of bars. 0 for null.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csie_index_len(series: *const CsieIndexSeries) -> usize {
    // SAFETY: caller contract.
    unsafe { series.as_ref() }.map_or(0, |s| s.0.len())
}

/// Rolling `window`-day estimates into caller buffers.
///
/// `estimator` takes a [`CsieEstimator`] value. `*out_len` receives the number of points. If `capacity` is smaller, nothing
/// is written and the status is `BufferTooSmall`. `dates` may be null.
///
/// # Safety
/// `series` must be a live handle; `values` (and `dates` when non-null) must hold
/// `capacity` elements; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn csie_index_rolling(
    series: *const CsieIndexSeries,
    estimator: u32,
    window: usize,
    absolute: bool,
    values: *mut f64,
    dates: *mut u32,
    capacity: usize,
    out_len: *mut usize,
) -> CsieStatus {
    guard(|| {
        // SAFETY: caller contract.
        let series = unsafe { series.as_ref() }.ok_or_else(|| null("series"))?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let estimator = estimator_from_raw(estimator)
            .ok_or_else(|| (CsieStatus::InvalidArgument, format!("bad estimator {estimator}")))?;
        let sign = if absolute { EntropySign::Absolute } else { EntropySign::Signed };
        let vs = rolling_estimate_with(&series.0, estimator, window, sign).map_err(lib_err)?;
        let n = vs.series.len();
        // SAFETY: checked non-null.
        unsafe { *out_len = n };
        if capacity < n {
            return Err((CsieStatus::BufferTooSmall, format!("need {n} slots, got {capacity}")));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        for (i, (d, v)) in vs.series.iter().enumerate() {
            // SAFETY: i < n <= capacity elements, per caller contract.
            unsafe {
                *values.add(i) = v;
                if !dates.is_null() {
                    *dates.add(i) = date_to_u32(d);
                }
            }
        }
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn csie_index_free(series: *mut CsieIndexSeries) {
    if !series.is_null() {
        // SAFETY: created by Box::into_raw in csie_index_parse.
        drop(unsafe { Box::from_raw(series) });
    }
}
