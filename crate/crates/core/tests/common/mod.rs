//! Direct-formula oracles and random fixtures shared by the integration tests.
//!
//! The oracles use plain loops and naive summation and never call into the
//! library's numeric code.

#![allow(dead_code)]

use chrono::{Days, NaiveDate};
use csie::{DailyBar, IndexBar, MarketDay};
use rand::Rng;

pub fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap()
}

pub fn nth_day(i: usize) -> NaiveDate {
    day0() + Days::new(i as u64)
}

/// `|got − want| ≤ tol · max(|want|, scale, tiny)`.
pub fn close(got: f64, want: f64, scale: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(scale).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy)]
pub struct Ohlcv {
    pub o: f64,
    pub h: f64,
    pub l: f64,
    pub c: f64,
    pub v: f64,
}

pub fn random_ohlcv<R: Rng>(rng: &mut R, base: f64) -> Ohlcv {
    let o = base * rng.random_range(0.8..1.25);
    let c = base * rng.random_range(0.8..1.25);
    let h = o.max(c) * (1.0 + rng.random_range(0.0..0.05));
    let l = o.min(c) * (1.0 - rng.random_range(0.0..0.05));
    let v = rng.random_range(1..1_000_000u64) as f64;
    Ohlcv { o, h, l, c, v }
}

pub fn market_day(date: NaiveDate, rows: &[Ohlcv]) -> MarketDay {
    let bars = rows
        .iter()
        .enumerate()
        .map(|(i, r)| DailyBar::new(format!("S{i:03}"), r.o, r.h, r.l, r.c, r.v as u64))
        .collect();
    MarketDay::new(date, bars).unwrap()
}

pub fn index_bars(rows: &[Ohlcv]) -> Vec<IndexBar> {
    rows.iter().enumerate().map(|(i, r)| IndexBar::new(nth_day(i), r.o, r.h, r.l, r.c, r.v as u64)).collect()
}

/// A chained random index path: each open is near the previous close.
pub fn random_index<R: Rng>(rng: &mut R, n: usize) -> Vec<Ohlcv> {
    let mut prev = rng.random_range(20.0..200.0);
    (0..n)
        .map(|_| {
            let o: f64 = prev * (1.0 + rng.random_range(-0.02..0.02));
            let c: f64 = o * (1.0 + rng.random_range(-0.04..0.04));
            let h = o.max(c) * (1.0 + rng.random_range(0.0..0.02));
            let l = o.min(c) * (1.0 - rng.random_range(0.0..0.02));
            prev = c;
            Ohlcv { o, h, l, c, v: rng.random_range(1..10_000_000u64) as f64 }
        })
        .collect()
}

/// Result of the whole-formula CSIE oracle plus the sum of absolute terms.
#[derive(Debug, Clone, Copy)]
pub struct CsieOracle {
    pub h_oc: f64,
    pub h_olhc: f64,
    pub f: f64,
    pub signed: f64,
    pub abs: f64,
    pub scale_oc: f64,
    pub scale_olhc: f64,
}

pub fn csie_oracle(rows: &[Ohlcv], alpha: f64) -> CsieOracle {
    let used: Vec<&Ohlcv> = rows.iter().filter(|r| r.v > 0.0).collect();
    let m = used.len() as f64;
    let s: f64 = used.iter().map(|r| r.c * r.v).sum();
    let (mut h_oc, mut h_olhc, mut scale_oc, mut scale_olhc) = (0.0, 0.0, 0.0, 0.0);
    for r in &used {
        let psi = r.c * r.v / s;
        let w = psi * psi.ln();
        let a = -(r.c / r.o - 1.0) * w;
        let b = -((r.h / r.o - 1.0) * (r.h / r.c - 1.0) + (r.l / r.o - 1.0) * (r.l / r.c - 1.0)) * w;
        h_oc += a;
        h_olhc += b;
        scale_oc += a.abs();
        scale_olhc += b.abs();
    }
    let f = if used.len() < 2 { 0.0 } else { (alpha - 1.0) / (alpha + (m + 1.0) / (m - 1.0)) };
    CsieOracle {
        h_oc,
        h_olhc,
        f,
        signed: (1.0 - f) * h_oc + f * h_olhc,
        abs: (1.0 - f) * h_oc.abs() + f * h_olhc.abs(),
        scale_oc,
        scale_olhc,
    }
}

/// Window oracles take the seed bar at index 0 and the window after it.
pub fn cc_oracle(seeded: &[Ohlcv]) -> f64 {
    let n = (seeded.len() - 1) as f64;
    let mut s = 0.0;
    for i in 1..seeded.len() {
        let r = (seeded[i].c / seeded[i - 1].c).ln();
        s += r * r;
    }
    (s / n).sqrt()
}

pub fn pk_oracle(w: &[Ohlcv]) -> f64 {
    let s: f64 = w.iter().map(|b| (b.h / b.l).ln().powi(2)).sum();
    (s / (4.0 * w.len() as f64 * 2f64.ln())).sqrt()
}

pub fn gk_oracle(w: &[Ohlcv]) -> f64 {
    let s: f64 =
        w.iter().map(|b| 0.5 * (b.h / b.l).ln().powi(2) - (2.0 * 2f64.ln() - 1.0) * (b.c / b.o).ln().powi(2)).sum();
    (s / w.len() as f64).max(0.0).sqrt()
}

fn rs_term(b: &Ohlcv) -> f64 {
    (b.h / b.o).ln() * (b.h / b.c).ln() + (b.l / b.o).ln() * (b.l / b.c).ln()
}

pub fn rs_oracle(w: &[Ohlcv]) -> f64 {
    (w.iter().map(rs_term).sum::<f64>() / w.len() as f64).sqrt()
}

pub fn k_oracle(n: usize) -> f64 {
    let n = n as f64;
    0.34 / (1.34 + (n + 1.0) / (n - 1.0))
}

fn pop_var(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mu = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n
}

pub fn yz_oracle(seeded: &[Ohlcv]) -> f64 {
    let w = &seeded[1..];
    let gaps: Vec<f64> = (1..seeded.len()).map(|i| (seeded[i].o / seeded[i - 1].c).ln()).collect();
    let oc: Vec<f64> = w.iter().map(|b| (b.c / b.o).ln()).collect();
    let rs = w.iter().map(rs_term).sum::<f64>() / w.len() as f64;
    let k = k_oracle(w.len());
    (pop_var(&gaps) + k * pop_var(&oc) + (1.0 - k) * rs).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct IeOracle {
    pub h_co: f64,
    pub h_oc: f64,
    pub h_ohlc: f64,
    pub signed: f64,
    pub abs: f64,
    pub scale: f64,
}

/// `p_i = q_i / Σ_{1..n} q`, with the seed day's `p_0` on the same denominator.
pub fn ie_oracle(seeded: &[Ohlcv]) -> IeOracle {
    let n = seeded.len() - 1;
    let q: f64 = seeded[1..].iter().map(|b| b.v).sum();
    let xlx = |p: f64| if p == 0.0 { 0.0 } else { p * p.ln() };
    let (mut h_co, mut h_oc, mut h_ohlc, mut scale) = (0.0, 0.0, 0.0, 0.0);
    for i in 1..=n {
        let (prev, b) = (&seeded[i - 1], &seeded[i]);
        let a = -(b.o / prev.c).ln() * xlx(prev.v / q);
        let c = -(b.c / b.o).ln() * xlx(b.v / q);
        let d = -rs_term(b) * xlx(b.v / q);
        h_co += a;
        h_oc += c;
        h_ohlc += d;
        scale += a.abs() + c.abs() + d.abs();
    }
    let k = k_oracle(n);
    IeOracle {
        h_co,
        h_oc,
        h_ohlc,
        signed: h_co + k * h_oc + (1.0 - k) * h_ohlc,
        abs: h_co.abs() + k * h_oc.abs() + (1.0 - k) * h_ohlc.abs(),
        scale,
    }
}

/// Two-pass Pearson correlation.
pub fn pearson_oracle(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// One merge in the exhaustive clustering oracle: `(height, left, right)`.
pub type OracleMerge = (f64, String, String);

fn merged_label(a: &str, b: &str) -> String {
    let mut c: Vec<char> = a.chars().chain(b.chars()).collect();
    c.sort_unstable();
    c.into_iter().collect()
}

/// Enumerates every sequence of merges over the four leaves and returns the
/// one that is lexicographically smallest by `(height, left, right)` per step,
/// which is what average linkage with label tie-breaks must produce.
pub fn upgma_oracle(columns: &[Vec<f64>; 4]) -> Vec<OracleMerge> {
    let labels = ["O", "H", "L", "C"];
    let mut d = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            d[i][j] = 1.0 - pearson_oracle(&columns[i], &columns[j]);
        }
    }
    let start: Vec<(String, Vec<usize>)> = (0..4).map(|i| (labels[i].to_string(), vec![i])).collect();
    let mut all = Vec::new();
    enumerate(&d, start, Vec::new(), &mut all);
    all.into_iter()
        .min_by(|x, y| {
            for (a, b) in x.iter().zip(y) {
                let ord = a.0.total_cmp(&b.0).then_with(|| (&a.1, &a.2).cmp(&(&b.1, &b.2)));
                if ord.is_ne() {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        })
        .unwrap()
}

fn enumerate(
    d: &[[f64; 4]; 4],
    clusters: Vec<(String, Vec<usize>)>,
    path: Vec<OracleMerge>,
    out: &mut Vec<Vec<OracleMerge>>,
) {
    if clusters.len() == 1 {
        out.push(path);
        return;
    }
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let (a, b) = (&clusters[i], &clusters[j]);
            let mut sum = 0.0;
            for &x in &a.1 {
                for &y in &b.1 {
                    sum += d[x][y];
                }
            }
            let h = sum / (a.1.len() * b.1.len()) as f64;
            let (l, r) = if a.0 < b.0 { (a.0.clone(), b.0.clone()) } else { (b.0.clone(), a.0.clone()) };
            let mut next: Vec<(String, Vec<usize>)> =
                clusters.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, c)| c.clone()).collect();
            next.push((merged_label(&l, &r), [a.1.clone(), b.1.clone()].concat()));
            let mut p = path.clone();
            p.push((h, l, r));
            enumerate(d, next, p, out);
        }
    }
}
