//! Small numeric kernels shared by the estimators.

/// Neumaier's variant of Kahan compensated summation.
///
/// Summation order is whatever order values are added in; callers that need
/// bit-reproducible results must fix that order themselves.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// `p ln p`, with the continuous extension `0 ln 0 = 0`.
#[inline]
pub fn xlogx(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

/// Shared functional form of the Yang–Zhang mixing constant and the CSIE
/// weight: `(alpha - 1) / (alpha + (n + 1) / (n - 1))`. Caller checks `n >= 2`.
#[inline]
pub(crate) fn mixing_weight(n: usize, alpha: f64) -> f64 {
    let n = n as f64;
    (alpha - 1.0) / (alpha + (n + 1.0) / (n - 1.0))
}

/// Eight decimals; values that round to zero print without a sign.
pub fn fixed8(v: f64) -> String {
    let s = format!("{v:.8}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}
