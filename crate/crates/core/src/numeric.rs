//! Small numeric kernels shared by the booster and the analytics.
//!
//! Every reduction here walks its input in ascending index order so results
//! are reproducible bit for bit.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `log(sum_i exp(xs[i]))`, shifted by the maximum.
///
/// Returns `-inf` for an empty slice or a slice of `-inf`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut acc = 0.0;
    for &x in xs {
        acc += exp(x - max);
    }
    max + ln(acc)
}

/// Dot product of a weight vector with a ±1 row.
#[inline]
pub fn signed_dot(weights: &[f64], signs: &[i8]) -> f64 {
    debug_assert_eq!(weights.len(), signs.len());
    let mut acc = 0.0;
    for (&w, &s) in weights.iter().zip(signs) {
        acc += w * f64::from(s);
    }
    acc
}

/// Neumaier-compensated running sum.
///
/// Margins, coefficient totals and their splits are long alternating sums of
/// the same coefficients; compensation keeps each accumulator within a few
/// ulps of its exact value so the bookkeeping identities between them hold to
/// `1e-12` over long runs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub const ZERO: CompensatedSum = CompensatedSum { sum: 0.0, carry: 0.0 };

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    /// `Σ sign_k · parts_k` with every sign ±1, summed part by part so large
    /// cancelling terms do not round away a small difference.
    pub fn combine(parts: &[(f64, &CompensatedSum)]) -> f64 {
        let mut acc = CompensatedSum::ZERO;
        for &(sign, s) in parts {
            debug_assert!(sign == 1.0 || sign == -1.0);
            acc.add(sign * s.sum);
        }
        for &(sign, s) in parts {
            acc.add(sign * s.carry);
        }
        acc.value()
    }
}
