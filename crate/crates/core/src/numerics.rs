//! Scalar kernel: log-gamma, log-binomial and signed log-space reals.
//!
//! Expected counts of induced trees range from below `1e-300` to far above
//! `1e300` within a single threshold scan, so everything downstream works
//! with natural logarithms. [`LogReal`] carries a sign next to the log of
//! the magnitude so that differences can be formed as well.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigUint;

use crate::error::{domain, Error, Result};

/// `ln(sqrt(2 pi))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Shift point for the asymptotic series. Below it, the recurrence
/// `Γ(x) = Γ(x + 1) / x` moves the argument up first.
const SERIES_MIN: f64 = 15.0;

/// Bernoulli terms `B_2j / (2j (2j - 1))` of the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Sum of the Stirling correction terms at `x >= SERIES_MIN`. Truncation
/// error is below `1e-19` there.
fn stirling_tail(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// Natural log of the gamma function for `x > 0`.
///
/// Uses the Stirling series with eight correction terms for `x >= 15` and
/// upward recurrence below. `ln Γ(1) = ln Γ(2) = 0` are returned exactly.
///
/// ```
/// use induced_trees::numerics::log_gamma;
/// assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-13);
/// assert_eq!(log_gamma(1.0).unwrap(), 0.0);
/// ```
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires a finite x > 0, got {x}"));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x >= SERIES_MIN {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(x);
    }
    let mut shifted = x;
    let mut prod = 1.0;
    while shifted < SERIES_MIN {
        prod *= shifted;
        shifted += 1.0;
    }
    (shifted - 0.5) * shifted.ln() - shifted + LN_SQRT_2PI + stirling_tail(shifted) - prod.ln()
}

/// `ln Γ(a + b) - ln Γ(a)` for `a > 0`, `b >= 0`.
///
/// For large `a` the two log-gammas are huge and nearly equal; this form
/// keeps the difference accurate to a few ulps of the result.
pub fn log_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b >= 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!(
            "log_gamma_ratio requires a > 0, b >= 0, got ({a}, {b})"
        ));
    }
    Ok(log_gamma_ratio_unchecked(a, b))
}

pub(crate) fn log_gamma_ratio_unchecked(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    if a < SERIES_MIN {
        return log_gamma_unchecked(a + b) - log_gamma_unchecked(a);
    }
    let c = a + b;
    (a - 0.5) * (b / a).ln_1p() + b * c.ln() - b + (stirling_tail(c) - stirling_tail(a))
}

/// `ln(n!)`.
pub fn log_factorial(n: u64) -> f64 {
    log_gamma_unchecked(n as f64 + 1.0)
}

/// `ln C(n, k)`.
///
/// The smaller of `k` and `n - k` is always used, so the result is
/// symmetric bit for bit.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return domain(format!("log_binomial requires k <= n, got n={n}, k={k}"));
    }
    Ok(log_binomial_unchecked(n, k))
}

pub(crate) fn log_binomial_unchecked(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    log_gamma_ratio_unchecked(n - k + 1.0, k) - log_gamma_unchecked(k + 1.0)
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        // exact up to rounding of the final conversion
        let digits = x.to_u64_digits();
        let mut v = 0.0f64;
        for d in digits.iter().rev() {
            v = v * 18_446_744_073_709_551_616.0 + *d as f64;
        }
        if v.is_finite() {
            return v.ln();
        }
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    let top = top.to_u64_digits()[0] as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Ratio of the magnitude scale below which an addition is reported as
/// cancelling: 30 orders of magnitude.
pub const CANCELLATION_LN: f64 = 30.0 * std::f64::consts::LN_10;

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Zero is `sign == 0`; its `log_abs` is `-inf` and carries no meaning.
#[derive(Clone, Copy, Debug)]
pub struct LogReal {
    sign: i8,
    log_abs: f64,
}

/// Result of an addition that may have lost most of its significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sum {
    pub value: LogReal,
    /// The result is at least 30 orders of magnitude below the larger input.
    pub cancelled: bool,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal {
        sign: 1,
        log_abs: 0.0,
    };

    /// The positive number `exp(ln)`. `-inf` gives zero.
    pub fn from_ln(ln: f64) -> LogReal {
        if ln == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal {
                sign: 1,
                log_abs: ln,
            }
        }
    }

    pub fn from_parts(sign: i8, log_abs: f64) -> LogReal {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> LogReal {
        if x == 0.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    pub fn from_biguint(x: &BigUint) -> LogReal {
        LogReal::from_ln(ln_biguint(x))
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of `|self|`, `-inf` at zero.
    pub fn log_abs(self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.log_abs
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Converts back to `f64`; overflows to `±inf` and underflows to `0`.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => s as f64 * self.log_abs.exp(),
        }
    }

    pub fn abs(self) -> LogReal {
        LogReal {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    pub fn checked_div(self, rhs: LogReal) -> Result<LogReal> {
        if rhs.sign == 0 {
            return Err(Error::DivideByZero);
        }
        if self.sign == 0 {
            return Ok(LogReal::ZERO);
        }
        Ok(LogReal {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs - rhs.log_abs,
        })
    }

    /// `self^e` for a nonnegative base. `0^0 = 1`.
    pub fn powf(self, e: f64) -> Result<LogReal> {
        match self.sign {
            -1 => domain("powf of a negative LogReal"),
            0 if e == 0.0 => Ok(LogReal::ONE),
            0 if e > 0.0 => Ok(LogReal::ZERO),
            0 => Err(Error::DivideByZero),
            _ => Ok(LogReal::from_parts(1, self.log_abs * e)),
        }
    }

    /// Addition that also reports catastrophic cancellation.
    pub fn add_flagged(self, rhs: LogReal) -> Sum {
        if self.sign == 0 {
            return Sum {
                value: rhs,
                cancelled: false,
            };
        }
        if rhs.sign == 0 {
            return Sum {
                value: self,
                cancelled: false,
            };
        }
        let (big, small) = if self.log_abs >= rhs.log_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let ratio = (small.log_abs - big.log_abs).exp();
        let value = if big.sign == small.sign {
            LogReal {
                sign: big.sign,
                log_abs: big.log_abs + ratio.ln_1p(),
            }
        } else if ratio == 1.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: big.sign,
                log_abs: big.log_abs + (-ratio).ln_1p(),
            }
        };
        let cancelled = big.sign != small.sign && value.log_abs() <= big.log_abs - CANCELLATION_LN;
        Sum { value, cancelled }
    }

    /// Sum of many terms.
    pub fn sum<I: IntoIterator<Item = LogReal>>(terms: I) -> LogReal {
        terms.into_iter().fold(LogReal::ZERO, |acc, t| acc + t)
    }
}

impl Default for LogReal {
    fn default() -> Self {
        LogReal::ZERO
    }
}

impl PartialEq for LogReal {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.log_abs == other.log_abs)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_abs.partial_cmp(&other.log_abs),
                _ => other.log_abs.partial_cmp(&self.log_abs),
            },
            o => Some(o),
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: self.sign * rhs.sign,
                log_abs: self.log_abs + rhs.log_abs,
            }
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    /// Panics on division by zero, like integer division. Use
    /// [`LogReal::checked_div`] to get an error instead.
    fn div(self, rhs: LogReal) -> LogReal {
        self.checked_div(rhs).expect("LogReal division by zero")
    }
}

impl Add for LogReal {
    type Output = LogReal;
    fn add(self, rhs: LogReal) -> LogReal {
        self.add_flagged(rhs).value
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }
}

impl Sub for LogReal {
    type Output = LogReal;
    fn sub(self, rhs: LogReal) -> LogReal {
        self + (-rhs)
    }
}

/// Scientific notation in base 10, valid far outside the `f64` range.
impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        let log10 = self.log_abs / std::f64::consts::LN_10;
        let mut exp = log10.floor();
        let mut mant = 10f64.powf(log10 - exp);
        if mant >= 9.999_999_5 {
            mant /= 10.0;
            exp += 1.0;
        }
        let prec = f.precision().unwrap_or(6);
        let sign = if self.sign < 0 { "-" } else { "" };
        write!(f, "{sign}{mant:.prec$}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_gamma_anchors() {
        assert!(rel(log_gamma(5.0).unwrap(), 24f64.ln()) < 1e-14);
        let half = log_gamma(0.5).unwrap();
        assert!(rel(half, std::f64::consts::PI.sqrt().ln()) < 1e-13);
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_matches_exact_factorials() {
        // ln(n!) from an exact big-integer factorial, for n up to 170
        let mut fact = BigUint::from(1u32);
        for n in 1u64..=170 {
            fact *= n;
            if n < 2 {
                continue;
            }
            let want = ln_biguint(&fact);
            let got = log_gamma((n + 1) as f64).unwrap();
            assert!(rel(got, want) < 1e-12, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn log_gamma_ratio_agrees_with_difference() {
        for &(a, b) in &[(20.0, 3.0), (100.5, 40.0), (1e6, 1234.0), (3.0, 9.0)] {
            let direct = log_gamma(a + b).unwrap() - log_gamma(a).unwrap();
            assert!(rel(log_gamma_ratio(a, b).unwrap(), direct) < 1e-12);
        }
    }

    #[test]
    fn log_binomial_anchors() {
        assert!(rel(log_binomial(4, 2).unwrap(), 6f64.ln()) < 1e-14);
        assert_eq!(log_binomial(17, 0).unwrap(), 0.0);
        assert_eq!(log_binomial(17, 17).unwrap(), 0.0);
        // C(52, 5) from exact integer arithmetic
        let exact: u64 = (48..=52).product::<u64>() / 120;
        assert_eq!(exact, 2_598_960);
        assert!(rel(log_binomial(52, 5).unwrap(), (exact as f64).ln()) < 1e-13);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn log_binomial_large_n_against_exact() {
        // C(10^9, 3) computed exactly
        let n: u128 = 1_000_000_000;
        let exact = n * (n - 1) * (n - 2) / 6;
        assert!(rel(log_binomial(1_000_000_000, 3).unwrap(), (exact as f64).ln()) < 1e-14);
    }

    #[test]
    fn stirling_sandwich() {
        // ln sqrt(2 pi) + (n + 1/2) ln n - n <= ln Γ(n + 1) <= same + 1/(12 n),
        // up to a few ulps of the compared magnitudes
        let mut n = 1.0f64;
        while n <= 1e6 {
            let k = n.round();
            let base = LN_SQRT_2PI + (k + 0.5) * k.ln() - k;
            let lg = log_gamma(k + 1.0).unwrap();
            let tol = 8.0 * f64::EPSILON * lg.abs().max(1.0);
            assert!(base - tol <= lg, "lower bound fails at {k}");
            assert!(
                lg <= base + 1.0 / (12.0 * k) + tol,
                "upper bound fails at {k}"
            );
            n *= 1.07;
        }
    }

    #[test]
    fn logreal_arithmetic() {
        let two = LogReal::from_f64(2.0);
        let three = LogReal::from_f64(3.0);
        assert!(rel((two * three).to_f64(), 6.0) < 1e-15);
        assert!(rel((three / two).to_f64(), 1.5) < 1e-15);
        assert!(rel((two + three).to_f64(), 5.0) < 1e-15);
        assert!(rel((two - three).to_f64(), -1.0) < 1e-15);
        assert_eq!(two + LogReal::ZERO, two);
        assert!((two - two).is_zero());
        assert!(matches!(
            two.checked_div(LogReal::ZERO),
            Err(Error::DivideByZero)
        ));
        assert!(rel(two.powf(10.0).unwrap().to_f64(), 1024.0) < 1e-14);
        assert_eq!(LogReal::ZERO.powf(0.0).unwrap(), LogReal::ONE);
    }

    #[test]
    fn logreal_no_overflow() {
        let big = LogReal::from_f64(1e300);
        let prod = big * big;
        assert!((prod.log_abs() - 600.0 * std::f64::consts::LN_10).abs() < 1e-9);
        assert_eq!(prod.to_f64(), f64::INFINITY);
        assert_eq!(format!("{:.3}", prod), "1.000e600");
    }

    #[test]
    fn cancellation_is_flagged() {
        let a = LogReal::from_f64(1.0);
        let b = LogReal::from_f64(-(1.0 - 1e-15));
        let s = a.add_flagged(b);
        assert!(!s.cancelled);
        let x = LogReal::from_ln(100.0);
        let y = -LogReal::from_ln(100.0 + (-80.0f64).exp());
        let s = x.add_flagged(y);
        assert!(s.cancelled);
        assert!(!x.add_flagged(x).cancelled);
    }

    #[test]
    fn ordering() {
        let v: Vec<LogReal> = [-3.0, -0.5, 0.0, 0.25, 7.0]
            .iter()
            .map(|&x| LogReal::from_f64(x))
            .collect();
        for w in v.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn round_trip_sweep() {
        // 10^4 log-uniform points over [1e-300, 1e300]
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let e: f64 = rng.gen_range(-300.0..300.0);
            let x = 10f64.powf(e);
            let back = LogReal::from_f64(x).to_f64();
            assert!(rel(back.ln(), x.ln()) <= 1e-12 || (back.ln() - x.ln()).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn binomial_symmetry(n in 0u64..5_000_000, frac in 0.0f64..1.0) {
            let k = ((n as f64) * frac) as u64;
            prop_assert_eq!(log_binomial(n, k).unwrap(), log_binomial(n, n - k).unwrap());
        }

        #[test]
        fn multiplication_is_additive_in_logs(a in -700.0f64..700.0, b in -700.0f64..700.0) {
            let x = LogReal::from_ln(a) * LogReal::from_ln(b);
            prop_assert!((x.log_abs() - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()).max(1.0));
        }

        #[test]
        fn addition_matches_f64(a in -1e100f64..1e100, b in -1e100f64..1e100) {
            let s = (LogReal::from_f64(a) + LogReal::from_f64(b)).to_f64();
            let want = a + b;
            let scale = a.abs().max(b.abs());
            prop_assert!((s - want).abs() <= 1e-12 * scale);
        }
    }
}
