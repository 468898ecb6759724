//! Double-double reals: an unevaluated sum `hi + lo` of two `f64`s with
//! `|lo| ≤ ulp(hi)/2`, giving about 106 bits of mantissa.
//!
//! Euclidean matching costs are sums of square roots of large exact
//! integers. Plain `f64` cannot separate `√(N²d + δ²)` from `√(N²d)` once
//! `N` is large, so every metric cost goes through this type.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Real {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Real {
    pub const ZERO: Real = Real { hi: 0.0, lo: 0.0 };
    pub const ONE: Real = Real { hi: 1.0, lo: 0.0 };

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn from_f64(x: f64) -> Self {
        Real { hi: x, lo: 0.0 }
    }

    /// Nearest double-double to `x`; exact for `|x| < 2^106`.
    pub fn from_i128(x: i128) -> Self {
        let hi = x as f64;
        // hi is within half an ulp of x, so the remainder fits easily
        let rest = x - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rest as f64);
        Real { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Real::ZERO;
        }
        // one Newton step from the f64 root doubles the precision
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let resid = (self - Real { hi: p, lo: e }).to_f64();
        let (hi, lo) = quick_two_sum(s, resid / (2.0 * s));
        Real { hi, lo }
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Real { hi, lo }
        } else {
            Real { hi, lo: 0.0 }
        }
    }

    /// `|self − other| ≤ rel · max(|self|, |other|, floor)`.
    pub fn approx_eq(self, other: Real, rel: f64, floor: f64) -> bool {
        let scale = self.abs().to_f64().max(other.abs().to_f64()).max(floor);
        (self - other).abs().to_f64() <= rel * scale
    }

    /// Fixed-point decimal with `digits` fractional digits, rounded half up.
    pub fn to_decimal(self, digits: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.to_f64());
        }
        let ten = Real::from_f64(10.0);
        let mut half = Real::from_f64(0.5);
        for _ in 0..digits {
            half = half / ten;
        }
        let x = self.abs() + half;
        let neg = self.hi < 0.0 && x.hi > 2.0 * half.hi;
        let int = x.floor();
        let mut frac = x - int;
        let int_part = int.hi as i128 + int.lo as i128;
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int_part.to_string());
        if digits > 0 {
            s.push('.');
            for _ in 0..digits {
                frac = frac * ten;
                let d = frac.floor();
                let digit = d.to_f64().clamp(0.0, 9.0) as u8;
                s.push((b'0' + digit) as char);
                frac -= d;
            }
        }
        s
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({:e} + {:e})", self.hi, self.lo)
    }
}

/// Prints about 31 significant digits.
impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mag = self.abs().to_f64();
        let int_digits = if mag >= 1.0 { mag.log10().floor() as usize + 1 } else { 1 };
        let digits = 31usize.saturating_sub(int_digits).max(1);
        f.write_str(&self.to_decimal(digits))
    }
}

impl FromStr for Real {
    type Err = Error;

    /// Parses a plain decimal `[-]digits[.digits]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parameter(format!("not a decimal number: {s:?}"));
        let t = s.trim();
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int_val: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let mut x = Real::from_i128(int_val);
        // accumulate the fraction in blocks of 15 digits
        let mut scale = Real::ONE;
        for chunk in frac.as_bytes().chunks(15) {
            let block: i128 = std::str::from_utf8(chunk).unwrap().parse().map_err(|_| bad())?;
            scale = scale / Real::from_f64(10f64.powi(chunk.len() as i32));
            x += Real::from_i128(block) * scale;
        }
        Ok(if neg { -x } else { x })
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, rhs: Real) -> Real {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Real { hi, lo }
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, rhs: Real) -> Real {
        self + (-rhs)
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, rhs: Real) -> Real {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Real { hi, lo }
    }
}

impl Div for Real {
    type Output = Real;
    fn div(self, rhs: Real) -> Real {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Real::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Real::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Real { hi, lo } + Real::from_f64(q3)
    }
}

impl AddAssign for Real {
    fn add_assign(&mut self, rhs: Real) {
        *self = *self + rhs;
    }
}

impl SubAssign for Real {
    fn sub_assign(&mut self, rhs: Real) {
        *self = *self - rhs;
    }
}

impl Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::from_f64(x)
    }
}

impl From<i128> for Real {
    fn from(x: i128) -> Self {
        Real::from_i128(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_two_is_accurate_past_f64() {
        let two = Real::from_f64(2.0);
        let s = two.sqrt();
        let resid = s * s - two;
        assert!(resid.abs().to_f64() < 1e-30, "{resid:?}");
        // f64 alone leaves a residual around 4e-16
        let f = 2f64.sqrt();
        assert!((f * f - 2.0).abs() > 1e-17);
    }

    #[test]
    fn from_i128_is_exact_below_2_pow_106() {
        let x: i128 = (1 << 100) + 12345;
        let r = Real::from_i128(x);
        assert_eq!(r.hi as i128 + r.lo as i128, x);
    }

    #[test]
    fn separates_tiny_radicand_changes() {
        // √(N² + 1) − N for N = 2^50 is about 2^-51; f64 loses it entirely
        let n: i128 = 1 << 50;
        let a = Real::from_i128(n * n + 1).sqrt();
        let diff = (a - Real::from_i128(n)).to_f64();
        let expected = 1.0 / (2.0 * n as f64);
        assert!((diff - expected).abs() < 1e-6 * expected, "{diff} vs {expected}");
    }

    #[test]
    fn decimal_round_trip() {
        let x: Real = "12345.678901234567890123456".parse().unwrap();
        assert_eq!(x.to_decimal(21), "12345.678901234567890123456");
        let y: Real = "-0.5".parse().unwrap();
        assert_eq!(y.to_decimal(3), "-0.500");
        assert_eq!(Real::from_i128(5).to_string(), "5.000000000000000000000000000000");
        assert!("1.2.3".parse::<Real>().is_err());
        assert!("".parse::<Real>().is_err());
    }

    #[test]
    fn ordering_uses_low_part() {
        let a = Real::from_i128((1 << 80) + 1);
        let b = Real::from_i128(1 << 80);
        assert!(a > b);
        assert_eq!(a.hi, b.hi);
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(x in 1u64..u64::MAX) {
            let r = Real::from_i128(x as i128);
            let s = r.sqrt();
            let back = s * s;
            prop_assert!((back - r).abs().to_f64() <= 1e-28 * r.to_f64());
        }

        #[test]
        fn display_parse_round_trip(a in -1_000_000_000i64..1_000_000_000, b in 1u64..1_000_000) {
            let x = Real::from_i128(a as i128) / Real::from_i128(b as i128);
            let back: Real = x.to_string().parse().unwrap();
            prop_assert!(back.approx_eq(x, 1e-25, 1e-25));
        }
    }
}
