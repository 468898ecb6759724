//! Rational parameters and exact rounding of rational powers.
//!
//! Sample sizes, copy counts and thresholds are all of the form
//! `⌈c · n^e⌉` for a rational exponent `e`; computing them in floating point
//! rounds wrongly at exact powers (`16^(1/2)` must give 4, not 5), so they are
//! evaluated here with big integers.

use num_bigint::BigUint;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"3"`, `"1/16"`, or a decimal such as `"0.7"`.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::parameter(format!("not a rational number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let int_abs: i64 = if int_digits.is_empty() {
            0
        } else {
            int_digits.parse().map_err(|_| bad())?
        };
        let den = 10i64.pow(frac.len() as u32);
        let frac: i64 = frac.parse().map_err(|_| bad())?;
        let num = int_abs
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac))
            .ok_or_else(bad)?;
        return Ok(Rational64::new(if negative { -num } else { num }, den));
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}

pub fn format_rational(r: Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Splits `coef · n^e` into the comparison `m^q · lhs_extra  ?  rhs` used by
/// both rounding directions: `m ≥ coef·n^(p/q)` iff `m^q · n^{-p} ≥ coef^q`
/// for negative `p`, and `m^q ≥ coef^q · n^p` otherwise.
struct PowerCmp {
    q: u32,
    lhs_extra: BigUint,
    rhs: BigUint,
}

impl PowerCmp {
    fn new(coef: u64, n: u128, e: Rational64) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("base of a rational power must be positive"));
        }
        let q = u32::try_from(*e.denom())
            .map_err(|_| Error::capacity("exponent denominator too large"))?;
        let p = e.numer().unsigned_abs();
        let p = u32::try_from(p).map_err(|_| Error::capacity("exponent numerator too large"))?;
        let npow = BigUint::from(n).pow(p);
        let cq = BigUint::from(coef).pow(q);
        let (lhs_extra, rhs) = if e.is_negative() {
            (npow, cq)
        } else {
            (BigUint::one(), cq * npow)
        };
        Ok(Self { q, lhs_extra, rhs })
    }

    fn lhs(&self, m: u128) -> BigUint {
        BigUint::from(m).pow(self.q) * &self.lhs_extra
    }

    /// A value of `m` with `lhs(m) > rhs`.
    fn upper(&self) -> Result<u128> {
        let mut hi = 1u128;
        while self.lhs(hi) <= self.rhs {
            hi = hi
                .checked_mul(2)
                .ok_or_else(|| Error::capacity("rational power beyond 128 bits"))?;
        }
        Ok(hi)
    }
}

fn narrow(x: u128) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::capacity("rational power beyond 64 bits"))
}

/// `⌈coef · n^e⌉`, exactly.
pub fn ceil_scaled_pow(coef: u64, n: u64, e: Rational64) -> Result<u64> {
    narrow(ceil_scaled_pow_wide(coef, n.into(), e)?)
}

/// `⌊coef · n^e⌋`, exactly.
pub fn floor_scaled_pow(coef: u64, n: u64, e: Rational64) -> Result<u64> {
    narrow(floor_scaled_pow_wide(coef, n.into(), e)?)
}

/// `coef^q · n^p` for `e = p/q ≥ 0` when it fits in 128 bits.
fn small_rhs(coef: u64, n: u128, e: Rational64) -> Option<(u128, u32)> {
    if e.is_negative() {
        return None;
    }
    let q = u32::try_from(*e.denom()).ok()?;
    let p = u32::try_from(*e.numer()).ok()?;
    (coef as u128).checked_pow(q)?.checked_mul(n.checked_pow(p)?).map(|r| (r, q))
}

/// Smallest `m` with `m^q ≥ rhs`.
fn ceil_root(rhs: u128, q: u32) -> u128 {
    let reaches = |m: u128| m.checked_pow(q).is_none_or(|x| x >= rhs);
    let mut m = (rhs as f64).powf(1.0 / q as f64).round() as u128;
    while !reaches(m) {
        m += 1;
    }
    while m > 0 && reaches(m - 1) {
        m -= 1;
    }
    m
}

/// `⌈coef · n^e⌉` for a 128-bit base.
pub fn ceil_scaled_pow_wide(coef: u64, n: u128, e: Rational64) -> Result<u128> {
    if coef == 0 {
        return Ok(0);
    }
    if n > 0 {
        if let Some((rhs, q)) = small_rhs(coef, n, e) {
            return Ok(ceil_root(rhs, q));
        }
    }
    let cmp = PowerCmp::new(coef, n, e)?;
    // smallest m with lhs(m) >= rhs
    let (mut lo, mut hi) = (0u128, cmp.upper()?);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if cmp.lhs(mid) >= cmp.rhs {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `⌊coef · n^e⌋` for a 128-bit base.
pub fn floor_scaled_pow_wide(coef: u64, n: u128, e: Rational64) -> Result<u128> {
    if coef == 0 {
        return Ok(0);
    }
    if n > 0 {
        if let Some((rhs, q)) = small_rhs(coef, n, e) {
            // largest m with m^q ≤ rhs
            let m = ceil_root(rhs, q);
            return Ok(if m.checked_pow(q) == Some(rhs) { m } else { m - 1 });
        }
    }
    let cmp = PowerCmp::new(coef, n, e)?;
    // largest m with lhs(m) <= rhs
    let (mut lo, mut hi) = (0u128, cmp.upper()?);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if cmp.lhs(mid) <= cmp.rhs {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

pub fn ceil_pow(n: u64, e: Rational64) -> Result<u64> {
    ceil_scaled_pow(1, n, e)
}

pub fn floor_pow(n: u64, e: Rational64) -> Result<u64> {
    floor_scaled_pow(1, n, e)
}

/// `⌈√(num/den)⌉` for positive integers.
pub fn ceil_sqrt_ratio(num: u64, den: u64) -> u64 {
    assert!(den > 0);
    let mut m = ((num as f64 / den as f64).sqrt().floor() as u64).saturating_sub(1);
    while (m as u128) * (m as u128) * (den as u128) < num as u128 {
        m += 1;
    }
    m
}

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n > 0);
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// `⌈log₂(1/ρ)⌉` for `0 < ρ ≤ 1`.
pub fn ceil_log2_inverse(rho: Rational64) -> Result<u32> {
    if rho <= Rational64::zero() || rho > Rational64::one() {
        return Err(Error::parameter(format!(
            "rho must lie in (0, 1], got {}",
            format_rational(rho)
        )));
    }
    // smallest j with 2^j * numer >= denom
    let (num, den) = (*rho.numer() as u128, *rho.denom() as u128);
    let mut j = 0u32;
    while (num << j) < den {
        j += 1;
    }
    Ok(j)
}

pub fn rational_in_open_unit(r: Rational64, name: &str) -> Result<()> {
    if r <= Rational64::zero() || r >= Rational64::one() {
        return Err(Error::parameter(format!(
            "{name} must lie in (0, 1), got {}",
            format_rational(r)
        )));
    }
    Ok(())
}

pub fn to_u64(r: Rational64) -> Option<u64> {
    if r.is_integer() {
        r.numer().to_u64()
    } else {
        None
    }
}
