//! Writing an integer as a sum of few perfect squares.
//!
//! [`decompose_squares`] peels off the largest square that fits until the
//! remainder drops to `T = max(⌈m^{ρ/2}⌉, 16)`, then finishes the remainder
//! with a minimal (at most four-square) decomposition.
//!
//! Each greedy step maps a remainder `r` to at most `2√r`, so after
//! `j = ⌈log₂(1/ρ)⌉ + 2` steps the remainder is at most
//! `4·(m/4)^{ρ/4} ≤ T`. With at most four squares for the tail, every
//! decomposition has at most [`parts_bound`]`(ρ) = ⌈log₂(1/ρ)⌉ + 6` parts.

use num_integer::Roots;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ratio::{ceil_log2_inverse, ceil_scaled_pow_wide, format_rational};

/// Tail remainders up to this size are finished by a table DP; larger
/// tails (only possible for large `ρ`) use a direct search, which is
/// capped.
const DP_TABLE_LIMIT: u128 = 1 << 16;
const SEARCH_LIMIT: u128 = 1 << 44;

/// Largest argument accepted by [`min_square_count`].
pub const MIN_SQUARE_COUNT_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareDecomposition {
    /// Positive parts in descending order.
    pub parts: Vec<u128>,
    pub target: u128,
    pub rho: Rational64,
}

impl SquareDecomposition {
    pub fn sum_of_squares(&self) -> Option<u128> {
        self.parts
            .iter()
            .try_fold(0u128, |acc, &p| p.checked_mul(p).and_then(|s| acc.checked_add(s)))
    }
}

fn check_rho(rho: Rational64) -> Result<()> {
    if rho <= Rational64::zero() || rho > Rational64::one() {
        return Err(Error::parameter(format!(
            "rho must lie in (0, 1], got {}",
            format_rational(rho)
        )));
    }
    Ok(())
}

/// Maximum number of parts [`decompose_squares`] can return for `rho`.
pub fn parts_bound(rho: Rational64) -> Result<usize> {
    check_rho(rho)?;
    Ok(ceil_log2_inverse(rho)? as usize + 6)
}

/// The remainder at which the greedy phase stops.
pub fn greedy_threshold(m: u128, rho: Rational64) -> Result<u128> {
    check_rho(rho)?;
    Ok(ceil_scaled_pow_wide(1, m.max(1), rho / 2)?.max(16))
}

pub fn decompose_squares(m: u128, rho: Rational64) -> Result<SquareDecomposition> {
    let threshold = greedy_threshold(m, rho)?;
    let mut parts = Vec::new();
    let mut rest = m;
    while rest > threshold {
        let s = rest.sqrt();
        parts.push(s);
        rest -= s * s;
    }
    if rest > SEARCH_LIMIT {
        return Err(Error::capacity(format!(
            "greedy remainder {rest} is too large to finish; use a smaller rho"
        )));
    }
    parts.extend(finish(rest));
    parts.sort_unstable_by(|a, b| b.cmp(a));

    let bound = parts_bound(rho)?;
    if parts.len() > bound {
        return Err(Error::invariant(format!(
            "{m} decomposed into {} squares, bound is {bound}",
            parts.len()
        )));
    }
    Ok(SquareDecomposition {
        parts,
        target: m,
        rho,
    })
}

/// A minimal decomposition of a small remainder.
fn finish(r: u128) -> Vec<u128> {
    if r == 0 {
        return Vec::new();
    }
    if r > DP_TABLE_LIMIT {
        return search_four(r);
    }
    let r = r as usize;
    // best[x] = fewest squares summing to x; step[x] = largest square root used
    let mut best = vec![u8::MAX; r + 1];
    let mut step = vec![0usize; r + 1];
    best[0] = 0;
    for x in 1..=r {
        let mut s = x.sqrt();
        while s >= 1 {
            let c = best[x - s * s].saturating_add(1);
            if c < best[x] {
                best[x] = c;
                step[x] = s;
            }
            s -= 1;
        }
    }
    let mut parts = Vec::with_capacity(best[r] as usize);
    let mut x = r;
    while x > 0 {
        parts.push(step[x] as u128);
        x -= step[x] * step[x];
    }
    parts
}

fn is_square(x: u128) -> Option<u128> {
    let s = x.sqrt();
    (s * s == x).then_some(s)
}

fn two_squares(x: u128) -> Option<[u128; 2]> {
    let mut a = x.sqrt();
    while 2 * a * a >= x {
        if let Some(b) = is_square(x - a * a) {
            return Some([a, b]);
        }
        if a == 0 {
            break;
        }
        a -= 1;
    }
    None
}

/// Needs four squares exactly when `x = 4^a (8b + 7)`.
fn needs_four(mut x: u128) -> bool {
    while x > 0 && x.is_multiple_of(4) {
        x /= 4;
    }
    x % 8 == 7
}

fn search_three(x: u128) -> Option<[u128; 3]> {
    let mut a = x.sqrt();
    while a > 0 {
        if let Some([b, c]) = two_squares(x - a * a) {
            return Some([a, b, c]);
        }
        a -= 1;
    }
    None
}

fn search_four(x: u128) -> Vec<u128> {
    let keep = |v: &[u128]| v.iter().copied().filter(|&p| p > 0).collect::<Vec<_>>();
    if let Some(s) = is_square(x) {
        return vec![s];
    }
    if let Some(p) = two_squares(x) {
        return keep(&p);
    }
    if !needs_four(x) {
        if let Some(p) = search_three(x) {
            return keep(&p);
        }
    }
    let mut a = x.sqrt();
    loop {
        if let Some(p) = search_three(x - a * a) {
            let mut v = vec![a];
            v.extend(keep(&p));
            return v;
        }
        a -= 1;
    }
}

/// Exact minimum number of positive squares summing to `m`, for
/// `1 ≤ m ≤ 10⁷`. Decides 1, 2 and 3 by direct search; anything else
/// takes four.
pub fn min_square_count(m: u64) -> Result<u32> {
    if m == 0 {
        return Err(Error::parameter("min_square_count needs m ≥ 1"));
    }
    if m > MIN_SQUARE_COUNT_CAP {
        return Err(Error::capacity(format!(
            "min_square_count is capped at {MIN_SQUARE_COUNT_CAP}, got {m}"
        )));
    }
    let m = m as u128;
    Ok(if is_square(m).is_some() {
        1
    } else if two_squares(m).is_some() {
        2
    } else if search_three(m).is_some() {
        3
    } else {
        4
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rho16() -> Rational64 {
        Rational64::new(1, 16)
    }

    fn check(m: u128, rho: Rational64) -> SquareDecomposition {
        let d = decompose_squares(m, rho).unwrap();
        assert_eq!(d.sum_of_squares(), Some(m));
        assert!(d.parts.iter().all(|&p| p > 0));
        assert!(d.parts.windows(2).all(|w| w[0] >= w[1]));
        d
    }

    #[test]
    fn small_examples() {
        assert_eq!(check(1, rho16()).parts, vec![1]);
        assert_eq!(check(12, rho16()).parts, vec![2, 2, 2]);
        assert_eq!(check(7, rho16()).parts, vec![2, 1, 1, 1]);
        assert_eq!(check(0, rho16()).parts, Vec::<u128>::new());
    }

    #[test]
    fn min_counts() {
        assert_eq!(min_square_count(25).unwrap(), 1);
        assert_eq!(min_square_count(3).unwrap(), 3);
        assert_eq!(min_square_count(7).unwrap(), 4);
        assert_eq!(min_square_count(12).unwrap(), 3);
        assert_eq!(min_square_count(2).unwrap(), 2);
        assert!(matches!(min_square_count(10_000_001), Err(Error::Capacity(_))));
        assert!(min_square_count(0).is_err());
    }

    #[test]
    fn min_count_agrees_with_table_dp() {
        let n = 5000usize;
        let mut best = vec![u32::MAX; n + 1];
        best[0] = 0;
        for x in 1..=n {
            let mut s = 1;
            while s * s <= x {
                best[x] = best[x].min(best[x - s * s] + 1);
                s += 1;
            }
        }
        for (x, &b) in best.iter().enumerate().skip(1) {
            assert_eq!(min_square_count(x as u64).unwrap(), b, "m = {x}");
        }
    }

    #[test]
    fn tail_is_minimal_below_threshold() {
        for m in 1..=16u64 {
            let d = check(m as u128, rho16());
            assert_eq!(d.parts.len() as u32, min_square_count(m).unwrap());
        }
    }

    #[test]
    fn bound_constant() {
        assert_eq!(parts_bound(rho16()).unwrap(), 10);
        assert_eq!(parts_bound(Rational64::new(1, 1)).unwrap(), 6);
        assert!(parts_bound(Rational64::new(0, 1)).is_err());
        assert!(decompose_squares(5, Rational64::new(-1, 2)).is_err());
    }

    #[test]
    fn huge_targets() {
        let rho = rho16();
        for m in [u128::MAX / 3, (1u128 << 100) + 7, 999_999_999_999_999_999] {
            let d = check(m, rho);
            assert!(d.parts.len() <= parts_bound(rho).unwrap());
        }
        // large rho forces the search tail
        let d = check((1u128 << 60) - 1, Rational64::new(1, 1));
        assert!(d.parts.len() <= 6);
        assert!(matches!(
            decompose_squares(u128::MAX / 2, Rational64::new(1, 1)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn greedy_never_overshoots() {
        let d = check(1_000_003, rho16());
        let mut rest = 1_000_003u128;
        for p in &d.parts {
            assert!(p * p <= rest);
            rest -= p * p;
        }
    }

    proptest! {
        #[test]
        fn sums_and_bound_hold(m in 0u128..u128::MAX / 2, num in 1i64..4, den in 1i64..64) {
            prop_assume!(4 * num <= den);
            let rho = Rational64::new(num, den);
            let d = decompose_squares(m, rho).unwrap();
            prop_assert_eq!(d.sum_of_squares(), Some(m));
            prop_assert!(d.parts.len() <= parts_bound(rho).unwrap());
            prop_assert_eq!(decompose_squares(m, rho).unwrap(), d);
        }
    }
}
