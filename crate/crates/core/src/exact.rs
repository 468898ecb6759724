//! Closest pair → EMD, and closest pair → low-rank assignment.
//!
//! Input points (coordinates in `[0, ⌊n^k⌋]`) are parity-lifted to
//! dimension `d`, then placed in `D = 2d + 2c + 2` coordinates laid out as
//!
//! ```text
//! [0, d)                 N-block
//! [d, d+c+1)             adj block of left points
//! [d+c+1, d+2c+2)        adj block of right points
//! [d+2c+2, 2d+2c+2)      the lifted point
//! ```
//!
//! with `f(a) = 0^d adj_a 0^{c+1} a`, `g(b) = N^d 0^{c+1} adj_b b`,
//! `u = 0^d (1 0^c) 0^{c+1} 0^d` and `v = N^d 0^{c+1} (1 0^c) 0^d`. The left
//! side is `f(A)` followed by `n − 1` copies of `v`, the right side `g(B)`
//! followed by `n − 1` copies of `u`.
//!
//! `adj_a = (adj₀, s₁, …, s_c)` with `adj₀ = (‖a‖² + 1)/2` and the `sᵢ` a
//! square decomposition of `R² − adj₀²`, so `‖f(a) − u‖² = R²` for every `a`.
//! `R` must dominate `adj₀` for every lifted point. Lifted coordinates lie in
//! `[0, 2⌊n^k⌋]`, so `R = (2⌊n^k⌋)²·d` works; the optimal matching then has
//! cost `2(n−1)R + min √(N²d + 2R² + ‖a − b‖²)` over lifted pairs.

use num_integer::Roots;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{CostOracle, Matching};
use crate::ratio::{ceil_scaled_pow_wide, floor_pow, format_rational, parse_rational};
use crate::real::Real;
use crate::squares::{decompose_squares, parts_bound};
use crate::vectors::{parity_lift, IntVector, PointSetPair, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NMode {
    /// `N = ⌈n^{16k}⌉`.
    Full,
    /// Smallest power of two with `N²d > 4(2n)²(R² + max cross ‖a − b‖²)`.
    Desk,
}

/// The constants needed to invert the cost formulas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConstants {
    pub n: usize,
    /// Lifted input dimension.
    pub d: usize,
    pub k: String,
    pub c: usize,
    #[serde(rename = "N")]
    pub big_n: i128,
    pub adj_norm_sq: i128,
}

impl ExactConstants {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("constants serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        parse_rational(&c.k)?;
        c.adj_norm()?;
        Ok(c)
    }

    /// `R`, the common distance from every left original to `u`.
    pub fn adj_norm(&self) -> Result<i128> {
        let r = self.adj_norm_sq.max(0).sqrt();
        if r * r != self.adj_norm_sq {
            return Err(Error::inconsistency(format!(
                "adj_norm_sq {} is not a perfect square",
                self.adj_norm_sq
            )));
        }
        Ok(r)
    }

    /// `N²d`.
    pub fn gap_sq(&self) -> Result<i128> {
        checked(|| self.big_n.checked_mul(self.big_n)?.checked_mul(self.d as i128))
    }

    /// Cost of the `2(n−1)` padding edges, `2(n−1)R`.
    pub fn emd_base(&self) -> Result<i128> {
        let r = self.adj_norm()?;
        checked(|| (2 * (self.n as i128 - 1)).checked_mul(r))
    }

    /// `N²d + 2R²`, the radicand of the cross edge without `‖a − b‖²`.
    pub fn cross_offset(&self) -> Result<i128> {
        checked(|| self.gap_sq().ok()?.checked_add(self.adj_norm_sq.checked_mul(2)?))
    }

    /// EMD of the reduced instance when the closest lifted pair is at squared
    /// distance `delta_sq`.
    pub fn emd_formula(&self, delta_sq: i128) -> Result<Real> {
        let rad = checked(|| self.cross_offset().ok()?.checked_add(delta_sq))?;
        Ok(Real::from_i128(self.emd_base()?) + Real::from_i128(rad).sqrt())
    }

    /// SQEMD of the reduced instance when the closest lifted pair is at
    /// squared distance `delta_sq`: `2(n−1)R² + N²d + 2R² + δ²`.
    pub fn sqemd_formula(&self, delta_sq: i128) -> Result<i128> {
        checked(|| {
            (2 * (self.n as i128 - 1))
                .checked_mul(self.adj_norm_sq)?
                .checked_add(self.cross_offset().ok()?)?
                .checked_add(delta_sq)
        })
    }
}

fn checked<T>(f: impl FnOnce() -> Option<T>) -> Result<T> {
    f().ok_or_else(|| Error::capacity("reduction constants overflow 127 bits"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedExactInstance {
    pub pair: PointSetPair<IntVector>,
    pub n: usize,
    /// Lifted input dimension.
    pub d: usize,
    pub k: Rational64,
    pub c: usize,
    pub big_n: i128,
    pub u: IntVector,
    pub v: IntVector,
    pub adj_norm_sq: i128,
    pub mode: NMode,
}

impl ReducedExactInstance {
    pub fn constants(&self) -> ExactConstants {
        ExactConstants {
            n: self.n,
            d: self.d,
            k: format_rational(self.k),
            c: self.c,
            big_n: self.big_n,
            adj_norm_sq: self.adj_norm_sq,
        }
    }

    /// Number of matched pairs joining a left original to a right original.
    pub fn original_edges(&self, m: &Matching) -> usize {
        m.pairs.iter().filter(|&&(l, r)| l < self.n && r < self.n).count()
    }

    /// The gap conditions the construction relies on: `‖u − v‖²` and every
    /// original cross distance are at least `N²d`, while `R²` stays below
    /// `N²d / n²`.
    pub fn check_gaps(&self) -> Result<()> {
        let consts = self.constants();
        let gap = consts.gap_sq()?;
        if self.u.sq_dist_to(&self.v)? < gap {
            return Err(Error::invariant("‖u − v‖² below N²d"));
        }
        let n = self.n;
        for a in &self.pair.left()[..n] {
            if a.sq_dist_to(&self.u)? != self.adj_norm_sq {
                return Err(Error::invariant("left original not at distance R from u"));
            }
            for b in &self.pair.right()[..n] {
                if a.sq_dist_to(b)? < gap {
                    return Err(Error::invariant("cross distance below N²d"));
                }
            }
        }
        for b in &self.pair.right()[..n] {
            if b.sq_dist_to(&self.v)? != self.adj_norm_sq {
                return Err(Error::invariant("right original not at distance R from v"));
            }
        }
        let n_sq = (n as i128) * (n as i128);
        if self.adj_norm_sq.checked_mul(n_sq).is_none_or(|x| x >= gap) {
            return Err(Error::invariant("R² not below N²d / n²"));
        }
        Ok(())
    }
}

fn adj_vector(lifted: &IntVector, target: i128, rho: Rational64, c: usize) -> Result<Vec<i128>> {
    let norm = lifted.sq_norm()?;
    let adj0 = (norm + 1) / 2;
    let residual = adj0
        .checked_mul(adj0)
        .map(|sq| target - sq)
        .filter(|r| *r >= 0)
        .ok_or_else(|| Error::invariant(format!("adj residual negative for norm {norm}")))?;
    let parts = decompose_squares(residual as u128, rho)?.parts;
    if parts.len() > c {
        return Err(Error::invariant(format!(
            "{} square parts exceed c = {c}",
            parts.len()
        )));
    }
    let mut adj = Vec::with_capacity(c + 1);
    adj.push(adj0);
    adj.extend(parts.iter().map(|&p| p as i128));
    adj.resize(c + 1, 0);
    Ok(adj)
}

fn full_n(n: usize, k: Rational64) -> Result<i128> {
    let big = ceil_scaled_pow_wide(1, n as u128, k * 16)?;
    i128::try_from(big).map_err(|_| Error::capacity("N = n^{16k} exceeds 127 bits"))
}

fn desk_n(n: usize, d: usize, adj_norm_sq: i128, max_cross: i128) -> Result<i128> {
    let two_n = 2 * n as i128;
    let target = checked(|| {
        adj_norm_sq
            .checked_add(max_cross)?
            .checked_mul(4)?
            .checked_mul(two_n * two_n)
    })?;
    let mut big_n: i128 = 1;
    loop {
        let lhs = checked(|| big_n.checked_mul(big_n)?.checked_mul(d as i128))?;
        if lhs > target {
            return Ok(big_n);
        }
        big_n = checked(|| big_n.checked_mul(2))?;
    }
}

/// Builds the reduced EMD instance for a closest-pair instance with
/// `|A| = |B| = n` and coordinates in `[0, ⌊n^k⌋]`.
pub fn build_exact_reduction(
    input: &PointSetPair<IntVector>,
    k: Rational64,
    mode: NMode,
) -> Result<ReducedExactInstance> {
    if k <= Rational64::zero() {
        return Err(Error::parameter(format!("k must be positive, got {}", format_rational(k))));
    }
    let n = input.left().len();
    if n == 0 || input.right().len() != n {
        return Err(Error::shape(format!(
            "closest-pair reduction needs equal nonempty sides, got {} and {}",
            n,
            input.right().len()
        )));
    }
    let bound = floor_pow(n as u64, k)? as i128;
    for (side, points) in [("left", input.left()), ("right", input.right())] {
        for (id, p) in points.iter().enumerate() {
            if let Some(x) = p.coords().iter().find(|&&x| x < 0 || x > bound) {
                return Err(Error::shape(format!(
                    "{side} point {id} has coordinate {x} outside [0, {bound}]"
                )));
            }
        }
    }

    let lift_all = |ps: &[IntVector]| ps.iter().map(parity_lift).collect::<Result<Vec<_>>>();
    let lifted_a = lift_all(input.left())?;
    let lifted_b = lift_all(input.right())?;
    let d = input.dim() + 1;

    let lifted_bound = 2 * bound;
    let radius = checked(|| lifted_bound.checked_mul(lifted_bound)?.checked_mul(d as i128))?;
    let adj_norm_sq = checked(|| radius.checked_mul(radius))?;
    let rho = Rational64::one() / (k * 16);
    let c = parts_bound(rho)?;

    let big_n = match mode {
        NMode::Full => full_n(n, k)?,
        NMode::Desk => {
            let mut max_cross = 0;
            for a in &lifted_a {
                for b in &lifted_b {
                    max_cross = max_cross.max(a.sq_dist_to(b)?);
                }
            }
            desk_n(n, d, adj_norm_sq, max_cross)?
        }
    };

    let dim = 2 * d + 2 * c + 2;
    let adj_a_at = d;
    let adj_b_at = d + c + 1;
    let point_at = d + 2 * c + 2;

    let mut u = vec![0i128; dim];
    u[adj_a_at] = 1;
    let mut v = vec![0i128; dim];
    v[..d].fill(big_n);
    v[adj_b_at] = 1;

    let mut left = Vec::with_capacity(2 * n - 1);
    for a in &lifted_a {
        let mut x = vec![0i128; dim];
        x[adj_a_at..adj_b_at].copy_from_slice(&adj_vector(a, adj_norm_sq, rho, c)?);
        x[point_at..].copy_from_slice(a.coords());
        left.push(IntVector::new(x));
    }
    let mut right = Vec::with_capacity(2 * n - 1);
    for b in &lifted_b {
        let mut y = vec![0i128; dim];
        y[..d].fill(big_n);
        y[adj_b_at..point_at].copy_from_slice(&adj_vector(b, adj_norm_sq, rho, c)?);
        y[point_at..].copy_from_slice(b.coords());
        right.push(IntVector::new(y));
    }
    let (u, v) = (IntVector::new(u), IntVector::new(v));
    left.extend(std::iter::repeat_n(v.clone(), n - 1));
    right.extend(std::iter::repeat_n(u.clone(), n - 1));

    let inst = ReducedExactInstance {
        pair: PointSetPair::new(dim, left, right)?,
        n,
        d,
        k,
        c,
        big_n,
        u,
        v,
        adj_norm_sq,
        mode,
    };
    // every radicand the solvers form must fit
    inst.constants().sqemd_formula(0)?;
    Ok(inst)
}

/// Closest lifted-pair distance from the EMD of a reduced instance. Halve
/// it for the distance between the original points.
pub fn recover_closest_pair(emd_value: Real, consts: &ExactConstants) -> Result<Real> {
    let base = Real::from_i128(consts.emd_base()?);
    let offset = consts.cross_offset()?;
    if emd_value < base {
        return Err(Error::inconsistency(format!(
            "EMD value {emd_value} below the padding cost {base}"
        )));
    }
    let t = emd_value - base;
    let rad = t.square() - Real::from_i128(offset);
    // t² carries about 2⁻¹⁰⁰ relative error
    let slack = 4.0 + 1e-28 * offset as f64;
    if rad.to_f64() < -slack {
        return Err(Error::inconsistency(format!(
            "EMD value {emd_value} gives negative radicand {rad}"
        )));
    }
    Ok(rad.sqrt())
}

/// Closest lifted-pair squared distance from the optimal assignment cost.
pub fn recover_closest_pair_sq(assign_cost: i128, consts: &ExactConstants) -> Result<i128> {
    let delta = assign_cost - consts.sqemd_formula(0)?;
    if delta < 0 {
        return Err(Error::inconsistency(format!(
            "assignment cost {assign_cost} below the padding cost"
        )));
    }
    Ok(delta)
}

/// `M = U·Vᵀ` with `M_ij = ‖A′_i − B′_j‖²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowRankFactorization {
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
    pub rank: usize,
}

impl LowRankFactorization {
    /// Rows `[−2a, ‖a‖², 1]` against `[b, 1, ‖b‖²]`.
    pub fn of_pair(pair: &PointSetPair<IntVector>) -> Result<Self> {
        let u = pair
            .left()
            .iter()
            .map(|a| {
                let mut row = a
                    .coords()
                    .iter()
                    .map(|&x| x.checked_mul(-2))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::capacity("factor entry overflows 127 bits"))?;
                row.push(a.sq_norm()?);
                row.push(1);
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let v = pair
            .right()
            .iter()
            .map(|b| {
                let mut row = b.coords().to_vec();
                row.push(1);
                row.push(b.sq_norm()?);
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            u,
            v,
            rank: pair.dim() + 2,
        })
    }

    pub fn oracle(&self) -> Result<CostOracle> {
        CostOracle::factorized(self.u.clone(), self.v.clone())
    }

    /// The explicit product `U·Vᵀ`.
    pub fn product(&self) -> Result<Vec<Vec<i128>>> {
        let oracle = self.oracle()?;
        (0..self.u.len())
            .map(|i| {
                (0..self.v.len())
                    .map(|j| oracle.exact_cost(i, j).expect("integer mode"))
                    .collect()
            })
            .collect()
    }
}

pub fn build_lowrank_assignment(
    input: &PointSetPair<IntVector>,
    k: Rational64,
    mode: NMode,
) -> Result<(LowRankFactorization, ReducedExactInstance)> {
    let inst = build_exact_reduction(input, k, mode)?;
    let f = LowRankFactorization::of_pair(&inst.pair)?;
    Ok((f, inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{emd, min_cost_matching, sqemd, MatchingKind};

    fn pts(rows: &[&[i128]]) -> Vec<IntVector> {
        rows.iter().map(|r| IntVector::new(r.to_vec())).collect()
    }

    fn example() -> PointSetPair<IntVector> {
        PointSetPair::new(
            2,
            pts(&[&[1, 1], &[2, 1], &[1, 2]]),
            pts(&[&[2, 2], &[1, 1], &[2, 1]]),
        )
        .unwrap()
    }

    fn one() -> Rational64 {
        Rational64::one()
    }

    #[test]
    fn sizes_and_padding_distances() {
        let inst = build_exact_reduction(&example(), one(), NMode::Desk).unwrap();
        assert_eq!(inst.pair.left().len(), 5);
        assert_eq!(inst.pair.right().len(), 5);
        assert_eq!(inst.d, 3);
        assert_eq!(inst.c, 10);
        assert_eq!(inst.pair.dim(), 2 * 3 + 2 * 10 + 2);
        inst.check_gaps().unwrap();
    }

    #[test]
    fn example_recovers_closest_pair() {
        // (1,1) occurs on both sides
        let inst = build_exact_reduction(&example(), one(), NMode::Desk).unwrap();
        let (cost, m) = emd(&inst.pair).unwrap();
        assert_eq!(inst.original_edges(&m), 1);
        let dist = recover_closest_pair(cost, &inst.constants()).unwrap();
        assert!(dist.to_f64().abs() < 1e-6, "{dist}");
        let (sq, _) = sqemd(&inst.pair).unwrap();
        assert_eq!(recover_closest_pair_sq(sq, &inst.constants()).unwrap(), 0);
    }

    #[test]
    fn parity_lift_can_push_adj0_past_the_naive_bound() {
        // n = 3, k = 1, a = (3): lifted (6, 1) has norm 37, adj₀ = 19 > 3²·1·2
        let pair = PointSetPair::new(1, pts(&[&[3], &[0], &[1]]), pts(&[&[2], &[3], &[0]])).unwrap();
        let inst = build_exact_reduction(&pair, one(), NMode::Desk).unwrap();
        inst.check_gaps().unwrap();
    }

    #[test]
    fn full_mode_uses_n_to_the_16k() {
        let pair = PointSetPair::new(1, pts(&[&[1], &[2]]), pts(&[&[2], &[1]])).unwrap();
        let inst = build_exact_reduction(&pair, one(), NMode::Full).unwrap();
        assert_eq!(inst.big_n, 1 << 16);
        inst.check_gaps().unwrap();
        let (cost, m) = emd(&inst.pair).unwrap();
        assert_eq!(inst.original_edges(&m), 1);
        let dist = recover_closest_pair(cost, &inst.constants()).unwrap();
        assert!(dist.to_f64().abs() < 1e-3, "{dist}");
    }

    #[test]
    fn rejects_bad_input() {
        let pair = PointSetPair::new(1, pts(&[&[5], &[1]]), pts(&[&[1], &[1]])).unwrap();
        assert!(matches!(build_exact_reduction(&pair, one(), NMode::Desk), Err(Error::Shape(_))));
        let pair = PointSetPair::new(1, pts(&[&[1]]), pts(&[&[1], &[1]])).unwrap();
        assert!(matches!(build_exact_reduction(&pair, one(), NMode::Desk), Err(Error::Shape(_))));
        assert!(matches!(
            build_exact_reduction(&example(), Rational64::zero(), NMode::Desk),
            Err(Error::Parameter(_))
        ));
        let ones: Vec<&[i128]> = vec![&[1]; 16];
        let big = PointSetPair::new(1, pts(&ones), pts(&ones)).unwrap();
        assert!(matches!(build_exact_reduction(&big, one(), NMode::Full), Err(Error::Capacity(_))));
    }

    #[test]
    fn formula_round_trips() {
        let inst = build_exact_reduction(&example(), one(), NMode::Desk).unwrap();
        let consts = inst.constants();
        for delta_sq in [0i128, 1, 4, 37, 400, 12345] {
            let e = consts.emd_formula(delta_sq).unwrap();
            let back = recover_closest_pair(e, &consts).unwrap();
            let want = (delta_sq as f64).sqrt();
            assert!((back.to_f64() - want).abs() <= 1e-6 * want.max(1.0), "{delta_sq}: {back}");
            let s = consts.sqemd_formula(delta_sq).unwrap();
            assert_eq!(recover_closest_pair_sq(s, &consts).unwrap(), delta_sq);
        }
        assert!(matches!(
            recover_closest_pair(Real::ONE, &consts),
            Err(Error::Inconsistency(_))
        ));
        assert!(matches!(recover_closest_pair_sq(0, &consts), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn lowrank_reproduces_squared_distances() {
        let (f, inst) = build_lowrank_assignment(&example(), one(), NMode::Desk).unwrap();
        assert_eq!(f.rank, 2 * inst.d + 2 * inst.c + 4);
        let prod = f.product().unwrap();
        for (i, a) in inst.pair.left().iter().enumerate() {
            for (j, b) in inst.pair.right().iter().enumerate() {
                assert_eq!(prod[i][j], a.sq_dist_to(b).unwrap());
            }
        }
        let m = min_cost_matching(&f.oracle().unwrap(), MatchingKind::Bijection).unwrap();
        let cost = m.cost.exact().unwrap();
        assert_eq!(cost, inst.constants().sqemd_formula(0).unwrap());
    }

    #[test]
    fn single_point_factorization() {
        let pair = PointSetPair::new(2, pts(&[&[1, 0]]), pts(&[&[0, 1]])).unwrap();
        let (f, inst) = build_lowrank_assignment(&pair, one(), NMode::Desk).unwrap();
        let prod = f.product().unwrap();
        assert_eq!(prod.len(), 1);
        assert_eq!(prod[0][0], inst.pair.left()[0].sq_dist_to(&inst.pair.right()[0]).unwrap());
    }

    #[test]
    fn constants_json_round_trip() {
        let inst = build_exact_reduction(&example(), one(), NMode::Desk).unwrap();
        let c = inst.constants();
        let s = c.to_json();
        assert!(s.contains("\"N\":"));
        assert_eq!(ExactConstants::from_json(&s).unwrap(), c);
    }
}
