//! Binary embeddings between asymmetric EMD, maximum orthogonal matching
//! (MOM) and orthogonal vectors.
//!
//! The MOM gadget has dimension `D = 12d + 1`:
//!
//! ```text
//! [0, 3d)          product region: φ₁(a) on the left, φ₂(b) on the right
//! [3d, 6d)         a-padding: |a| + 2 leading ones
//! [6d, 9d)         b-padding: d + |b| leading ones
//! [9d, 12d+1)      v-region; v is all ones here
//!   [9d, 10d−1)    a-indicator, all ones in every a″
//!   [12d, 12d+1)   b-indicator, one in every b″
//! ```
//!
//! Every vector has squared norm `3d + 1`, `a″·b″ = d − a·b` and
//! `a″·v = d − 1`, hence `‖a″ − b″‖² = 2a·b + 4d + 2` and
//! `‖a″ − v‖² = 4d + 4`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{asymmetric_emd, Cost, Matching, MatchingKind};
use crate::ratio::ceil_scaled_pow;
use crate::real::Real;
use crate::vectors::{duplicate, BinaryVector, PointSetPair, Vector};

use num_rational::Rational64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `φ₁(a)_i = (a_i, 1−a_i, 1−a_i)`, `φ₂(b)_i = (1−b_i, b_i, 1−b_i)`, so that
/// `φ₁(a)·φ₂(b) = d − a·b`.
pub fn negate_product(a: &BinaryVector, side: Side) -> BinaryVector {
    let mut out = BinaryVector::zeros(3 * a.dim());
    for (i, bit) in a.bits().enumerate() {
        let (x, y, z) = match side {
            Side::Left => (bit, !bit, !bit),
            Side::Right => (!bit, bit, !bit),
        };
        out.set(3 * i, x);
        out.set(3 * i + 1, y);
        out.set(3 * i + 2, z);
    }
    out
}

fn embed_doubled(a: &BinaryVector) -> BinaryVector {
    a.concat(&a.complement())
}

/// Layout of a symmetrized instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrizeLayout {
    pub d: usize,
    pub left_count: usize,
    pub right_count: usize,
    pub zero_pad_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizedInstance {
    pub pair: PointSetPair<BinaryVector>,
    pub layout: SymmetrizeLayout,
}

impl SymmetrizedInstance {
    /// Reassembles an instance read back from files, checking that the
    /// layout describes it.
    pub fn from_parts(pair: PointSetPair<BinaryVector>, layout: SymmetrizeLayout) -> Result<Self> {
        let fits = pair.dim() == 2 * layout.d
            && pair.left().len() == layout.left_count + layout.zero_pad_count
            && pair.right().len() == layout.right_count
            && layout.left_count + layout.zero_pad_count == layout.right_count;
        if !fits {
            return Err(Error::inconsistency("symmetrize layout does not describe the instance"));
        }
        Ok(Self { pair, layout })
    }

    /// Original left id of a symmetrized left id; `None` for zero padding.
    pub fn parent(&self, left: usize) -> Option<usize> {
        (left < self.layout.left_count).then_some(left)
    }
}

/// Maps every vector to `(x, 1 − x)` and pads the left side with
/// `|B| − |A|` zero vectors, so that `EMD` of the result equals
/// `(|B|−|A|)√d + √2 · asymmetric EMD` of the input.
pub fn symmetrize(pair: &PointSetPair<BinaryVector>) -> Result<SymmetrizedInstance> {
    let (na, nb) = (pair.left().len(), pair.right().len());
    if na > nb {
        return Err(Error::shape(format!("symmetrize needs |A| ≤ |B|, got {na} > {nb}")));
    }
    let d = pair.dim();
    let mut left: Vec<BinaryVector> = pair.left().iter().map(embed_doubled).collect();
    left.extend(std::iter::repeat_n(BinaryVector::zeros(2 * d), nb - na));
    let right = pair.right().iter().map(embed_doubled).collect();
    Ok(SymmetrizedInstance {
        pair: PointSetPair::new(2 * d, left, right)?,
        layout: SymmetrizeLayout {
            d,
            left_count: na,
            right_count: nb,
            zero_pad_count: nb - na,
        },
    })
}

/// Outcome of checking `total = (|B|−|A|)√d + √2 · projected`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub total: Real,
    pub expected: Real,
    pub relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizedDecode {
    pub check: IdentityCheck,
    /// Injection on the original instance, costed in original distances.
    pub projected: Matching,
}

const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Strips zero-pad pairs from a bijection on a symmetrized instance.
pub fn decode_symmetrized(inst: &SymmetrizedInstance, m: &Matching) -> Result<SymmetrizedDecode> {
    let layout = &inst.layout;
    m.validate(inst.pair.left().len(), inst.pair.right().len())
        .map_err(|e| Error::inconsistency(format!("not a bijection on the symmetrized instance: {e}")))?;
    let d = layout.d as i128;
    let mut total = Real::ZERO;
    let mut projected_cost = Real::ZERO;
    let mut pairs = Vec::with_capacity(layout.left_count);
    for &(l, r) in &m.pairs {
        let sq = inst.pair.left()[l].sq_dist_to(&inst.pair.right()[r])?;
        total += Real::from_i128(sq).sqrt();
        match inst.parent(l) {
            Some(orig) => {
                if sq % 2 != 0 {
                    return Err(Error::invariant("embedded distance is not doubled"));
                }
                projected_cost += Real::from_i128(sq / 2).sqrt();
                pairs.push((orig, r));
            }
            None if sq != d => {
                return Err(Error::invariant(format!(
                    "zero pad at squared distance {sq}, expected {d}"
                )));
            }
            None => {}
        }
    }
    let reported = m.cost.as_real();
    if !reported.approx_eq(total, IDENTITY_TOLERANCE, 1.0) {
        return Err(Error::inconsistency(format!(
            "matching reports cost {reported}, edges sum to {total}"
        )));
    }
    let expected = Real::from_i128(layout.zero_pad_count as i128) * Real::from_i128(d).sqrt()
        + Real::from_f64(2.0).sqrt() * projected_cost;
    let relative_deviation =
        (total - expected).abs().to_f64() / total.abs().to_f64().max(1.0);
    if relative_deviation > IDENTITY_TOLERANCE {
        return Err(Error::inconsistency(format!(
            "symmetrized cost {total} differs from {expected}"
        )));
    }
    pairs.sort_unstable();
    Ok(SymmetrizedDecode {
        check: IdentityCheck {
            total,
            expected,
            relative_deviation,
        },
        projected: Matching {
            pairs,
            cost: Cost::Metric(projected_cost),
            kind: MatchingKind::Injection,
        },
    })
}

pub type Range = [usize; 2];

/// Coordinate roles of a MOM gadget, as half-open ranges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomLayout {
    pub d: usize,
    pub dim: usize,
    pub a_count: usize,
    pub b_count: usize,
    pub product_region: Range,
    pub a_padding: Range,
    pub b_padding: Range,
    pub v_region: Range,
    pub a_indicator: Range,
    pub b_indicator: Range,
}

impl MomLayout {
    pub fn new(d: usize, a_count: usize, b_count: usize) -> Self {
        Self {
            d,
            dim: 12 * d + 1,
            a_count,
            b_count,
            product_region: [0, 3 * d],
            a_padding: [3 * d, 6 * d],
            b_padding: [6 * d, 9 * d],
            v_region: [9 * d, 12 * d + 1],
            a_indicator: [9 * d, 10 * d - 1],
            b_indicator: [12 * d, 12 * d + 1],
        }
    }

    /// `‖a″ − b″‖²` for an orthogonal pair.
    pub fn orthogonal_sq_dist(&self) -> i128 {
        4 * self.d as i128 + 2
    }

    /// `‖a″ − v‖²`.
    pub fn v_sq_dist(&self) -> i128 {
        4 * self.d as i128 + 4
    }

    pub fn norm_sq(&self) -> i128 {
        3 * self.d as i128 + 1
    }

    /// Original right id of a gadget right id; `None` for copies of `v`.
    pub fn right_parent(&self, r: usize) -> Option<usize> {
        (r < self.b_count).then_some(r)
    }

    fn validate(&self) -> Result<()> {
        if *self != MomLayout::new(self.d, self.a_count, self.b_count) {
            return Err(Error::inconsistency("MOM layout does not match its dimension"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomGadget {
    pub pair: PointSetPair<BinaryVector>,
    pub v: BinaryVector,
    pub layout: MomLayout,
}

impl MomGadget {
    /// Reassembles a gadget read back from files, checking that the layout
    /// describes it.
    pub fn from_parts(pair: PointSetPair<BinaryVector>, layout: MomLayout) -> Result<Self> {
        layout.validate()?;
        if pair.dim() != layout.dim
            || pair.left().len() != layout.a_count
            || pair.right().len() != layout.b_count + layout.a_count
        {
            return Err(Error::inconsistency("MOM layout does not describe the instance"));
        }
        let v = gadget_v(&layout);
        if pair.right()[layout.b_count..].iter().any(|x| *x != v) {
            return Err(Error::inconsistency("trailing right vectors are not the gadget vector v"));
        }
        Ok(Self { pair, v, layout })
    }
}

fn gadget_v(layout: &MomLayout) -> BinaryVector {
    let mut v = BinaryVector::zeros(layout.dim);
    fill(&mut v, layout.v_region, 3 * layout.d + 1);
    v
}

fn fill(x: &mut BinaryVector, range: Range, count: usize) {
    debug_assert!(count <= range[1] - range[0]);
    for i in range[0]..range[0] + count {
        x.set(i, true);
    }
}

fn place(x: &mut BinaryVector, at: usize, src: &BinaryVector) {
    for (i, bit) in src.bits().enumerate() {
        x.set(at + i, bit);
    }
}

/// Builds the MOM gadget for `|A| ≤ |B|`: `|A|` left vectors `a″` and
/// `|B| + |A|` right vectors, `b″` first, then copies of `v`.
pub fn build_mom_gadget(pair: &PointSetPair<BinaryVector>) -> Result<MomGadget> {
    let (na, nb) = (pair.left().len(), pair.right().len());
    if na > nb {
        return Err(Error::shape(format!("MOM gadget needs |A| ≤ |B|, got {na} > {nb}")));
    }
    let d = pair.dim();
    let layout = MomLayout::new(d, na, nb);
    let dim = layout.dim;

    let left = pair
        .left()
        .iter()
        .map(|a| {
            let mut x = BinaryVector::zeros(dim);
            place(&mut x, layout.product_region[0], &negate_product(a, Side::Left));
            fill(&mut x, layout.a_padding, a.count_ones() as usize + 2);
            fill(&mut x, layout.a_indicator, d - 1);
            x
        })
        .collect();

    let v = gadget_v(&layout);
    let mut right: Vec<BinaryVector> = pair
        .right()
        .iter()
        .map(|b| {
            let mut y = BinaryVector::zeros(dim);
            place(&mut y, layout.product_region[0], &negate_product(b, Side::Right));
            fill(&mut y, layout.b_padding, d + b.count_ones() as usize);
            fill(&mut y, layout.b_indicator, 1);
            y
        })
        .collect();
    right.extend(std::iter::repeat_n(v.clone(), na));

    Ok(MomGadget {
        pair: PointSetPair::new(dim, left, right)?,
        v,
        layout,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomDecode {
    /// Gadget right id per left id after moving long edges onto `v`.
    pub assignment: Vec<usize>,
    /// Original right partner per left id; `None` when matched to `v`.
    pub pi: Vec<Option<usize>>,
    pub orthogonal_pairs: Vec<(usize, usize)>,
    pub orthogonal_count: usize,
}

/// Reads an orthogonal matching off an injection on the gadget. Pairs
/// longer than `‖a″ − v‖` are moved to unused copies of `v`; pairs at
/// squared distance `4d + 2` are exactly the orthogonal ones.
pub fn decode_mom(gadget: &MomGadget, m: &Matching) -> Result<MomDecode> {
    let layout = &gadget.layout;
    layout.validate()?;
    let (na, nr) = (gadget.pair.left().len(), gadget.pair.right().len());
    if m.pairs.len() != na {
        return Err(Error::inconsistency(format!(
            "matching covers {} of {na} gadget left vectors",
            m.pairs.len()
        )));
    }
    let mut check = m.clone();
    check.kind = MatchingKind::Injection;
    check
        .validate(na, nr)
        .map_err(|e| Error::inconsistency(format!("not an injection on the gadget: {e}")))?;

    let mut used = vec![false; nr];
    for &(_, r) in &m.pairs {
        used[r] = true;
    }
    let mut free_v = (layout.b_count..nr).filter(|&r| !used[r]);
    let mut assignment = vec![0usize; na];
    for &(l, r) in &m.pairs {
        let sq = gadget.pair.left()[l].sq_dist_to(&gadget.pair.right()[r])?;
        assignment[l] = if sq > layout.v_sq_dist() {
            free_v
                .next()
                .ok_or_else(|| Error::invariant("no free copy of v to reassign to"))?
        } else {
            r
        };
    }

    let d = layout.d as i128;
    let mut pi = vec![None; na];
    let mut orthogonal_pairs = Vec::new();
    for (l, &r) in assignment.iter().enumerate() {
        let Some(b) = layout.right_parent(r) else {
            continue;
        };
        pi[l] = Some(b);
        let a_vec = &gadget.pair.left()[l];
        let b_vec = &gadget.pair.right()[r];
        if a_vec.sq_dist_to(b_vec)? == layout.orthogonal_sq_dist() {
            let dot = d - a_vec.dot_with(b_vec)?;
            if dot != 0 {
                return Err(Error::invariant(format!(
                    "pair ({l}, {b}) at the orthogonal distance has a·b = {dot}"
                )));
            }
            orthogonal_pairs.push((l, b));
        }
    }
    Ok(MomDecode {
        assignment,
        pi,
        orthogonal_count: orthogonal_pairs.len(),
        orthogonal_pairs,
    })
}

/// A maximum-orthogonal-matching solver. Returns matched pairs; callers keep
/// only those that are actually orthogonal.
pub trait MomSolver {
    fn solve_mom(&self, pair: &PointSetPair<BinaryVector>) -> Result<Vec<(usize, usize)>>;
}

/// Exact MOM through the gadget and an exact asymmetric EMD.
#[derive(Clone, Copy, Debug, Default)]
pub struct AsymmetricEmdMom;

impl MomSolver for AsymmetricEmdMom {
    fn solve_mom(&self, pair: &PointSetPair<BinaryVector>) -> Result<Vec<(usize, usize)>> {
        let gadget = build_mom_gadget(pair)?;
        let (_, m) = asymmetric_emd(&gadget.pair)?;
        Ok(decode_mom(&gadget, &m)?.orthogonal_pairs)
    }
}

/// `⌈2n^{δ/(1−δ)}⌉`.
pub fn mom_to_ov_copies(n: usize, delta: Rational64) -> Result<usize> {
    crate::ratio::rational_in_open_unit(delta, "delta")?;
    let e = delta / (Rational64::from_integer(1) - delta);
    Ok(ceil_scaled_pow(2, n as u64, e)? as usize)
}

/// Decides OV with one MOM call on a duplicated instance.
pub fn mom_to_ov(
    pair: &PointSetPair<BinaryVector>,
    delta: Rational64,
    solver: &dyn MomSolver,
) -> Result<Option<(usize, usize)>> {
    let n = pair.left().len();
    if pair.right().len() != n {
        return Err(Error::shape("MOM to OV needs |A| = |B|"));
    }
    if n == 0 {
        return Ok(None);
    }
    let copies = mom_to_ov_copies(n, delta)?;
    let (left, left_parent) = duplicate(pair.left(), copies);
    let (right, right_parent) = duplicate(pair.right(), copies);
    let dup = PointSetPair::new(pair.dim(), left, right)?;
    let found = solver.solve_mom(&dup)?;
    Ok(found
        .into_iter()
        .find(|&(l, r)| dup.left()[l].is_orthogonal(&dup.right()[r]))
        .map(|(l, r)| (left_parent[l], right_parent[r])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gadget_and_symmetrized_round_trip_through_parts() {
        let pair = PointSetPair::new(
            3,
            vec![BinaryVector::from_bits(&[true, false, false])],
            vec![BinaryVector::from_bits(&[false, true, true]), BinaryVector::from_bits(&[true, true, false])],
        )
        .unwrap();
        let g = build_mom_gadget(&pair).unwrap();
        let back = MomGadget::from_parts(g.pair.clone(), g.layout.clone()).unwrap();
        assert_eq!(back, g);
        let wrong = MomLayout::new(3, 1, 1);
        assert!(MomGadget::from_parts(g.pair.clone(), wrong).is_err());

        let sym = symmetrize(&pair).unwrap();
        let back = SymmetrizedInstance::from_parts(sym.pair.clone(), sym.layout.clone()).unwrap();
        assert_eq!(back, sym);
        let mut bad = sym.layout.clone();
        bad.zero_pad_count = 0;
        assert!(SymmetrizedInstance::from_parts(sym.pair, bad).is_err());
    }
    use crate::matching::max_cardinality_matching;
    use proptest::prelude::*;

    fn bv(bits: &[u8]) -> BinaryVector {
        BinaryVector::from_bits(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    fn bpair(left: &[&[u8]], right: &[&[u8]]) -> PointSetPair<BinaryVector> {
        let dim = left.first().or(right.first()).unwrap().len();
        PointSetPair::new(
            dim,
            left.iter().map(|x| bv(x)).collect(),
            right.iter().map(|x| bv(x)).collect(),
        )
        .unwrap()
    }

    fn mom_opt(pair: &PointSetPair<BinaryVector>) -> usize {
        let adj: Vec<Vec<usize>> = pair
            .left()
            .iter()
            .map(|a| {
                (0..pair.right().len())
                    .filter(|&j| a.is_orthogonal(&pair.right()[j]))
                    .collect()
            })
            .collect();
        max_cardinality_matching(&adj, pair.right().len()).size()
    }

    #[test]
    fn negate_product_examples() {
        let a = negate_product(&bv(&[1, 0]), Side::Left);
        let b = negate_product(&bv(&[1, 1]), Side::Right);
        assert_eq!(a.dot_with(&b).unwrap(), 1);
        let ones = bv(&[1, 1, 1, 1]);
        let x = negate_product(&ones, Side::Left);
        let y = negate_product(&ones, Side::Right);
        assert_eq!(x.dot_with(&y).unwrap(), 0);
        assert_eq!(x.dim(), 12);
    }

    #[test]
    fn symmetrize_examples() {
        let p = bpair(&[&[1, 0, 1]], &[&[0, 0, 1]]);
        let s = symmetrize(&p).unwrap();
        assert_eq!(s.pair.left()[0], bv(&[1, 0, 1, 0, 1, 0]));
        assert_eq!(s.pair.left()[0].count_ones(), 3);
        assert_eq!(s.pair.left()[0].sq_dist_to(&s.pair.right()[0]).unwrap(), 2);
        assert_eq!(s.layout.zero_pad_count, 0);
        assert!(symmetrize(&bpair(&[&[1], &[0]], &[&[1]])).is_err());
    }

    #[test]
    fn decode_symmetrized_example() {
        let p = bpair(&[&[1, 0]], &[&[1, 0], &[0, 1]]);
        let s = symmetrize(&p).unwrap();
        assert_eq!(s.layout.zero_pad_count, 1);
        let (cost, m) = crate::matching::emd(&s.pair).unwrap();
        assert!(cost.approx_eq(Real::from_f64(2.0).sqrt(), 1e-15, 1.0));
        let dec = decode_symmetrized(&s, &m).unwrap();
        assert_eq!(dec.projected.pairs, vec![(0, 0)]);
        assert_eq!(dec.projected.cost.as_real(), Real::ZERO);
    }

    #[test]
    fn decode_symmetrized_rejects_wrong_cost() {
        let p = bpair(&[&[1, 0]], &[&[1, 0], &[0, 1]]);
        let s = symmetrize(&p).unwrap();
        let (_, mut m) = crate::matching::emd(&s.pair).unwrap();
        m.cost = Cost::Metric(Real::from_f64(7.0));
        assert!(matches!(decode_symmetrized(&s, &m), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn gadget_constants_small() {
        let p = bpair(&[&[1, 0], &[1, 1]], &[&[0, 1], &[1, 1]]);
        let g = build_mom_gadget(&p).unwrap();
        assert_eq!(g.pair.dim(), 25);
        assert_eq!(g.pair.right().len(), 4);
        assert_eq!(g.pair.left()[0].sq_dist_to(&g.pair.right()[0]).unwrap(), 10);
        for a in g.pair.left() {
            assert_eq!(a.sq_dist_to(&g.v).unwrap(), 12);
        }
        for x in g.pair.left().iter().chain(g.pair.right()) {
            assert_eq!(x.count_ones(), 7);
        }
    }

    #[test]
    fn decode_mom_examples() {
        // complements: perfect orthogonal matching
        let p = bpair(&[&[1, 0, 0], &[0, 1, 1]], &[&[1, 0, 0], &[0, 1, 1]]);
        let g = build_mom_gadget(&p).unwrap();
        let (_, m) = asymmetric_emd(&g.pair).unwrap();
        let dec = decode_mom(&g, &m).unwrap();
        assert_eq!(dec.orthogonal_count, 2);
        assert_eq!(dec.orthogonal_pairs, vec![(0, 1), (1, 0)]);

        // everything sent to v
        let all_v = Matching {
            pairs: vec![(0, 2), (1, 3)],
            cost: Cost::Exact(0),
            kind: MatchingKind::Injection,
        };
        let dec = decode_mom(&g, &all_v).unwrap();
        assert_eq!(dec.orthogonal_count, 0);
        assert_eq!(dec.pi, vec![None, None]);
    }

    #[test]
    fn decode_mom_moves_long_edges_to_v() {
        // a·b = 2 puts (0, 0) at 4d + 6 > 4d + 4
        let p = bpair(&[&[1, 1]], &[&[1, 1]]);
        let g = build_mom_gadget(&p).unwrap();
        let m = Matching {
            pairs: vec![(0, 0)],
            cost: Cost::Exact(0),
            kind: MatchingKind::Injection,
        };
        let dec = decode_mom(&g, &m).unwrap();
        assert_eq!(dec.assignment, vec![1]);
        assert_eq!(dec.orthogonal_count, 0);
    }

    #[test]
    fn mom_to_ov_copy_count() {
        assert_eq!(mom_to_ov_copies(16, Rational64::new(1, 2)).unwrap(), 32);
        assert!(mom_to_ov_copies(16, Rational64::new(1, 1)).is_err());
    }

    #[test]
    fn mom_to_ov_finds_planted_pair() {
        let p = bpair(&[&[1, 1, 0], &[1, 1, 1]], &[&[1, 1, 1], &[0, 0, 1]]);
        let found = mom_to_ov(&p, Rational64::new(1, 4), &AsymmetricEmdMom).unwrap();
        assert_eq!(found, Some((0, 1)));
        let none = bpair(&[&[1, 1], &[1, 0]], &[&[1, 1], &[1, 0]]);
        assert_eq!(mom_to_ov(&none, Rational64::new(1, 4), &AsymmetricEmdMom).unwrap(), None);
    }

    fn binary_pair(max_a: usize, max_b: usize, max_d: usize) -> impl Strategy<Value = PointSetPair<BinaryVector>> {
        (1..=max_d, 1..=max_a, 0..=max_b).prop_flat_map(move |(d, na, extra)| {
            let nb = (na + extra).min(max_b).max(na);
            (
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), d), na),
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), d), nb),
            )
                .prop_map(move |(l, r)| {
                    PointSetPair::new(
                        d,
                        l.iter().map(|x| BinaryVector::from_bits(x)).collect(),
                        r.iter().map(|x| BinaryVector::from_bits(x)).collect(),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn negate_product_identity(bits in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..64)) {
            let a = BinaryVector::from_bits(&bits.iter().map(|p| p.0).collect::<Vec<_>>());
            let b = BinaryVector::from_bits(&bits.iter().map(|p| p.1).collect::<Vec<_>>());
            let lhs = negate_product(&a, Side::Left).dot_with(&negate_product(&b, Side::Right)).unwrap();
            prop_assert_eq!(lhs, bits.len() as i128 - a.dot_with(&b).unwrap());
        }

        #[test]
        fn gadget_contract(p in binary_pair(4, 6, 40)) {
            let g = build_mom_gadget(&p).unwrap();
            let d = p.dim() as i128;
            prop_assert_eq!(g.pair.dim() as i128, 12 * d + 1);
            for x in g.pair.left().iter().chain(g.pair.right()) {
                prop_assert_eq!(x.count_ones() as i128, 3 * d + 1);
            }
            for (i, a) in p.left().iter().enumerate() {
                prop_assert_eq!(g.pair.left()[i].sq_dist_to(&g.v).unwrap(), 4 * d + 4);
                for (j, b) in p.right().iter().enumerate() {
                    let got = g.pair.left()[i].sq_dist_to(&g.pair.right()[j]).unwrap();
                    prop_assert_eq!(got, 2 * a.dot_with(b).unwrap() + 4 * d + 2);
                }
            }
            prop_assert_eq!(g.pair.right()[p.right().len()..].iter().filter(|x| **x == g.v).count(), p.left().len());
        }

        #[test]
        fn symmetrize_doubles_distances(p in binary_pair(4, 6, 20)) {
            let s = symmetrize(&p).unwrap();
            for (i, a) in p.left().iter().enumerate() {
                for (j, b) in p.right().iter().enumerate() {
                    prop_assert_eq!(
                        s.pair.left()[i].sq_dist_to(&s.pair.right()[j]).unwrap(),
                        2 * a.sq_dist_to(b).unwrap()
                    );
                }
            }
            for z in &s.pair.left()[p.left().len()..] {
                for b in s.pair.right() {
                    prop_assert_eq!(z.sq_dist_to(b).unwrap(), p.dim() as i128);
                }
            }
        }

        #[test]
        fn mom_via_asymmetric_emd_is_exact(p in binary_pair(5, 6, 5)) {
            let g = build_mom_gadget(&p).unwrap();
            let (_, m) = asymmetric_emd(&g.pair).unwrap();
            prop_assert_eq!(decode_mom(&g, &m).unwrap().orthogonal_count, mom_opt(&p));
        }

        #[test]
        fn symmetrized_emd_projects_to_asymmetric_emd(p in binary_pair(4, 5, 6)) {
            let s = symmetrize(&p).unwrap();
            let (_, m) = crate::matching::emd(&s.pair).unwrap();
            let dec = decode_symmetrized(&s, &m).unwrap();
            let (want, _) = asymmetric_emd(&p).unwrap();
            prop_assert!(dec.projected.cost.as_real().approx_eq(want, 1e-9, 1.0));
        }
    }
}
