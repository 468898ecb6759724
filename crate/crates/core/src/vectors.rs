//! Binary and integer vectors, exact inner products and squared distances,
//! and the point-set pair every problem in this crate takes as input.
//!
//! Integer coordinates are `i128`. Every squared quantity (squared norms,
//! squared distances, inner products) is computed with checked `i128`
//! arithmetic: an input whose exact result would need more than 127 bits of
//! magnitude is rejected with [`Error::Capacity`] instead of wrapping.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 0/1 vector packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    words: Vec<u64>,
    dim: usize,
}

impl BinaryVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            words: vec![0; dim.div_ceil(64)],
            dim,
        }
    }

    pub fn ones(dim: usize) -> Self {
        let mut v = Self::zeros(dim);
        for i in 0..dim {
            v.set(i, true);
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector from integer entries, rejecting anything but 0 and 1.
    pub fn from_ints(entries: &[i128]) -> Result<Self> {
        let mut v = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            match x {
                0 => {}
                1 => v.set(i, true),
                _ => {
                    return Err(Error::shape(format!(
                        "binary vector entry {i} is {x}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.dim, "bit {i} out of range for dimension {}", self.dim);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.dim, "bit {i} out of range for dimension {}", self.dim);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.dim).map(|i| self.get(i))
    }

    /// Bitwise complement within the vector's dimension.
    pub fn complement(&self) -> Self {
        let mut out = Self::ones(self.dim);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o &= !w;
        }
        out
    }

    /// Number of shared ones. Panics on dimension mismatch; use [`dot`] for
    /// the checked form.
    pub fn and_count(&self, other: &Self) -> u32 {
        assert_eq!(self.dim, other.dim);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn is_orthogonal(&self, other: &Self) -> bool {
        assert_eq!(self.dim, other.dim);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Hamming distance, i.e. the squared Euclidean distance.
    pub fn xor_count(&self, other: &Self) -> u32 {
        assert_eq!(self.dim, other.dim);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.dim + other.dim);
        for (i, b) in self.bits().chain(other.bits()).enumerate() {
            if b {
                out.set(i, true);
            }
        }
        out
    }
}

impl fmt::Debug for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BinaryVector({s})")
    }
}

/// An integer vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntVector {
    coords: Vec<i128>,
}

impl IntVector {
    pub fn new(coords: Vec<i128>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i128] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<i128> {
        self.coords
    }

    pub fn sq_norm(&self) -> Result<i128> {
        checked_sum_sq(self.coords.iter().copied())
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntVector({:?})", self.coords)
    }
}

impl From<Vec<i128>> for IntVector {
    fn from(coords: Vec<i128>) -> Self {
        Self::new(coords)
    }
}

fn overflow() -> Error {
    Error::capacity("exact value exceeds the 127-bit integer width")
}

fn checked_sum_sq(mut it: impl Iterator<Item = i128>) -> Result<i128> {
    it.try_fold(0i128, |acc, x| {
        x.checked_mul(x)
            .and_then(|sq| acc.checked_add(sq))
            .ok_or_else(overflow)
    })
}

/// Common surface of the two vector kinds.
pub trait Vector: Clone + fmt::Debug + PartialEq + Send + Sync {
    const KIND: VectorKind;

    fn dim(&self) -> usize;

    /// Exact inner product.
    fn dot_with(&self, other: &Self) -> Result<i128>;

    /// Exact squared Euclidean distance.
    fn sq_dist_to(&self, other: &Self) -> Result<i128>;

    fn to_ints(&self) -> Vec<i128>;

    fn from_ints(entries: &[i128]) -> Result<Self>;
}

impl Vector for BinaryVector {
    const KIND: VectorKind = VectorKind::Binary;

    fn dim(&self) -> usize {
        self.dim
    }

    fn dot_with(&self, other: &Self) -> Result<i128> {
        check_dims(self.dim, other.dim)?;
        Ok(self.and_count(other) as i128)
    }

    fn sq_dist_to(&self, other: &Self) -> Result<i128> {
        check_dims(self.dim, other.dim)?;
        Ok(self.xor_count(other) as i128)
    }

    fn to_ints(&self) -> Vec<i128> {
        self.bits().map(i128::from).collect()
    }

    fn from_ints(entries: &[i128]) -> Result<Self> {
        BinaryVector::from_ints(entries)
    }
}

impl Vector for IntVector {
    const KIND: VectorKind = VectorKind::Integer;

    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn dot_with(&self, other: &Self) -> Result<i128> {
        check_dims(self.dim(), other.dim())?;
        self.coords
            .iter()
            .zip(&other.coords)
            .try_fold(0i128, |acc, (&a, &b)| {
                a.checked_mul(b)
                    .and_then(|p| acc.checked_add(p))
                    .ok_or_else(overflow)
            })
    }

    fn sq_dist_to(&self, other: &Self) -> Result<i128> {
        check_dims(self.dim(), other.dim())?;
        let diffs = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a.checked_sub(b).ok_or_else(overflow))
            .collect::<Result<Vec<_>>>()?;
        checked_sum_sq(diffs.into_iter())
    }

    fn to_ints(&self) -> Vec<i128> {
        self.coords.clone()
    }

    fn from_ints(entries: &[i128]) -> Result<Self> {
        Ok(IntVector::new(entries.to_vec()))
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::shape(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// `Σ aᵢbᵢ`, exactly.
pub fn dot<V: Vector>(a: &V, b: &V) -> Result<i128> {
    a.dot_with(b)
}

/// `Σ (aᵢ − bᵢ)²`, exactly.
pub fn sq_dist<V: Vector>(a: &V, b: &V) -> Result<i128> {
    a.sq_dist_to(b)
}

/// `z ↦ (2z₁, …, 2z_d, 1)`. The squared norm of the result is `4‖z‖² + 1`,
/// always odd, and squared distances between lifted vectors are exactly four
/// times the original ones.
pub fn parity_lift(a: &IntVector) -> Result<IntVector> {
    let mut coords = Vec::with_capacity(a.dim() + 1);
    for &x in &a.coords {
        coords.push(x.checked_mul(2).ok_or_else(overflow)?);
    }
    coords.push(1);
    Ok(IntVector::new(coords))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorKind {
    Binary,
    Integer,
}

/// An ordered pair of multisets `(A, B)`. Positions are the element ids.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSetPair<V> {
    left: Vec<V>,
    right: Vec<V>,
    dim: usize,
}

impl<V: Vector> PointSetPair<V> {
    pub fn new(dim: usize, left: Vec<V>, right: Vec<V>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::shape("dimension must be positive"));
        }
        for (side, vs) in [("left", &left), ("right", &right)] {
            if let Some((i, v)) = vs.iter().enumerate().find(|(_, v)| v.dim() != dim) {
                return Err(Error::shape(format!(
                    "{side}[{i}] has dimension {}, expected {dim}",
                    v.dim()
                )));
            }
        }
        Ok(Self { left, right, dim })
    }

    pub fn left(&self) -> &[V] {
        &self.left
    }

    pub fn right(&self) -> &[V] {
        &self.right
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> VectorKind {
        V::KIND
    }

    pub fn into_parts(self) -> (Vec<V>, Vec<V>) {
        (self.left, self.right)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            kind: V::KIND,
            dim: self.dim,
            left: self.left.iter().map(Vector::to_ints).collect(),
            right: self.right.iter().map(Vector::to_ints).collect(),
        }
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        if file.kind != V::KIND {
            return Err(Error::shape(format!(
                "instance kind is {:?}, expected {:?}",
                file.kind,
                V::KIND
            )));
        }
        let conv = |rows: &[Vec<i128>]| -> Result<Vec<V>> {
            rows.iter().map(|r| V::from_ints(r)).collect()
        };
        Self::new(file.dim, conv(&file.left)?, conv(&file.right)?)
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&InstanceFile::from_json(s)?)
    }
}

/// On-disk instance form:
/// `{"kind": "binary"|"integer", "dim": int, "left": [[...]], "right": [[...]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: VectorKind,
    pub dim: usize,
    pub left: Vec<Vec<i128>>,
    pub right: Vec<Vec<i128>>,
}

impl InstanceFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// An instance of either kind, as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Binary(PointSetPair<BinaryVector>),
    Integer(PointSetPair<IntVector>),
}

impl Instance {
    pub fn from_json(s: &str) -> Result<Self> {
        let file = InstanceFile::from_json(s)?;
        Ok(match file.kind {
            VectorKind::Binary => Instance::Binary(PointSetPair::from_file(&file)?),
            VectorKind::Integer => Instance::Integer(PointSetPair::from_file(&file)?),
        })
    }

    pub fn to_json(&self) -> String {
        match self {
            Instance::Binary(p) => p.to_json(),
            Instance::Integer(p) => p.to_json(),
        }
    }

    pub fn binary(self) -> Result<PointSetPair<BinaryVector>> {
        match self {
            Instance::Binary(p) => Ok(p),
            Instance::Integer(_) => Err(Error::shape("expected a binary instance")),
        }
    }

    /// Integer view; binary instances are widened.
    pub fn integer(self) -> PointSetPair<IntVector> {
        match self {
            Instance::Integer(p) => p,
            Instance::Binary(p) => {
                let conv = |vs: &[BinaryVector]| -> Vec<IntVector> {
                    vs.iter().map(|v| IntVector::new(v.to_ints())).collect()
                };
                PointSetPair::new(p.dim(), conv(p.left()), conv(p.right()))
                    .expect("widening keeps dimensions")
            }
        }
    }
}

/// Repeats every vector `copies` times, consecutively, and records the
/// original id of each copy.
pub fn duplicate<V: Clone>(vs: &[V], copies: usize) -> (Vec<V>, Vec<usize>) {
    let mut out = Vec::with_capacity(vs.len() * copies);
    let mut parent = Vec::with_capacity(vs.len() * copies);
    for (i, v) in vs.iter().enumerate() {
        for _ in 0..copies {
            out.push(v.clone());
            parent.push(i);
        }
    }
    (out, parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(bits: &[u8]) -> BinaryVector {
        BinaryVector::from_bits(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    fn iv(c: &[i128]) -> IntVector {
        IntVector::new(c.to_vec())
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&bv(&[1, 0]), &bv(&[0, 1])).unwrap(), 0);
        assert_eq!(dot(&bv(&[1, 1]), &bv(&[1, 1])).unwrap(), 2);
        assert_eq!(dot(&bv(&[1, 0, 1]), &bv(&[1, 1, 1])).unwrap(), 2);
        assert_eq!(dot(&iv(&[1, 0, 1]), &iv(&[1, 1, 1])).unwrap(), 2);
    }

    #[test]
    fn dot_dimension_mismatch() {
        assert!(matches!(dot(&bv(&[1, 0]), &bv(&[1])), Err(Error::Shape(_))));
        assert!(matches!(sq_dist(&iv(&[1, 0]), &iv(&[1])), Err(Error::Shape(_))));
    }

    #[test]
    fn sq_dist_examples() {
        assert_eq!(sq_dist(&iv(&[0, 0]), &iv(&[3, 4])).unwrap(), 25);
        assert_eq!(sq_dist(&iv(&[7, -2]), &iv(&[7, -2])).unwrap(), 0);
        assert_eq!(sq_dist(&iv(&[1, 2, 3]), &iv(&[4, 6, 3])).unwrap(), 25);
    }

    #[test]
    fn sq_dist_overflow_is_capacity_error() {
        let big = i128::MAX / 2;
        let r = sq_dist(&iv(&[big]), &iv(&[-big]));
        assert!(matches!(r, Err(Error::Capacity(_))));
        let r = sq_dist(&iv(&[1 << 64]), &iv(&[0]));
        assert!(matches!(r, Err(Error::Capacity(_))));
    }

    #[test]
    fn parity_lift_examples() {
        let l = parity_lift(&iv(&[1, 1])).unwrap();
        assert_eq!(l, iv(&[2, 2, 1]));
        assert_eq!(l.sq_norm().unwrap(), 9);
        let l = parity_lift(&iv(&[0])).unwrap();
        assert_eq!(l, iv(&[0, 1]));
        assert_eq!(l.sq_norm().unwrap(), 1);
        let l = parity_lift(&iv(&[3, 4])).unwrap();
        assert_eq!(l, iv(&[6, 8, 1]));
        assert_eq!(l.sq_norm().unwrap(), 101);
        assert!(parity_lift(&iv(&[i128::MAX])).is_err());
    }

    #[test]
    fn binary_helpers() {
        let v = bv(&[1, 0, 1, 1]);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.complement(), bv(&[0, 1, 0, 0]));
        assert!(v.is_orthogonal(&v.complement()));
        assert_eq!(v.concat(&bv(&[0, 1])), bv(&[1, 0, 1, 1, 0, 1]));
        let wide = BinaryVector::ones(130);
        assert_eq!(wide.count_ones(), 130);
        assert!(wide.complement().is_zero());
    }

    #[test]
    fn binary_rejects_non_bits() {
        let f = InstanceFile {
            kind: VectorKind::Binary,
            dim: 2,
            left: vec![vec![1, 2]],
            right: vec![],
        };
        assert!(PointSetPair::<BinaryVector>::from_file(&f).is_err());
    }

    #[test]
    fn pair_rejects_mixed_dims() {
        let r = PointSetPair::new(2, vec![iv(&[1, 2])], vec![iv(&[1])]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn json_is_bit_exact() {
        let s = r#"{"kind":"integer","dim":2,"left":[[1,-2],[340282366920938463463374607431768211455,0]],"right":[[0,0]]}"#;
        // the big literal exceeds i128 and must be rejected
        assert!(Instance::from_json(s).is_err());
        let s = r#"{"kind":"integer","dim":2,"left":[[1,-2],[170141183460469231731687303715884105727,0]],"right":[[0,0]]}"#;
        let inst = Instance::from_json(s).unwrap();
        assert_eq!(inst.to_json(), s);
        let s = r#"{"kind":"binary","dim":3,"left":[[1,0,1]],"right":[[0,0,1],[1,1,1]]}"#;
        assert_eq!(Instance::from_json(s).unwrap().to_json(), s);
    }

    #[test]
    fn duplicate_records_parents() {
        let (v, p) = duplicate(&["a", "b"], 3);
        assert_eq!(v, ["a", "a", "a", "b", "b", "b"]);
        assert_eq!(p, [0, 0, 0, 1, 1, 1]);
    }

    fn int_pair() -> impl Strategy<Value = (IntVector, IntVector)> {
        (1usize..8).prop_flat_map(|d| {
            (
                prop::collection::vec(-1_000_000i128..1_000_000, d),
                prop::collection::vec(-1_000_000i128..1_000_000, d),
            )
                .prop_map(|(a, b)| (IntVector::new(a), IntVector::new(b)))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn polarization_identity((a, b) in int_pair()) {
            let lhs = sq_dist(&a, &b).unwrap();
            let rhs = a.sq_norm().unwrap() + b.sq_norm().unwrap() - 2 * dot(&a, &b).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(sq_dist(&a, &b).unwrap(), sq_dist(&b, &a).unwrap());
            prop_assert_eq!(dot(&a, &b).unwrap(), dot(&b, &a).unwrap());
        }

        #[test]
        fn lift_scales_distances((a, b) in int_pair()) {
            let la = parity_lift(&a).unwrap();
            let lb = parity_lift(&b).unwrap();
            prop_assert_eq!(sq_dist(&la, &lb).unwrap(), 4 * sq_dist(&a, &b).unwrap());
            prop_assert_eq!(la.sq_norm().unwrap(), 4 * a.sq_norm().unwrap() + 1);
        }

        #[test]
        fn json_round_trip(
            left in prop::collection::vec(prop::collection::vec(any::<i64>(), 3), 0..5),
            right in prop::collection::vec(prop::collection::vec(any::<i64>(), 3), 0..5),
        ) {
            let conv = |rows: Vec<Vec<i64>>| rows.into_iter()
                .map(|r| IntVector::new(r.into_iter().map(i128::from).collect()))
                .collect::<Vec<_>>();
            let pair = PointSetPair::new(3, conv(left), conv(right)).unwrap();
            let json = pair.to_json();
            let back = PointSetPair::<IntVector>::from_json(&json).unwrap();
            prop_assert_eq!(&back, &pair);
            prop_assert_eq!(back.to_json(), json);
        }
    }
}
