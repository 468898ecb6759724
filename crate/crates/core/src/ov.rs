//! Boolean-side algorithms: oracles for OV, hitting set, Find-OV and MOM,
//! the sampling Find-OV algorithm, the phased hitting-set recursion, and the
//! two constructions on top of a `(k, 2k)`-Find-OV solver.
//!
//! Randomized algorithms take an explicit seed and only ever report pairs
//! they have checked to be orthogonal.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::MomSolver;
use crate::matching::max_cardinality_matching;
use crate::ratio::{ceil_log2, ceil_pow, ceil_scaled_pow, ceil_sqrt_ratio, rational_in_open_unit};
use crate::seed::{derive_seed, stage_rng};
use crate::vectors::{duplicate, BinaryVector, PointSetPair};

pub const DEFAULT_BRUTE_FORCE_FLOOR: usize = 64;

/// First orthogonal pair in row-major order.
pub fn ov_oracle(pair: &PointSetPair<BinaryVector>) -> Option<(usize, usize)> {
    pair.left().iter().enumerate().find_map(|(i, a)| {
        pair.right()
            .iter()
            .position(|b| a.is_orthogonal(b))
            .map(|j| (i, j))
    })
}

/// First left vector orthogonal to nothing on the right.
pub fn hs_oracle(pair: &PointSetPair<BinaryVector>) -> Option<usize> {
    pair.left()
        .iter()
        .position(|a| pair.right().iter().all(|b| !a.is_orthogonal(b)))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindOvResult {
    /// Left ids with a known orthogonal partner, ascending.
    pub found: Vec<usize>,
    /// A right id orthogonal to each found left id.
    pub witnesses: BTreeMap<usize, usize>,
    /// Additive error allowed by the producing algorithm.
    pub missed_budget: usize,
}

impl FindOvResult {
    fn from_witnesses(witnesses: BTreeMap<usize, usize>, missed_budget: usize) -> Self {
        Self {
            found: witnesses.keys().copied().collect(),
            witnesses,
            missed_budget,
        }
    }

    /// Fails unless every witness is orthogonal to its left vector.
    pub fn verify(&self, pair: &PointSetPair<BinaryVector>) -> Result<()> {
        if self.found.len() != self.witnesses.len()
            || self.found.iter().any(|id| !self.witnesses.contains_key(id))
        {
            return Err(Error::inconsistency("found set and witnesses disagree"));
        }
        for (&a, &b) in &self.witnesses {
            let ok = a < pair.left().len()
                && b < pair.right().len()
                && pair.left()[a].is_orthogonal(&pair.right()[b]);
            if !ok {
                return Err(Error::inconsistency(format!("witness ({a}, {b}) is not orthogonal")));
            }
        }
        Ok(())
    }
}

pub fn find_ov_oracle(pair: &PointSetPair<BinaryVector>) -> FindOvResult {
    let witnesses = pair
        .left()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            pair.right()
                .iter()
                .position(|b| a.is_orthogonal(b))
                .map(|j| (i, j))
        })
        .collect();
    FindOvResult::from_witnesses(witnesses, 0)
}

/// Maximum orthogonal matching for `|A| ≤ |B|`: the optimum `m_OPT` and a
/// full injection extending an optimal orthogonal matching.
pub fn mom_oracle(pair: &PointSetPair<BinaryVector>) -> Result<(usize, Vec<usize>)> {
    let (na, nb) = (pair.left().len(), pair.right().len());
    if na > nb {
        return Err(Error::shape(format!("MOM needs |A| ≤ |B|, got {na} > {nb}")));
    }
    let adjacency: Vec<Vec<usize>> = pair
        .left()
        .iter()
        .map(|a| (0..nb).filter(|&j| a.is_orthogonal(&pair.right()[j])).collect())
        .collect();
    let m = max_cardinality_matching(&adjacency, nb);
    let mut used = vec![false; nb];
    for &(_, j) in &m.pairs {
        used[j] = true;
    }
    let mut spare = (0..nb).filter(|&j| !used[j]);
    let pi = m
        .right_of_left
        .iter()
        .map(|r| r.unwrap_or_else(|| spare.next().expect("|A| ≤ |B|")))
        .collect();
    Ok((m.size(), pi))
}

/// Exact MOM by Hopcroft–Karp on the orthogonality graph.
#[derive(Clone, Copy, Debug, Default)]
pub struct MomOracle;

impl MomSolver for MomOracle {
    fn solve_mom(&self, pair: &PointSetPair<BinaryVector>) -> Result<Vec<(usize, usize)>> {
        let (_, pi) = mom_oracle(pair)?;
        Ok(pi.into_iter().enumerate().collect())
    }
}

/// A Find-OV algorithm. `stream` distinguishes repeated calls within one
/// run so randomized solvers draw fresh samples.
pub trait FindOvSolver {
    fn find_ov(&self, pair: &PointSetPair<BinaryVector>, stream: u64) -> Result<FindOvResult>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OracleFindOv;

impl FindOvSolver for OracleFindOv {
    fn find_ov(&self, pair: &PointSetPair<BinaryVector>, _stream: u64) -> Result<FindOvResult> {
        Ok(find_ov_oracle(pair))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FindOvConfig {
    pub alpha: Rational64,
    pub seed: u64,
    pub brute_force_floor: usize,
}

impl FindOvConfig {
    pub fn new(alpha: Rational64, seed: u64) -> Result<Self> {
        rational_in_open_unit(alpha, "alpha")?;
        Ok(Self {
            alpha,
            seed,
            brute_force_floor: DEFAULT_BRUTE_FORCE_FLOOR,
        })
    }

    pub fn with_floor(mut self, floor: usize) -> Self {
        self.brute_force_floor = floor;
        self
    }
}

/// Sizes and intermediate sets of one sampling run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SamplingTrace {
    pub delegated: bool,
    pub step1_sample: usize,
    pub step1_marked: usize,
    pub step2_sample: usize,
    pub b_large: Vec<usize>,
    pub step2_marked: usize,
    /// Left ids handed to the MOM solver.
    pub mom_left: Vec<usize>,
    /// Right ids whose copies were handed to the MOM solver.
    pub mom_right: Vec<usize>,
    pub copies: usize,
    pub step3_marked: usize,
}

/// Sampling Find-OV with `n = |B|`:
///
/// 1. each `a` samples `⌈n^{1−α/4}⌉` right vectors and is marked when it saw
///    a witness and `hits · |B| ≥ ⌈n^{α/2}⌉ · sample`;
/// 2. each remaining `b` samples `⌈n^{1−α/2}⌉` remaining left vectors; those
///    with `hits · |A_rem| ≥ ⌈n^α⌉ · sample` scan `A_rem` and are dropped;
/// 3. the MOM solver runs on `A_rem` against `2⌈n^α⌉` copies of each
///    remaining `b` (padded with all-ones vectors if `A_rem` is larger), and
///    orthogonal returned pairs are kept.
pub fn find_ov_sampling(
    pair: &PointSetPair<BinaryVector>,
    cfg: &FindOvConfig,
    mom: &dyn MomSolver,
) -> Result<(FindOvResult, SamplingTrace)> {
    let n = pair.right().len();
    let missed_budget = n / 2;
    if n <= cfg.brute_force_floor || pair.left().is_empty() {
        let trace = SamplingTrace {
            delegated: true,
            ..SamplingTrace::default()
        };
        return Ok((find_ov_oracle(pair), trace));
    }
    rational_in_open_unit(cfg.alpha, "alpha")?;
    let alpha = cfg.alpha;
    let one = Rational64::from_integer(1);
    let n64 = n as u64;
    let (left, right) = (pair.left(), pair.right());
    let mut witnesses = BTreeMap::new();
    let mut trace = SamplingTrace::default();

    // step 1
    let mut rng = stage_rng(cfg.seed, 0);
    let s1 = (ceil_pow(n64, one - alpha / 4)? as usize).min(n);
    let t1 = ceil_pow(n64, alpha / 2)? as usize;
    trace.step1_sample = s1;
    let mut a_rem = Vec::new();
    for (i, a) in left.iter().enumerate() {
        let mut hits = 0usize;
        let mut witness = None;
        for j in sample(&mut rng, n, s1) {
            if a.is_orthogonal(&right[j]) {
                hits += 1;
                witness.get_or_insert(j);
            }
        }
        match witness {
            Some(j) if hits * n >= t1 * s1 => {
                witnesses.insert(i, j);
            }
            _ => a_rem.push(i),
        }
    }
    trace.step1_marked = witnesses.len();

    // step 2
    let mut rng = stage_rng(cfg.seed, 1);
    let mut b_rem = Vec::new();
    if !a_rem.is_empty() {
        let pop = a_rem.len();
        let s2 = (ceil_pow(n64, one - alpha / 2)? as usize).min(pop);
        let t2 = ceil_pow(n64, alpha)? as usize;
        trace.step2_sample = s2;
        for (j, b) in right.iter().enumerate() {
            let hits = sample(&mut rng, pop, s2)
                .into_iter()
                .filter(|&x| left[a_rem[x]].is_orthogonal(b))
                .count();
            if hits > 0 && hits * pop >= t2 * s2 {
                trace.b_large.push(j);
            } else {
                b_rem.push(j);
            }
        }
        for &j in &trace.b_large {
            a_rem.retain(|&i| {
                if left[i].is_orthogonal(&right[j]) {
                    witnesses.insert(i, j);
                    false
                } else {
                    true
                }
            });
        }
        trace.step2_marked = witnesses.len() - trace.step1_marked;
    }

    // step 3
    if !a_rem.is_empty() && !b_rem.is_empty() {
        let copies = 2 * ceil_pow(n64, alpha)? as usize;
        let mom_left: Vec<BinaryVector> = a_rem.iter().map(|&i| left[i].clone()).collect();
        let b_vecs: Vec<BinaryVector> = b_rem.iter().map(|&j| right[j].clone()).collect();
        let (mut mom_right, parents) = duplicate(&b_vecs, copies);
        let real_right = mom_right.len();
        if mom_left.len() > real_right {
            mom_right.extend(std::iter::repeat_n(
                BinaryVector::ones(pair.dim()),
                mom_left.len() - real_right,
            ));
        }
        let sub = PointSetPair::new(pair.dim(), mom_left, mom_right)?;
        let before = witnesses.len();
        for (l, r) in mom.solve_mom(&sub)? {
            if l >= sub.left().len() || r >= real_right {
                continue;
            }
            if sub.left()[l].is_orthogonal(&sub.right()[r]) {
                witnesses.entry(a_rem[l]).or_insert(b_rem[parents[r]]);
            }
        }
        trace.step3_marked = witnesses.len() - before;
        trace.copies = copies;
        trace.mom_left = a_rem;
        trace.mom_right = b_rem;
    }

    let result = FindOvResult::from_witnesses(witnesses, missed_budget);
    result.verify(pair).map_err(|e| Error::invariant(e.to_string()))?;
    Ok((result, trace))
}

pub struct SamplingFindOv<'a> {
    pub cfg: FindOvConfig,
    pub mom: &'a dyn MomSolver,
}

impl FindOvSolver for SamplingFindOv<'_> {
    fn find_ov(&self, pair: &PointSetPair<BinaryVector>, stream: u64) -> Result<FindOvResult> {
        let cfg = FindOvConfig {
            seed: derive_seed(self.cfg.seed, stream),
            ..self.cfg.clone()
        };
        Ok(find_ov_sampling(pair, &cfg, self.mom)?.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HsVerdict {
    /// Every left vector has an orthogonal partner.
    NoHittingVector,
    HittingVectorExists,
}

impl HsVerdict {
    pub fn from_oracle(pair: &PointSetPair<BinaryVector>) -> Self {
        match hs_oracle(pair) {
            Some(_) => HsVerdict::HittingVectorExists,
            None => HsVerdict::NoHittingVector,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HsPhaseRecord {
    pub phase: u32,
    /// `|R_i|`.
    pub remaining: usize,
    /// `|P|`, found left ids of the duplicated instance.
    pub found: usize,
    /// `|P′|`, distinct originals among them.
    pub distinct: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HsPhaseTrace {
    pub phases: Vec<HsPhaseRecord>,
    /// `⌈log₂ n⌉ + 1`.
    pub planned_phases: u32,
}

impl HsPhaseTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("phase,remaining,found,distinct,verdict\n");
        for p in &self.phases {
            let verdict = if p.passed { "pass" } else { "fail" };
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                p.phase, p.remaining, p.found, p.distinct, verdict
            ));
        }
        s
    }
}

/// Hitting set by repeated Find-OV: phase `i` runs the solver on `2^{i−1}`
/// copies of each remaining left vector and fails once more than `n/2^i`
/// remain.
pub fn hitting_set_phased(
    pair: &PointSetPair<BinaryVector>,
    solver: &dyn FindOvSolver,
) -> Result<(HsVerdict, HsPhaseTrace)> {
    let n = pair.left().len();
    if n == 0 {
        return Ok((HsVerdict::NoHittingVector, HsPhaseTrace::default()));
    }
    let t = ceil_log2(n as u64) + 1;
    let mut trace = HsPhaseTrace {
        phases: Vec::new(),
        planned_phases: t,
    };
    let mut remaining: Vec<usize> = (0..n).collect();
    for i in 1..=t {
        let copies = 1usize << (i - 1);
        let (found, distinct) = if remaining.is_empty() {
            (0, 0)
        } else {
            let vecs: Vec<BinaryVector> = remaining.iter().map(|&a| pair.left()[a].clone()).collect();
            let (dup, parents) = duplicate(&vecs, copies);
            let sub = PointSetPair::new(pair.dim(), dup, pair.right().to_vec())?;
            let res = solver.find_ov(&sub, i as u64)?;
            res.verify(&sub)?;
            let mut hit = vec![false; remaining.len()];
            for &id in &res.found {
                hit[parents[id]] = true;
            }
            let distinct = hit.iter().filter(|&&h| h).count();
            let mut k = 0;
            remaining.retain(|_| {
                k += 1;
                !hit[k - 1]
            });
            (res.found.len(), distinct)
        };
        let passed = (remaining.len() as u128) << i <= n as u128;
        trace.phases.push(HsPhaseRecord {
            phase: i,
            remaining: remaining.len() + distinct,
            found,
            distinct,
            passed,
        });
        if !passed {
            return Ok((HsVerdict::HittingVectorExists, trace));
        }
    }
    if !remaining.is_empty() {
        return Err(Error::invariant("left vectors remain after the final phase"));
    }
    Ok((HsVerdict::NoHittingVector, trace))
}

/// A `(k, 2k)`-Find-OV solver: given at least `2k` orthogonal pairs,
/// returns `k` of them.
pub trait PromiseFindOv {
    fn find_pairs(&self, pair: &PointSetPair<BinaryVector>, k: usize) -> Result<Vec<(usize, usize)>>;
}

/// `k` distinct orthogonal pairs by row-major scan.
pub fn find_ov_promise(pair: &PointSetPair<BinaryVector>, k: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(k);
    if k == 0 {
        return Ok(out);
    }
    for (i, a) in pair.left().iter().enumerate() {
        for (j, b) in pair.right().iter().enumerate() {
            if a.is_orthogonal(b) {
                out.push((i, j));
                if out.len() == k {
                    return Ok(out);
                }
            }
        }
    }
    Err(Error::PromiseViolation(format!(
        "asked for {k} orthogonal pairs, only {} exist",
        out.len()
    )))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScanPromiseFindOv;

impl PromiseFindOv for ScanPromiseFindOv {
    fn find_pairs(&self, pair: &PointSetPair<BinaryVector>, k: usize) -> Result<Vec<(usize, usize)>> {
        find_ov_promise(pair, k)
    }
}

/// `⌈2n^{δ/(2−δ)}⌉`.
pub fn promise_ov_copies(n: usize, delta: Rational64) -> Result<usize> {
    rational_in_open_unit(delta, "delta")?;
    let e = delta / (Rational64::from_integer(2) - delta);
    Ok(ceil_scaled_pow(2, n as u64, e)? as usize)
}

/// Decides OV with one `(k, 2k)`-Find-OV call, `k = ⌈(n · copies)^δ⌉`, on
/// the instance with every vector duplicated `⌈2n^{δ/(2−δ)}⌉` times.
pub fn ov_via_promise_findov(
    pair: &PointSetPair<BinaryVector>,
    delta: Rational64,
    solver: &dyn PromiseFindOv,
) -> Result<Option<(usize, usize)>> {
    let n = pair.left().len();
    if pair.right().len() != n {
        return Err(Error::shape("OV via Find-OV needs |A| = |B|"));
    }
    if n == 0 {
        return Ok(None);
    }
    let copies = promise_ov_copies(n, delta)?;
    let (left, lp) = duplicate(pair.left(), copies);
    let (right, rp) = duplicate(pair.right(), copies);
    let dup = PointSetPair::new(pair.dim(), left, right)?;
    let k = ceil_pow((n * copies) as u64, delta)? as usize;
    match solver.find_pairs(&dup, k) {
        Ok(pairs) => Ok(pairs
            .into_iter()
            .find(|&(l, r)| l < dup.left().len() && r < dup.right().len() && dup.left()[l].is_orthogonal(&dup.right()[r]))
            .map(|(l, r)| (lp[l], rp[r]))),
        Err(Error::PromiseViolation(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PromiseHsTrace {
    pub delegated: bool,
    pub alpha: Rational64,
    pub step1_sample: usize,
    pub step1_marked: usize,
    pub k: usize,
    pub k_block: usize,
    pub solver_calls: usize,
    pub step2_marked: usize,
    pub unmarked_after_step2: usize,
    pub step3_threshold: usize,
    pub stopped_early: bool,
    pub step4_marked: usize,
}

fn blocks(len: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    (0..parts)
        .map(|i| i * len / parts..(i + 1) * len / parts)
        .filter(|r| !r.is_empty())
        .collect()
}

/// Hitting set from a `(√(n/k), 2√(n/k))`-Find-OV solver on `k × k` blocks,
/// with `α = ε/7` and `k = ⌈n^{1/3−α}⌉`.
pub fn hs_via_promise_findov(
    pair: &PointSetPair<BinaryVector>,
    epsilon: Rational64,
    seed: u64,
    solver: &dyn PromiseFindOv,
    brute_force_floor: usize,
) -> Result<(HsVerdict, PromiseHsTrace)> {
    rational_in_open_unit(epsilon, "epsilon")?;
    let alpha = epsilon / 7;
    let n = pair.left().len();
    if pair.right().len() != n {
        return Err(Error::shape("hitting set via Find-OV needs |A| = |B|"));
    }
    let mut trace = PromiseHsTrace {
        alpha,
        ..PromiseHsTrace::default()
    };
    if n <= brute_force_floor {
        trace.delegated = true;
        return Ok((HsVerdict::from_oracle(pair), trace));
    }
    if pair.right().iter().any(BinaryVector::is_zero) {
        return Ok((HsVerdict::NoHittingVector, trace));
    }
    let d = pair.dim();
    let right = pair.right();
    let mut current: Vec<BinaryVector> = pair.left().to_vec();
    let mut marked: Vec<bool> = current.iter().map(BinaryVector::is_zero).collect();
    let ones = BinaryVector::ones(d);
    let one = Rational64::from_integer(1);
    let n64 = n as u64;

    // step 1
    let mut rng = stage_rng(seed, 0);
    let s = (ceil_pow(n64, one - alpha)? as usize).min(n);
    trace.step1_sample = s;
    for i in 0..n {
        if marked[i] {
            continue;
        }
        if sample(&mut rng, n, s).into_iter().any(|j| current[i].is_orthogonal(&right[j])) {
            marked[i] = true;
            current[i] = ones.clone();
            trace.step1_marked += 1;
        }
    }

    // step 2
    let third = Rational64::new(1, 3);
    let k = if alpha < third {
        (ceil_pow(n64, third - alpha)? as usize).clamp(1, n)
    } else {
        1
    };
    let k_block = ceil_sqrt_ratio(n64, k as u64) as usize;
    trace.k = k;
    trace.k_block = k_block;
    let a_blocks = blocks(n, k);
    let b_blocks = blocks(n, k);
    for ab in &a_blocks {
        for bb in &b_blocks {
            loop {
                let sub = PointSetPair::new(d, current[ab.clone()].to_vec(), right[bb.clone()].to_vec())?;
                trace.solver_calls += 1;
                let pairs = match solver.find_pairs(&sub, k_block) {
                    Ok(p) => p,
                    Err(Error::PromiseViolation(_)) => Vec::new(),
                    Err(e) => return Err(e),
                };
                for &(l, r) in &pairs {
                    let ok = l < sub.left().len()
                        && r < sub.right().len()
                        && sub.left()[l].is_orthogonal(&sub.right()[r]);
                    if !ok {
                        return Err(Error::inconsistency(format!(
                            "Find-OV solver returned non-orthogonal pair ({l}, {r})"
                        )));
                    }
                    let id = ab.start + l;
                    if !marked[id] {
                        marked[id] = true;
                        trace.step2_marked += 1;
                    }
                    current[id] = ones.clone();
                }
                if pairs.len() < k_block {
                    break;
                }
            }
        }
    }

    // step 3
    let unmarked = marked.iter().filter(|&&m| !m).count();
    let threshold = ceil_scaled_pow(2, n64, one - alpha * 3 / 2)? as usize;
    trace.unmarked_after_step2 = unmarked;
    trace.step3_threshold = threshold;
    if unmarked > threshold {
        trace.stopped_early = true;
        return Ok((HsVerdict::HittingVectorExists, trace));
    }

    // step 4
    for i in 0..n {
        if !marked[i] && right.iter().any(|b| current[i].is_orthogonal(b)) {
            marked[i] = true;
            trace.step4_marked += 1;
        }
    }

    // step 5
    let verdict = if marked.iter().all(|&m| m) {
        HsVerdict::NoHittingVector
    } else {
        HsVerdict::HittingVectorExists
    };
    Ok((verdict, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::AsymmetricEmdMom;
    use crate::seed::stage_rng;
    use rand::Rng;

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

    fn random_pair(n: usize, d: usize, density: f64, seed: u64) -> PointSetPair<BinaryVector> {
        let mut rng = stage_rng(seed, 99);
        let mut gen = |_| {
            BinaryVector::from_bits(&(0..d).map(|_| rng.gen_bool(density)).collect::<Vec<_>>())
        };
        let left = (0..n).map(&mut gen).collect();
        let right = (0..n).map(&mut gen).collect();
        PointSetPair::new(d, left, right).unwrap()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(ov_oracle(&bpair(&[&[1, 0]], &[&[0, 1]])), Some((0, 0)));
        assert_eq!(ov_oracle(&bpair(&[&[1, 1]], &[&[1, 1]])), None);
        assert_eq!(hs_oracle(&bpair(&[&[1, 1]], &[&[1, 0], &[0, 1]])), Some(0));
        assert_eq!(hs_oracle(&bpair(&[&[1, 0]], &[&[0, 1]])), None);
        assert_eq!(hs_oracle(&bpair(&[&[1, 1], &[1, 0]], &[&[0, 0], &[1, 1]])), None);
        let all = find_ov_oracle(&bpair(&[&[1, 0], &[1, 1]], &[&[0, 0], &[0, 0]]));
        assert_eq!(all.found, vec![0, 1]);
        let none = find_ov_oracle(&bpair(&[&[1, 1]], &[&[1, 1]]));
        assert!(none.found.is_empty());
    }

    #[test]
    fn mom_oracle_examples() {
        let p = bpair(&[&[1, 0], &[0, 1]], &[&[0, 1], &[1, 1]]);
        let (m, pi) = mom_oracle(&p).unwrap();
        assert_eq!(m, 1);
        assert_eq!(pi.len(), 2);
        assert_ne!(pi[0], pi[1]);
        let comp = bpair(&[&[1, 0, 0], &[0, 1, 1]], &[&[0, 1, 1], &[1, 0, 0]]);
        assert_eq!(mom_oracle(&comp).unwrap().0, 2);
        let ones = bpair(&[&[1, 1]], &[&[1, 1]]);
        assert_eq!(mom_oracle(&ones).unwrap().0, 0);
        assert!(mom_oracle(&bpair(&[&[1], &[1]], &[&[1]])).is_err());
    }

    #[test]
    fn sampling_edge_cases() {
        let cfg = FindOvConfig::new(Rational64::new(1, 2), 5).unwrap().with_floor(4);
        let zeros = PointSetPair::new(
            3,
            (0..20).map(|i| BinaryVector::from_bits(&[i % 2 == 0, true, false])).collect(),
            vec![BinaryVector::zeros(3); 20],
        )
        .unwrap();
        let (res, trace) = find_ov_sampling(&zeros, &cfg, &MomOracle).unwrap();
        assert_eq!(res.found, (0..20).collect::<Vec<_>>());
        assert_eq!(trace.step1_marked, 20);

        let ones = PointSetPair::new(3, vec![BinaryVector::ones(3); 20], vec![BinaryVector::ones(3); 20]).unwrap();
        for seed in 0..5 {
            let cfg = FindOvConfig::new(Rational64::new(1, 2), seed).unwrap().with_floor(4);
            assert!(find_ov_sampling(&ones, &cfg, &MomOracle).unwrap().0.found.is_empty());
        }
    }

    #[test]
    fn sampling_is_sound_and_close() {
        for seed in 0..20 {
            let p = random_pair(100, 12, 0.3, seed);
            let cfg = FindOvConfig::new(Rational64::new(1, 2), seed).unwrap();
            let (res, _) = find_ov_sampling(&p, &cfg, &MomOracle).unwrap();
            res.verify(&p).unwrap();
            let truth = find_ov_oracle(&p);
            assert!(res.found.iter().all(|id| truth.witnesses.contains_key(id)));
            assert!(res.found.len() + res.missed_budget >= truth.found.len());
        }
    }

    #[test]
    fn sampling_through_gadget_matches_oracle_backend() {
        let p = random_pair(24, 6, 0.5, 3);
        let cfg = FindOvConfig::new(Rational64::new(1, 2), 11).unwrap().with_floor(8);
        let (a, _) = find_ov_sampling(&p, &cfg, &AsymmetricEmdMom).unwrap();
        a.verify(&p).unwrap();
        let truth = find_ov_oracle(&p);
        assert!(a.found.len() + a.missed_budget >= truth.found.len());
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = random_pair(90, 10, 0.35, 8);
        let cfg = FindOvConfig::new(Rational64::new(1, 2), 77).unwrap();
        let a = find_ov_sampling(&p, &cfg, &MomOracle).unwrap();
        let b = find_ov_sampling(&p, &cfg, &MomOracle).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phased_examples() {
        let p = bpair(&[&[1, 1], &[1, 0]], &[&[0, 0], &[1, 1]]);
        let (v, trace) = hitting_set_phased(&p, &OracleFindOv).unwrap();
        assert_eq!(v, HsVerdict::NoHittingVector);
        assert_eq!(trace.phases.len() as u32, trace.planned_phases);
        assert_eq!(trace.phases[0].distinct, 2);

        let p = bpair(&[&[1, 1]], &[&[1, 1]]);
        assert_eq!(hitting_set_phased(&p, &OracleFindOv).unwrap().0, HsVerdict::HittingVectorExists);
    }

    #[test]
    fn phased_agrees_with_oracle() {
        for seed in 0..60 {
            let n = 5 + (seed as usize * 7) % 40;
            let p = random_pair(n, 6, 0.45, seed);
            let (v, trace) = hitting_set_phased(&p, &OracleFindOv).unwrap();
            assert_eq!(v, HsVerdict::from_oracle(&p), "seed {seed}");
            assert!(trace.phases.len() as u32 <= ceil_log2(n as u64) + 1);
            if v == HsVerdict::NoHittingVector {
                assert_eq!(trace.phases.iter().map(|p| p.distinct).sum::<usize>(), n);
            }
        }
    }

    #[test]
    fn promise_examples() {
        let p = bpair(&[&[1, 1, 0], &[1, 1, 1]], &[&[1, 1, 1], &[0, 0, 1]]);
        assert_eq!(find_ov_promise(&p, 1).unwrap(), vec![(0, 1)]);
        let zeros = PointSetPair::new(2, vec![BinaryVector::ones(2); 3], vec![BinaryVector::zeros(2); 3]).unwrap();
        assert_eq!(find_ov_promise(&zeros, 3).unwrap().len(), 3);
        let none = bpair(&[&[1]], &[&[1]]);
        assert!(matches!(find_ov_promise(&none, 1), Err(Error::PromiseViolation(_))));
    }

    #[test]
    fn ov_via_promise_examples() {
        assert_eq!(promise_ov_copies(8, Rational64::new(2, 3)).unwrap(), 6);
        let p = bpair(&[&[1, 1, 0], &[1, 1, 1]], &[&[1, 1, 1], &[0, 0, 1]]);
        let delta = Rational64::new(1, 2);
        assert_eq!(ov_via_promise_findov(&p, delta, &ScanPromiseFindOv).unwrap(), Some((0, 1)));
        let none = bpair(&[&[1, 1], &[1, 0]], &[&[1, 1], &[1, 0]]);
        assert_eq!(ov_via_promise_findov(&none, delta, &ScanPromiseFindOv).unwrap(), None);
    }

    #[test]
    fn hs_via_promise_agrees_with_oracle() {
        let eps = Rational64::new(7, 10);
        for seed in 0..30 {
            let n = 70 + (seed as usize * 13) % 60;
            let p = random_pair(n, 8, 0.4, seed);
            let (v, trace) = hs_via_promise_findov(&p, eps, seed, &ScanPromiseFindOv, 64).unwrap();
            assert!(!trace.delegated);
            assert_eq!(v, HsVerdict::from_oracle(&p), "seed {seed}");
        }
        let small = bpair(&[&[1, 1]], &[&[1, 1]]);
        let (v, trace) = hs_via_promise_findov(&small, eps, 0, &ScanPromiseFindOv, 64).unwrap();
        assert!(trace.delegated);
        assert_eq!(v, HsVerdict::HittingVectorExists);
    }

    #[test]
    fn trace_csv_has_header() {
        let p = bpair(&[&[1, 1]], &[&[0, 0]]);
        let (_, trace) = hitting_set_phased(&p, &OracleFindOv).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("phase,remaining,found,distinct,verdict\n1,1,1,1,pass\n"));
    }
}
