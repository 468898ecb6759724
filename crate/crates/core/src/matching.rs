//! Exact bipartite matching solvers.
//!
//! * [`min_cost_matching`] runs the Hungarian method (shortest augmenting
//!   paths with potentials) in O(rows² · cols), so injections need no
//!   padding. In metric mode rows with one cost everywhere are set aside and
//!   take the leftover columns.
//! * [`brute_force_min_matching`] enumerates factorially and is the oracle
//!   for the solver above.
//! * [`max_cardinality_matching`] is Hopcroft–Karp.
//!
//! Integer-cost modes are solved exactly and then canonicalized to the
//! lexicographically smallest optimal pair sequence. Metric (Euclidean) costs
//! are solved in double-double arithmetic; they are deterministic but not
//! canonicalized, since ties between sums of radicals are only defined up to
//! rounding.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::vectors::{PointSetPair, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingKind {
    Bijection,
    Injection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cost {
    Exact(i128),
    Metric(Real),
}

impl Cost {
    pub fn as_real(self) -> Real {
        match self {
            Cost::Exact(x) => Real::from_i128(x),
            Cost::Metric(r) => r,
        }
    }

    pub fn exact(self) -> Option<i128> {
        match self {
            Cost::Exact(x) => Some(x),
            Cost::Metric(_) => None,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Exact(x) => write!(f, "{x}"),
            Cost::Metric(r) => write!(f, "{r}"),
        }
    }
}

/// A bijection or injection from left ids to right ids, sorted by left id.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub cost: Cost,
    pub kind: MatchingKind,
}

impl Matching {
    /// Checks the shape invariants against side sizes.
    pub fn validate(&self, left: usize, right: usize) -> Result<()> {
        let mut seen_l = vec![false; left];
        let mut seen_r = vec![false; right];
        for &(l, r) in &self.pairs {
            if l >= left || r >= right {
                return Err(Error::shape(format!("pair ({l}, {r}) out of range {left}×{right}")));
            }
            if std::mem::replace(&mut seen_l[l], true) {
                return Err(Error::shape(format!("left id {l} matched twice")));
            }
            if std::mem::replace(&mut seen_r[r], true) {
                return Err(Error::shape(format!("right id {r} matched twice")));
            }
        }
        if self.pairs.len() != left {
            return Err(Error::shape(format!(
                "matching covers {} of {left} left ids",
                self.pairs.len()
            )));
        }
        if self.kind == MatchingKind::Bijection && left != right {
            return Err(Error::shape("bijection between sides of different sizes"));
        }
        if self.kind == MatchingKind::Injection && left > right {
            return Err(Error::shape("injection from the larger side"));
        }
        Ok(())
    }

    pub fn target_of(&self, left: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == left).map(|p| p.1)
    }

    pub fn to_file(&self) -> MatchingFile {
        MatchingFile {
            cost: self.cost.to_string(),
            pairs: self.pairs.iter().map(|&(l, r)| [l, r]).collect(),
            kind: self.kind,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("matching serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: MatchingFile = serde_json::from_str(s)?;
        file.into_matching()
    }
}

/// On-disk matching: `{"cost": "<decimal>", "pairs": [[l, r], ...], "kind": ...}`.
/// Integer costs are written without a decimal point, metric costs with one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingFile {
    pub cost: String,
    pub pairs: Vec<[usize; 2]>,
    pub kind: MatchingKind,
}

impl MatchingFile {
    pub fn into_matching(self) -> Result<Matching> {
        let cost = if self.cost.contains('.') {
            Cost::Metric(self.cost.parse()?)
        } else {
            Cost::Exact(
                self.cost
                    .trim()
                    .parse()
                    .map_err(|_| Error::parameter(format!("bad integer cost {:?}", self.cost)))?,
            )
        };
        let mut pairs: Vec<(usize, usize)> = self.pairs.iter().map(|p| (p[0], p[1])).collect();
        pairs.sort_unstable();
        Ok(Matching {
            pairs,
            cost,
            kind: self.kind,
        })
    }
}

/// Row-major matrix of exact squared distances.
#[derive(Clone, Debug, PartialEq)]
pub struct SqDistMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl SqDistMatrix {
    pub fn from_pair<V: Vector>(pair: &PointSetPair<V>) -> Result<Self> {
        let (rows, cols) = (pair.left().len(), pair.right().len());
        let mut data = Vec::with_capacity(rows * cols);
        for a in pair.left() {
            for b in pair.right() {
                data.push(a.sq_dist_to(b)?);
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Where edge costs come from.
#[derive(Clone, Debug, PartialEq)]
pub enum CostOracle {
    /// `‖a − b‖₂`.
    Euclidean(SqDistMatrix),
    /// `‖a − b‖₂²`.
    SquaredEuclidean(SqDistMatrix),
    /// A rectangular integer matrix.
    Explicit(Vec<Vec<i128>>),
    /// `cost(i, j) = Σ_r u[i][r] · v[j][r]`.
    Factorized { u: Vec<Vec<i128>>, v: Vec<Vec<i128>> },
}

impl CostOracle {
    pub fn euclidean<V: Vector>(pair: &PointSetPair<V>) -> Result<Self> {
        Ok(CostOracle::Euclidean(SqDistMatrix::from_pair(pair)?))
    }

    pub fn squared_euclidean<V: Vector>(pair: &PointSetPair<V>) -> Result<Self> {
        Ok(CostOracle::SquaredEuclidean(SqDistMatrix::from_pair(pair)?))
    }

    pub fn explicit(matrix: Vec<Vec<i128>>) -> Result<Self> {
        let cols = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("explicit cost matrix is not rectangular"));
        }
        Ok(CostOracle::Explicit(matrix))
    }

    pub fn factorized(u: Vec<Vec<i128>>, v: Vec<Vec<i128>>) -> Result<Self> {
        let rank = u.first().or(v.first()).map_or(0, Vec::len);
        if u.iter().chain(&v).any(|r| r.len() != rank) {
            return Err(Error::shape("factor rows have differing rank"));
        }
        Ok(CostOracle::Factorized { u, v })
    }

    pub fn rows(&self) -> usize {
        match self {
            CostOracle::Euclidean(m) | CostOracle::SquaredEuclidean(m) => m.rows,
            CostOracle::Explicit(m) => m.len(),
            CostOracle::Factorized { u, .. } => u.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            CostOracle::Euclidean(m) | CostOracle::SquaredEuclidean(m) => m.cols,
            CostOracle::Explicit(m) => m.first().map_or(0, Vec::len),
            CostOracle::Factorized { v, .. } => v.len(),
        }
    }

    pub fn is_metric(&self) -> bool {
        matches!(self, CostOracle::Euclidean(_))
    }

    /// Integer cost of edge `(i, j)`; `None` for metric oracles.
    pub fn exact_cost(&self, i: usize, j: usize) -> Option<Result<i128>> {
        match self {
            CostOracle::Euclidean(_) => None,
            CostOracle::SquaredEuclidean(m) => Some(Ok(m.get(i, j))),
            CostOracle::Explicit(m) => Some(Ok(m[i][j])),
            CostOracle::Factorized { u, v } => Some(
                u[i].iter()
                    .zip(&v[j])
                    .try_fold(0i128, |acc, (&x, &y)| x.checked_mul(y).and_then(|p| acc.checked_add(p)))
                    .ok_or_else(|| Error::capacity("factorized cost overflows 127 bits")),
            ),
        }
    }

    pub fn cost(&self, i: usize, j: usize) -> Result<Cost> {
        match self {
            CostOracle::Euclidean(m) => Ok(Cost::Metric(Real::from_i128(m.get(i, j)).sqrt())),
            _ => Ok(Cost::Exact(self.exact_cost(i, j).expect("integer mode")?)),
        }
    }

    /// Recomputes the total cost of a set of pairs.
    pub fn total(&self, pairs: &[(usize, usize)]) -> Result<Cost> {
        if self.is_metric() {
            let mut sum = Real::ZERO;
            for &(i, j) in pairs {
                sum += self.cost(i, j)?.as_real();
            }
            Ok(Cost::Metric(sum))
        } else {
            let mut sum = 0i128;
            for &(i, j) in pairs {
                let c = self.exact_cost(i, j).expect("integer mode")?;
                sum = sum
                    .checked_add(c)
                    .ok_or_else(|| Error::capacity("matching cost overflows 127 bits"))?;
            }
            Ok(Cost::Exact(sum))
        }
    }

    fn dense_exact(&self) -> Result<Vec<Vec<i128>>> {
        (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| self.exact_cost(i, j).expect("integer mode"))
                    .collect()
            })
            .collect()
    }

    fn dense_metric(&self) -> Vec<Vec<Real>> {
        let CostOracle::Euclidean(m) = self else {
            unreachable!("metric mode")
        };
        // gadget instances have few distinct distances
        let mut roots: HashMap<i128, Real> = HashMap::new();
        (0..m.rows)
            .map(|i| {
                (0..m.cols)
                    .map(|j| {
                        let sq = m.get(i, j);
                        *roots.entry(sq).or_insert_with(|| Real::from_i128(sq).sqrt())
                    })
                    .collect()
            })
            .collect()
    }

    fn check_shape(&self, kind: MatchingKind) -> Result<()> {
        let (rows, cols) = (self.rows(), self.cols());
        if rows == 0 || cols == 0 {
            return Err(Error::shape("matching instance has an empty side"));
        }
        match kind {
            MatchingKind::Bijection if rows != cols => Err(Error::shape(format!(
                "bijection needs equal sides, got {rows} and {cols}"
            ))),
            MatchingKind::Injection if rows > cols => Err(Error::shape(format!(
                "injection needs |left| ≤ |right|, got {rows} > {cols}"
            ))),
            _ => Ok(()),
        }
    }
}

trait Weight: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn infinity() -> Self;
}

impl Weight for i128 {
    fn zero() -> Self {
        0
    }
    fn infinity() -> Self {
        i128::MAX / 4
    }
}

impl Weight for Real {
    fn zero() -> Self {
        Real::ZERO
    }
    fn infinity() -> Self {
        Real::from_f64(f64::MAX / 4.0)
    }
}

struct Assignment<W> {
    col_of_row: Vec<usize>,
    row_potential: Vec<W>,
    col_potential: Vec<W>,
}

/// Hungarian method for `rows ≤ cols`, in O(rows² · cols). Column
/// potentials never increase and stay zero on unmatched columns.
fn hungarian<W: Weight>(costs: &[Vec<W>], cols: usize) -> Assignment<W> {
    let n = costs.len();
    let m = cols;
    let inf = W::infinity();
    // 1-based with a virtual column 0
    let mut u = vec![W::zero(); n + 1];
    let mut v = vec![W::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![inf; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = &costs[i0 - 1];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            col_of_row[owner[j] - 1] = j - 1;
        }
    }
    Assignment {
        col_of_row,
        row_potential: u[1..].to_vec(),
        col_potential: v[1..].to_vec(),
    }
}

fn free_columns(col_of_row: &[usize], cols: usize) -> impl Iterator<Item = usize> {
    let mut taken = vec![false; cols];
    for &j in col_of_row {
        taken[j] = true;
    }
    (0..cols).filter(move |&j| !taken[j])
}

/// Moves an optimal integer assignment to the lexicographically smallest
/// optimal one, considering rows `0..fixed_rows` in order.
///
/// With optimal duals, the optimal assignments are exactly the perfect
/// matchings of the tight subgraph (zero reduced cost), so each row greedily
/// takes the smallest tight column for which the remaining unfixed rows can
/// still be rerouted along an alternating path.
fn canonicalize(costs: &[Vec<i128>], a: &mut Assignment<i128>, fixed_rows: usize) {
    let n = costs.len();
    let tight = |i: usize, j: usize| costs[i][j] - a.row_potential[i] - a.col_potential[j] == 0;
    let mut row_of_col = vec![0usize; n];
    for (i, &j) in a.col_of_row.iter().enumerate() {
        row_of_col[j] = i;
    }
    let mut col_fixed = vec![false; n];
    let mut parent_row = vec![usize::MAX; n];
    let mut queue = VecDeque::new();

    for i in 0..fixed_rows {
        let current = a.col_of_row[i];
        for j in 0..current {
            if col_fixed[j] || !tight(i, j) {
                continue;
            }
            // free `current` by rerouting the owner of j through tight edges
            let start = row_of_col[j];
            parent_row.iter_mut().for_each(|p| *p = usize::MAX);
            queue.clear();
            queue.push_back(start);
            let mut found = false;
            'bfs: while let Some(r) = queue.pop_front() {
                for c in 0..n {
                    if c == j || col_fixed[c] || parent_row[c] != usize::MAX || !tight(r, c) {
                        continue;
                    }
                    parent_row[c] = r;
                    if c == current {
                        found = true;
                        break 'bfs;
                    }
                    queue.push_back(row_of_col[c]);
                }
            }
            if !found {
                continue;
            }
            let mut c = current;
            loop {
                let r = parent_row[c];
                let prev = a.col_of_row[r];
                a.col_of_row[r] = c;
                row_of_col[c] = r;
                if r == start {
                    break;
                }
                c = prev;
            }
            a.col_of_row[i] = j;
            row_of_col[j] = i;
            break;
        }
        col_fixed[a.col_of_row[i]] = true;
    }
}

/// Minimum-cost bijection or injection under `oracle`.
pub fn min_cost_matching(oracle: &CostOracle, kind: MatchingKind) -> Result<Matching> {
    oracle.check_shape(kind)?;
    let (rows, cols) = (oracle.rows(), oracle.cols());
    let col_of_row = if oracle.is_metric() {
        let costs = oracle.dense_metric();
        // a row with one cost everywhere takes whatever column is left over
        let constant: Vec<bool> = costs.iter().map(|r| r.iter().all(|&c| c == r[0])).collect();
        let active: Vec<Vec<Real>> = costs
            .iter()
            .zip(&constant)
            .filter(|(_, &c)| !c)
            .map(|(r, _)| r.clone())
            .collect();
        let solved = hungarian(&active, cols).col_of_row;
        let mut leftover = free_columns(&solved, cols);
        let mut solved = solved.into_iter();
        constant
            .iter()
            .map(|&c| {
                if c {
                    leftover.next().expect("rows ≤ cols")
                } else {
                    solved.next().expect("one column per active row")
                }
            })
            .collect::<Vec<usize>>()
    } else {
        let mut costs = oracle.dense_exact()?;
        let max = costs.iter().flatten().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        // potentials stay within (cols + 1)·max; keep clear of the sentinel
        let bound = (i128::MAX / 16) as u128 / (cols as u128 + 2);
        if max > bound {
            return Err(Error::capacity("costs too large for exact potentials"));
        }
        let mut a = hungarian(&costs, cols);
        // zero-cost dummy rows with zero potential on the free columns keep
        // the duals optimal for the square problem
        let free: Vec<usize> = free_columns(&a.col_of_row, cols).collect();
        a.col_of_row.extend(free);
        a.row_potential.resize(cols, 0);
        costs.resize(cols, vec![0; cols]);
        canonicalize(&costs, &mut a, rows);
        a.col_of_row
    };
    let pairs: Vec<(usize, usize)> = col_of_row[..rows].iter().copied().enumerate().collect();
    let cost = oracle.total(&pairs)?;
    Ok(Matching { pairs, cost, kind })
}

/// Largest left side the factorial oracle accepts.
pub const BRUTE_FORCE_MAX_LEFT: usize = 9;
const BRUTE_FORCE_MAX_LEAVES: u128 = 50_000_000;

/// Exact optimum by enumerating every injection (or bijection) in
/// lexicographic order; the first strictly best one wins.
pub fn brute_force_min_matching(oracle: &CostOracle, kind: MatchingKind) -> Result<Matching> {
    oracle.check_shape(kind)?;
    let (rows, cols) = (oracle.rows(), oracle.cols());
    if rows > BRUTE_FORCE_MAX_LEFT {
        return Err(Error::capacity(format!(
            "brute force is capped at {BRUTE_FORCE_MAX_LEFT} left vertices, got {rows}"
        )));
    }
    let leaves: u128 = (0..rows as u128).map(|k| cols as u128 - k).product();
    if leaves > BRUTE_FORCE_MAX_LEAVES {
        return Err(Error::capacity(format!("{leaves} injections exceed the enumeration cap")));
    }

    let mut costs = vec![vec![Cost::Exact(0); cols]; rows];
    for (i, row) in costs.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = oracle.cost(i, j)?;
        }
    }

    struct Search<'a> {
        costs: &'a [Vec<Cost>],
        used: Vec<bool>,
        current: Vec<usize>,
        best: Option<(Cost, Vec<usize>)>,
    }

    fn add(a: Cost, b: Cost) -> Result<Cost> {
        Ok(match (a, b) {
            (Cost::Exact(x), Cost::Exact(y)) => Cost::Exact(
                x.checked_add(y).ok_or_else(|| Error::capacity("cost overflow"))?,
            ),
            (x, y) => Cost::Metric(x.as_real() + y.as_real()),
        })
    }

    fn less(a: Cost, b: Cost) -> bool {
        match (a, b) {
            (Cost::Exact(x), Cost::Exact(y)) => x < y,
            (x, y) => x.as_real() < y.as_real(),
        }
    }

    impl Search<'_> {
        fn run(&mut self, row: usize, acc: Cost) -> Result<()> {
            if row == self.costs.len() {
                if self.best.as_ref().is_none_or(|(b, _)| less(acc, *b)) {
                    self.best = Some((acc, self.current.clone()));
                }
                return Ok(());
            }
            for j in 0..self.used.len() {
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
                self.current.push(j);
                let next = add(acc, self.costs[row][j])?;
                self.run(row + 1, next)?;
                self.current.pop();
                self.used[j] = false;
            }
            Ok(())
        }
    }

    let zero = if oracle.is_metric() { Cost::Metric(Real::ZERO) } else { Cost::Exact(0) };
    let mut search = Search {
        costs: &costs,
        used: vec![false; cols],
        current: Vec::with_capacity(rows),
        best: None,
    };
    search.run(0, zero)?;
    let (_, cols_of_rows) = search.best.expect("nonempty enumeration");
    let pairs: Vec<(usize, usize)> = cols_of_rows.into_iter().enumerate().collect();
    let cost = oracle.total(&pairs)?;
    Ok(Matching { pairs, cost, kind })
}

/// Earth mover distance: minimum total Euclidean length of a perfect matching.
pub fn emd<V: Vector>(pair: &PointSetPair<V>) -> Result<(Real, Matching)> {
    if pair.left().len() != pair.right().len() {
        return Err(Error::shape(format!(
            "EMD needs equal sides, got {} and {}",
            pair.left().len(),
            pair.right().len()
        )));
    }
    let m = min_cost_matching(&CostOracle::euclidean(pair)?, MatchingKind::Bijection)?;
    Ok((m.cost.as_real(), m))
}

/// Asymmetric EMD: minimum total Euclidean length of an injection `A → B`.
pub fn asymmetric_emd<V: Vector>(pair: &PointSetPair<V>) -> Result<(Real, Matching)> {
    if pair.left().len() > pair.right().len() {
        return Err(Error::shape(format!(
            "asymmetric EMD needs |A| ≤ |B|, got {} > {}",
            pair.left().len(),
            pair.right().len()
        )));
    }
    let m = min_cost_matching(&CostOracle::euclidean(pair)?, MatchingKind::Injection)?;
    Ok((m.cost.as_real(), m))
}

/// Squared EMD: minimum total squared distance of a perfect matching, exact.
pub fn sqemd<V: Vector>(pair: &PointSetPair<V>) -> Result<(i128, Matching)> {
    if pair.left().len() != pair.right().len() {
        return Err(Error::shape(format!(
            "SQEMD needs equal sides, got {} and {}",
            pair.left().len(),
            pair.right().len()
        )));
    }
    let m = min_cost_matching(&CostOracle::squared_euclidean(pair)?, MatchingKind::Bijection)?;
    Ok((m.cost.exact().expect("integer mode"), m))
}

/// A maximum-cardinality matching; `pairs` is sorted by left id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CardinalityMatching {
    pub pairs: Vec<(usize, usize)>,
    pub right_of_left: Vec<Option<usize>>,
}

impl CardinalityMatching {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }
}

/// Hopcroft–Karp on the bipartite graph `left i` to `right j` for
/// `j ∈ adjacency[i]`.
pub fn max_cardinality_matching(adjacency: &[Vec<usize>], right_count: usize) -> CardinalityMatching {
    const NIL: usize = usize::MAX;
    let n = adjacency.len();
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; right_count];
    let mut dist = vec![usize::MAX; n];

    let bfs = |match_l: &[usize], match_r: &[usize], dist: &mut [usize]| -> bool {
        let mut queue = VecDeque::new();
        for i in 0..n {
            if match_l[i] == NIL {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        let mut reachable_free = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adjacency[i] {
                let k = match_r[j];
                if k == NIL {
                    reachable_free = true;
                } else if dist[k] == usize::MAX {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        reachable_free
    };

    fn dfs(
        i: usize,
        adjacency: &[Vec<usize>],
        match_l: &mut [usize],
        match_r: &mut [usize],
        dist: &mut [usize],
        next_edge: &mut [usize],
    ) -> bool {
        while next_edge[i] < adjacency[i].len() {
            let j = adjacency[i][next_edge[i]];
            next_edge[i] += 1;
            let k = match_r[j];
            let ok = k == usize::MAX
                || (dist[k] == dist[i] + 1 && dfs(k, adjacency, match_l, match_r, dist, next_edge));
            if ok {
                match_l[i] = j;
                match_r[j] = i;
                return true;
            }
        }
        dist[i] = usize::MAX;
        false
    }

    let mut next_edge = vec![0usize; n];
    while bfs(&match_l, &match_r, &mut dist) {
        next_edge.iter_mut().for_each(|e| *e = 0);
        for i in 0..n {
            if match_l[i] == NIL {
                dfs(i, adjacency, &mut match_l, &mut match_r, &mut dist, &mut next_edge);
            }
        }
    }

    let right_of_left: Vec<Option<usize>> =
        match_l.iter().map(|&j| (j != NIL).then_some(j)).collect();
    let pairs = right_of_left
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect();
    CardinalityMatching {
        pairs,
        right_of_left,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::IntVector;

    fn points(rows: &[&[i128]]) -> Vec<IntVector> {
        rows.iter().map(|r| IntVector::new(r.to_vec())).collect()
    }

    fn pair(left: &[&[i128]], right: &[&[i128]]) -> PointSetPair<IntVector> {
        let dim = left.first().or(right.first()).unwrap().len();
        PointSetPair::new(dim, points(left), points(right)).unwrap()
    }

    #[test]
    fn explicit_two_by_two() {
        let o = CostOracle::explicit(vec![vec![1, 3], vec![2, 6]]).unwrap();
        let m = min_cost_matching(&o, MatchingKind::Bijection).unwrap();
        assert_eq!(m.cost, Cost::Exact(5));
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);
        let b = brute_force_min_matching(&o, MatchingKind::Bijection).unwrap();
        assert_eq!(b, m);
    }

    #[test]
    fn identical_sets_cost_zero() {
        let p = pair(&[&[1, 2], &[5, 5], &[0, 3]], &[&[5, 5], &[0, 3], &[1, 2]]);
        let (c, m) = emd(&p).unwrap();
        assert_eq!(c, Real::ZERO);
        assert_eq!(m.pairs, vec![(0, 2), (1, 0), (2, 1)]);
        assert_eq!(sqemd(&p).unwrap().0, 0);
        assert_eq!(asymmetric_emd(&p).unwrap().0, Real::ZERO);
    }

    #[test]
    fn injection_example() {
        let p = pair(&[&[0, 0]], &[&[3, 4], &[0, 1]]);
        let (c, m) = asymmetric_emd(&p).unwrap();
        assert_eq!(c, Real::ONE);
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.kind, MatchingKind::Injection);
    }

    #[test]
    fn equidistant_injection() {
        let p = pair(&[&[0, 0]], &[&[5, 0], &[0, 5], &[3, 4]]);
        let (c, m) = asymmetric_emd(&p).unwrap();
        assert_eq!(c, Real::from_f64(5.0));
        assert_eq!(m.pairs.len(), 1);
    }

    #[test]
    fn emd_examples() {
        assert_eq!(emd(&pair(&[&[0, 0]], &[&[3, 4]])).unwrap().0, Real::from_f64(5.0));
        let p = pair(&[&[0, 0], &[10, 0]], &[&[1, 0], &[9, 0]]);
        let (c, m) = emd(&p).unwrap();
        assert_eq!(c, Real::from_f64(2.0));
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn sqemd_examples() {
        assert_eq!(sqemd(&pair(&[&[0, 0]], &[&[3, 4]])).unwrap().0, 25);
        assert_eq!(sqemd(&pair(&[&[0], &[4]], &[&[1], &[2]])).unwrap().0, 5);
    }

    #[test]
    fn shape_errors() {
        let p = pair(&[&[0], &[1]], &[&[1]]);
        assert!(matches!(emd(&p), Err(Error::Shape(_))));
        assert!(matches!(asymmetric_emd(&p), Err(Error::Shape(_))));
        assert!(matches!(sqemd(&p), Err(Error::Shape(_))));
        let empty = PointSetPair::<IntVector>::new(1, vec![], vec![]).unwrap();
        assert!(matches!(emd(&empty), Err(Error::Shape(_))));
        assert!(CostOracle::explicit(vec![vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn brute_force_caps() {
        let o = CostOracle::explicit(vec![vec![0; 10]; 10]).unwrap();
        assert!(matches!(
            brute_force_min_matching(&o, MatchingKind::Bijection),
            Err(Error::Capacity(_))
        ));
        let o = CostOracle::explicit(vec![vec![7]]).unwrap();
        let m = brute_force_min_matching(&o, MatchingKind::Bijection).unwrap();
        assert_eq!(m.pairs, vec![(0, 0)]);
        assert_eq!(m.cost, Cost::Exact(7));
    }

    #[test]
    fn ties_resolve_lexicographically() {
        // every bijection costs the same; the identity is lexicographically first
        let o = CostOracle::explicit(vec![vec![1; 4]; 4]).unwrap();
        let m = min_cost_matching(&o, MatchingKind::Bijection).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        // two optimal injections; the smaller column for row 0 must win
        let o = CostOracle::explicit(vec![vec![5, 1, 1], vec![1, 9, 9]]).unwrap();
        let m = min_cost_matching(&o, MatchingKind::Injection).unwrap();
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn factorized_oracle_matches_explicit() {
        // [[1,3],[2,6]] = [1,2]ᵀ·[1,3]
        let o = CostOracle::factorized(vec![vec![1], vec![2]], vec![vec![1], vec![3]]).unwrap();
        let m = min_cost_matching(&o, MatchingKind::Bijection).unwrap();
        assert_eq!(m.cost, Cost::Exact(5));
    }

    #[test]
    fn hopcroft_karp_examples() {
        let complete = vec![vec![0, 1], vec![0, 1]];
        assert_eq!(max_cardinality_matching(&complete, 2).size(), 2);
        let empty: Vec<Vec<usize>> = vec![vec![], vec![]];
        assert_eq!(max_cardinality_matching(&empty, 3).size(), 0);
        let star = vec![vec![0, 1, 2, 3], vec![], vec![]];
        assert_eq!(max_cardinality_matching(&star, 4).size(), 1);
        // needs an augmenting path through a matched vertex
        let g = vec![vec![0, 1], vec![0]];
        let m = max_cardinality_matching(&g, 2);
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn matching_json_round_trip() {
        let m = Matching {
            pairs: vec![(0, 1), (1, 0)],
            cost: Cost::Exact(5),
            kind: MatchingKind::Bijection,
        };
        let s = m.to_json();
        assert_eq!(s, r#"{"cost":"5","pairs":[[0,1],[1,0]],"kind":"bijection"}"#);
        assert_eq!(Matching::from_json(&s).unwrap(), m);
        let p = pair(&[&[0, 0]], &[&[1, 1]]);
        let (_, m) = emd(&p).unwrap();
        let back = Matching::from_json(&m.to_json()).unwrap();
        assert!(back.cost.as_real().approx_eq(m.cost.as_real(), 1e-28, 1e-28));
    }

    #[test]
    fn validate_catches_bad_matchings() {
        let m = Matching {
            pairs: vec![(0, 0), (1, 0)],
            cost: Cost::Exact(0),
            kind: MatchingKind::Bijection,
        };
        assert!(m.validate(2, 2).is_err());
        let m = Matching {
            pairs: vec![(0, 0)],
            cost: Cost::Exact(0),
            kind: MatchingKind::Bijection,
        };
        assert!(m.validate(2, 2).is_err());
    }

    fn same_cost(a: Cost, b: Cost) -> bool {
        match (a, b) {
            (Cost::Exact(x), Cost::Exact(y)) => x == y,
            (x, y) => x.as_real().approx_eq(y.as_real(), 1e-12, 1.0),
        }
    }

    #[test]
    fn constant_rows_take_leftover_columns() {
        // zero vectors are at distance 2 from every weight-4 vector
        let p = pair(
            &[&[0, 0, 0, 0], &[1, 1, 0, 0], &[0, 0, 0, 0]],
            &[&[1, 1, 1, 1], &[2, 0, 0, 0], &[1, 1, 0, 0]],
        );
        let o = CostOracle::euclidean(&p).unwrap();
        let m = min_cost_matching(&o, MatchingKind::Bijection).unwrap();
        let b = brute_force_min_matching(&o, MatchingKind::Bijection).unwrap();
        assert!(same_cost(m.cost, b.cost));
        assert_eq!(m.target_of(1), Some(2));
        m.validate(3, 3).unwrap();
    }

    proptest::proptest! {
        #[test]
        fn hungarian_matches_brute_force(
            left in proptest::collection::vec(proptest::collection::vec(0i128..10, 2), 1..=6),
            extra in proptest::collection::vec(proptest::collection::vec(0i128..10, 2), 0..=2),
            constant in 0usize..3,
        ) {
            let mut right: Vec<Vec<i128>> = left.iter().rev().map(|v| vec![v[1], v[0]]).collect();
            right.extend(extra.iter().cloned());
            let mut left = left;
            for _ in 0..constant.min(right.len() - left.len()) {
                left.push(vec![0, 0]);
            }
            let to_pts = |vs: &[Vec<i128>]| vs.iter().map(|v| IntVector::new(v.clone())).collect::<Vec<_>>();
            let p = PointSetPair::new(2, to_pts(&left), to_pts(&right)).unwrap();
            let kind = if left.len() == right.len() { MatchingKind::Bijection } else { MatchingKind::Injection };
            for o in [CostOracle::euclidean(&p).unwrap(), CostOracle::squared_euclidean(&p).unwrap()] {
                let fast = min_cost_matching(&o, kind).unwrap();
                let slow = brute_force_min_matching(&o, kind).unwrap();
                fast.validate(left.len(), right.len()).unwrap();
                proptest::prop_assert!(same_cost(fast.cost, slow.cost), "{} vs {}", fast.cost, slow.cost);
                if !o.is_metric() {
                    // both report the lexicographically smallest optimum
                    proptest::prop_assert_eq!(&fast.pairs, &slow.pairs);
                }
            }
        }
    }
}
