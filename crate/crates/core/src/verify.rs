//! Named invariant suites run over seeded random trials.
//!
//! Trial `t` of a run with seed `s` draws everything from
//! `derive_seed(s, t)`, which is recorded with every failure so a single
//! trial can be replayed with [`verify_trial`].

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::{build_exact_reduction, build_lowrank_assignment, recover_closest_pair, recover_closest_pair_sq, NMode};
use crate::gadgets::{build_mom_gadget, decode_mom, negate_product, symmetrize, Side};
use crate::generate::{generate, Family, GeneratorSpec};
use crate::matching::{
    asymmetric_emd, brute_force_min_matching, emd, max_cardinality_matching, min_cost_matching, sqemd, Cost,
    CostOracle, MatchingKind,
};
use crate::ov::{
    find_ov_oracle, find_ov_sampling, hitting_set_phased, hs_oracle, hs_via_promise_findov, mom_oracle,
    ov_oracle, ov_via_promise_findov, FindOvConfig, HsVerdict, MomOracle, OracleFindOv, ScanPromiseFindOv,
};
use crate::pipeline::{pipeline_hs_via_emd, PipelineConfig};
use crate::ratio::{ceil_log2, ceil_pow, ceil_scaled_pow};
use crate::seed::{derive_seed, stage_rng, Rng as StageRng};
use crate::squares::{decompose_squares, parts_bound};
use crate::vectors::{duplicate, BinaryVector, IntVector, PointSetPair, Vector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialFailure {
    pub trial: u64,
    pub seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub check: String,
    pub instances: u64,
    pub failures: Vec<TrialFailure>,
    pub max_deviation: f64,
    pub runtime: Duration,
    /// Per-check tallies, e.g. how many trials took each branch.
    pub counters: BTreeMap<String, u64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn counter(&self, name: &str) -> u64 {
        self.counters.get(name).copied().unwrap_or(0)
    }

    pub fn csv_header(timing: bool) -> &'static str {
        if timing {
            "check,instances,failures,max_deviation,failure_seeds,runtime_s"
        } else {
            "check,instances,failures,max_deviation,failure_seeds"
        }
    }

    /// One CSV row. Runtime is left out unless asked for so that repeated
    /// runs produce identical bytes.
    pub fn csv_row(&self, timing: bool) -> String {
        let seeds: Vec<String> = self.failures.iter().map(|f| f.seed.to_string()).collect();
        let mut row = format!(
            "{},{},{},{:e},{}",
            self.check,
            self.instances,
            self.failures.len(),
            self.max_deviation,
            seeds.join(";")
        );
        if timing {
            row.push_str(&format!(",{:.3}", self.runtime.as_secs_f64()));
        }
        row
    }

    pub fn to_csv(reports: &[VerificationReport], timing: bool) -> String {
        let mut out = String::from(Self::csv_header(timing));
        out.push('\n');
        for r in reports {
            out.push_str(&r.csv_row(timing));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self, timing: bool) -> serde_json::Value {
        let mut v = json!({
            "check": self.check,
            "instances": self.instances,
            "failures": self.failures.iter().map(|f| json!({
                "trial": f.trial,
                "seed": f.seed,
                "detail": f.detail,
            })).collect::<Vec<_>>(),
            "max_deviation": self.max_deviation,
            "counters": self.counters,
        });
        if timing {
            v["runtime_s"] = json!(self.runtime.as_secs_f64());
        }
        v
    }
}

/// What one trial observed.
#[derive(Clone, Debug, Default)]
pub struct TrialOutcome {
    pub failure: Option<String>,
    pub deviation: f64,
    pub counters: Vec<(&'static str, u64)>,
}

impl TrialOutcome {
    fn ok() -> Self {
        Self::default()
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self {
            failure: Some(detail.into()),
            ..Self::default()
        }
    }

    fn count(mut self, name: &'static str, value: u64) -> Self {
        self.counters.push((name, value));
        self
    }

    fn deviation(mut self, dev: f64) -> Self {
        self.deviation = self.deviation.max(dev);
        self
    }
}

type TrialFn = fn(u64, u64) -> Result<TrialOutcome>;

pub struct Check {
    pub name: &'static str,
    pub default_trials: u64,
    pub about: &'static str,
    run: TrialFn,
}

pub static CHECKS: &[Check] = &[
    Check {
        name: "exact-reduction-identity",
        default_trials: 100,
        about: "EMD of the exact reduction recovers the closest pair; one original-original edge",
        run: exact_reduction_identity,
    },
    Check {
        name: "sqemd-lowrank-identity",
        default_trials: 100,
        about: "factorized assignment cost equals the SQEMD formula; U·Vᵀ reproduces the matrix",
        run: sqemd_lowrank_identity,
    },
    Check {
        name: "square-decomposition",
        default_trials: 1_000_000,
        about: "trial t decomposes m = t + 1 at rho = 1/16",
        run: square_decomposition,
    },
    Check {
        name: "embedding-identities",
        default_trials: 1000,
        about: "negated product, doubled distance, gadget distances and norms",
        run: embedding_identities,
    },
    Check {
        name: "mom-distance-spectrum",
        default_trials: 100,
        about: "every gadget distance is 2a·b+4d+2 or 4d+4",
        run: mom_distance_spectrum,
    },
    Check {
        name: "mom-via-emd",
        default_trials: 200,
        about: "decoded asymmetric EMD on the gadget attains the maximum orthogonal matching",
        run: mom_via_emd,
    },
    Check {
        name: "solver-oracle-equivalence",
        default_trials: 200,
        about: "Hungarian and factorial brute force agree on cost",
        run: solver_oracle_equivalence,
    },
    Check {
        name: "find-ov-sampling",
        default_trials: 100,
        about: "planted n = 256, d = 32, alpha = 1/2: sound and within the n/2 budget",
        run: find_ov_sampling_check,
    },
    Check {
        name: "find-ov-degree-bound",
        default_trials: 100,
        about: "after exact degree pruning the surviving pairs inject into 2n^alpha copies",
        run: find_ov_degree_bound,
    },
    Check {
        name: "phased-hitting-set",
        default_trials: 500,
        about: "phased hitting set with the Find-OV oracle matches the hitting-set oracle",
        run: phased_hitting_set,
    },
    Check {
        name: "promise-find-ov",
        default_trials: 400,
        about: "OV and hitting set through the (k, 2k) Find-OV solver match the oracles",
        run: promise_find_ov,
    },
    Check {
        name: "pipeline",
        default_trials: 100,
        about: "hitting set through the full EMD chain matches the oracle",
        run: pipeline_check,
    },
];

pub fn find_check(name: &str) -> Result<&'static Check> {
    CHECKS.iter().find(|c| c.name == name).ok_or_else(|| {
        let names: Vec<&str> = CHECKS.iter().map(|c| c.name).collect();
        Error::parameter(format!("unknown check {name:?}; known checks: {}", names.join(", ")))
    })
}

/// Runs one trial with an explicit trial seed.
pub fn verify_trial(check: &str, trial: u64, trial_seed: u64) -> Result<TrialOutcome> {
    (find_check(check)?.run)(trial, trial_seed)
}

/// Runs `trials` trials of `check`. Trial errors count as failures, except
/// invariant violations, which abort the run.
pub fn verify(check: &str, trials: u64, seed: u64) -> Result<VerificationReport> {
    let c = find_check(check)?;
    let start = Instant::now();
    let mut report = VerificationReport {
        check: c.name.to_string(),
        instances: trials,
        failures: Vec::new(),
        max_deviation: 0.0,
        runtime: Duration::ZERO,
        counters: BTreeMap::new(),
    };
    for t in 0..trials {
        let ts = derive_seed(seed, t);
        match (c.run)(t, ts) {
            Ok(out) => {
                report.max_deviation = report.max_deviation.max(out.deviation);
                for (k, v) in out.counters {
                    *report.counters.entry(k.to_string()).or_default() += v;
                }
                if let Some(detail) = out.failure {
                    report.failures.push(TrialFailure { trial: t, seed: ts, detail });
                }
            }
            Err(e) if matches!(e.root(), Error::Invariant(_)) => return Err(e),
            Err(e) => report.failures.push(TrialFailure {
                trial: t,
                seed: ts,
                detail: e.to_string(),
            }),
        }
    }
    report.runtime = start.elapsed();
    Ok(report)
}

fn rational(p: i64, q: i64) -> Rational64 {
    Rational64::new(p, q)
}

fn binary_instance(family: Family, n: usize, d: usize, density: Rational64, seed: u64) -> Result<PointSetPair<BinaryVector>> {
    generate(&GeneratorSpec::new(family, n, d, seed).with_density(density))?.binary()
}

const DENSITIES: [(i64, i64); 5] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)];

/// A binary instance from a family chosen by `rng`; both hitting-set
/// verdicts are common.
fn mixed_binary(rng: &mut StageRng, n: usize, d: usize, seed: u64) -> Result<(PointSetPair<BinaryVector>, &'static str)> {
    let (p, q) = DENSITIES[rng.gen_range(0..DENSITIES.len())];
    let density = rational(p, q);
    Ok(match rng.gen_range(0..4) {
        0 => (binary_instance(Family::UniformBinary, n, d, density, seed)?, "uniform"),
        1 => (binary_instance(Family::PlantedHitting, n, d, density, seed)?, "planted-hitting"),
        2 => {
            let count = rng.gen_range(1..=n);
            (
                binary_instance(Family::PlantedOrthogonal { count }, n, d, density, seed)?,
                "planted-orthogonal",
            )
        }
        _ => (binary_instance(Family::ComplementMatched, n, d, density, seed)?, "complement-matched"),
    })
}

fn random_binary(rng: &mut StageRng, d: usize) -> BinaryVector {
    let p: f64 = rng.gen_range(0.1..0.9);
    let bits: Vec<bool> = (0..d).map(|_| rng.gen_bool(p)).collect();
    BinaryVector::from_bits(&bits)
}

/// Closest-pair instance with `n ∈ [2, 10]`, `d ∈ [1, 3]`, coordinates in
/// `[0, n]`.
fn closest_pair_instance(seed: u64) -> Result<PointSetPair<IntVector>> {
    let mut rng = stage_rng(seed, 0);
    let n = rng.gen_range(2..=10usize);
    let d = rng.gen_range(1..=3usize);
    let bound = n as i128;
    let side = |rng: &mut StageRng| -> Vec<IntVector> {
        (0..n)
            .map(|_| IntVector::new((0..d).map(|_| rng.gen_range(0..=bound)).collect()))
            .collect()
    };
    let left = side(&mut rng);
    let right = side(&mut rng);
    PointSetPair::new(d, left, right)
}

fn brute_closest_sq(pair: &PointSetPair<IntVector>) -> Result<i128> {
    let mut best = i128::MAX;
    for a in pair.left() {
        for b in pair.right() {
            best = best.min(a.sq_dist_to(b)?);
        }
    }
    Ok(best)
}

fn exact_reduction_identity(_: u64, seed: u64) -> Result<TrialOutcome> {
    let input = closest_pair_instance(seed)?;
    let inst = build_exact_reduction(&input, Rational64::from_integer(1), NMode::Desk)?;
    inst.check_gaps()?;
    let consts = inst.constants();
    let (value, m) = emd(&inst.pair)?;
    let edges = inst.original_edges(&m);
    if edges != 1 {
        return Ok(TrialOutcome::fail(format!("{edges} original-original edges in the optimum")));
    }
    let got = recover_closest_pair(value, &consts)?.to_f64() / 2.0;
    let want = (brute_closest_sq(&input)? as f64).sqrt();
    let dev = (got - want).abs() / want.max(1.0);
    let out = TrialOutcome::ok().deviation(dev).count("n-max-10", (inst.n == 10) as u64);
    if dev > 1e-6 {
        return Ok(TrialOutcome::fail(format!("recovered {got}, brute force {want}")).deviation(dev));
    }
    Ok(out)
}

fn sqemd_lowrank_identity(_: u64, seed: u64) -> Result<TrialOutcome> {
    let input = closest_pair_instance(seed)?;
    let (f, inst) = build_lowrank_assignment(&input, Rational64::from_integer(1), NMode::Desk)?;
    let consts = inst.constants();
    let rank_bound = 2 * inst.d + 2 * inst.c + 4;
    if f.rank > rank_bound {
        return Ok(TrialOutcome::fail(format!("rank {} above {rank_bound}", f.rank)));
    }
    let product = f.product()?;
    for (i, a) in inst.pair.left().iter().enumerate() {
        for (j, b) in inst.pair.right().iter().enumerate() {
            if product[i][j] != a.sq_dist_to(b)? {
                return Ok(TrialOutcome::fail(format!("U·Vᵀ differs from M at ({i}, {j})")));
            }
        }
    }
    let lifted = 4 * brute_closest_sq(&input)?;
    let want = consts.sqemd_formula(lifted)?;
    let m = min_cost_matching(&f.oracle()?, MatchingKind::Bijection)?;
    let got = m.cost.exact().ok_or_else(|| Error::invariant("factorized oracle returned a metric cost"))?;
    if got != want {
        return Ok(TrialOutcome::fail(format!("assignment cost {got}, formula {want}")));
    }
    let (direct, _) = sqemd(&inst.pair)?;
    if direct != got {
        return Ok(TrialOutcome::fail(format!("SQEMD {direct} differs from factorized cost {got}")));
    }
    let recovered = recover_closest_pair_sq(got, &consts)?;
    if recovered != lifted {
        return Ok(TrialOutcome::fail(format!("recovered {recovered}, expected {lifted}")));
    }
    Ok(TrialOutcome::ok())
}

fn square_decomposition(trial: u64, _: u64) -> Result<TrialOutcome> {
    let m = trial as u128 + 1;
    let rho = rational(1, 16);
    let dec = decompose_squares(m, rho)?;
    let bound = parts_bound(rho)?;
    if dec.sum_of_squares() != Some(m) {
        return Ok(TrialOutcome::fail(format!("parts of {m} sum to {:?}", dec.sum_of_squares())));
    }
    if dec.parts.len() > bound {
        return Ok(TrialOutcome::fail(format!("{m} used {} parts, bound {bound}", dec.parts.len())));
    }
    Ok(TrialOutcome::ok().count("parts", dec.parts.len() as u64))
}

fn embedding_identities(_: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    let d = rng.gen_range(1..=64usize);
    let a = random_binary(&mut rng, d);
    let b = random_binary(&mut rng, d);
    let dot = a.and_count(&b) as i128;
    let di = d as i128;

    let phi = negate_product(&a, Side::Left).and_count(&negate_product(&b, Side::Right)) as i128;
    if phi != di - dot {
        return Ok(TrialOutcome::fail(format!("negated product {phi}, expected {}", di - dot)));
    }

    let single = PointSetPair::new(d, vec![a.clone()], vec![b.clone()])?;
    let sym = symmetrize(&single)?;
    let doubled = sym.pair.left()[0].sq_dist_to(&sym.pair.right()[0])?;
    if doubled != 2 * a.sq_dist_to(&b)? {
        return Ok(TrialOutcome::fail(format!("symmetrized distance {doubled} is not doubled")));
    }

    let g = build_mom_gadget(&single)?;
    let (ga, gb) = (&g.pair.left()[0], &g.pair.right()[0]);
    let cross = ga.sq_dist_to(gb)?;
    if cross != 2 * dot + 4 * di + 2 {
        return Ok(TrialOutcome::fail(format!("gadget distance {cross}, expected {}", 2 * dot + 4 * di + 2)));
    }
    let to_v = ga.sq_dist_to(&g.v)?;
    if to_v != 4 * di + 4 {
        return Ok(TrialOutcome::fail(format!("distance to v {to_v}, expected {}", 4 * di + 4)));
    }
    for (name, x) in [("a", ga), ("b", gb), ("v", &g.v)] {
        if x.count_ones() as i128 != 3 * di + 1 {
            return Ok(TrialOutcome::fail(format!("‖{name}‖² = {}, expected {}", x.count_ones(), 3 * di + 1)));
        }
    }
    Ok(TrialOutcome::ok().count("orthogonal", (dot == 0) as u64))
}

fn mom_distance_spectrum(_: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    let d = rng.gen_range(1..=32usize);
    let na = rng.gen_range(1..=6usize);
    let nb = rng.gen_range(na..=8usize);
    let left: Vec<BinaryVector> = (0..na).map(|_| random_binary(&mut rng, d)).collect();
    let right: Vec<BinaryVector> = (0..nb).map(|_| random_binary(&mut rng, d)).collect();
    let pair = PointSetPair::new(d, left, right)?;
    let g = build_mom_gadget(&pair)?;
    let di = d as i128;
    for (i, x) in g.pair.left().iter().enumerate() {
        for (j, y) in g.pair.right().iter().enumerate() {
            let sq = x.sq_dist_to(y)?;
            let want = match g.layout.right_parent(j) {
                Some(b) => 2 * pair.left()[i].and_count(&pair.right()[b]) as i128 + 4 * di + 2,
                None => 4 * di + 4,
            };
            if sq != want {
                return Ok(TrialOutcome::fail(format!("distance ({i}, {j}) is {sq}, expected {want}")));
            }
        }
    }
    Ok(TrialOutcome::ok())
}

fn mom_via_emd(_: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    let d = rng.gen_range(2..=8usize);
    let na = rng.gen_range(1..=8usize);
    let nb = rng.gen_range(na..=8usize);
    let left: Vec<BinaryVector> = (0..na).map(|_| random_binary(&mut rng, d)).collect();
    let right: Vec<BinaryVector> = (0..nb).map(|_| random_binary(&mut rng, d)).collect();
    let pair = PointSetPair::new(d, left, right)?;
    let g = build_mom_gadget(&pair)?;
    let (_, m) = asymmetric_emd(&g.pair)?;
    let decoded = decode_mom(&g, &m)?;
    let (opt, _) = mom_oracle(&pair)?;
    if decoded.orthogonal_count != opt {
        return Ok(TrialOutcome::fail(format!("decoded {} orthogonal pairs, optimum {opt}", decoded.orthogonal_count)));
    }
    if decoded.orthogonal_pairs.iter().any(|&(a, b)| !pair.left()[a].is_orthogonal(&pair.right()[b])) {
        return Ok(TrialOutcome::fail("decoded pair is not orthogonal"));
    }
    Ok(TrialOutcome::ok().count("optimum-sum", opt as u64))
}

fn cost_deviation(got: Cost, want: Cost) -> f64 {
    match (got, want) {
        (Cost::Exact(x), Cost::Exact(y)) => {
            if x == y {
                0.0
            } else {
                f64::INFINITY
            }
        }
        (x, y) => {
            let (x, y) = (x.as_real(), y.as_real());
            (x - y).abs().to_f64() / y.abs().to_f64().max(1.0)
        }
    }
}

fn solver_oracle_equivalence(_: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    let na = rng.gen_range(1..=7usize);
    let (nb, kind) = if rng.gen_bool(0.5) {
        (na, MatchingKind::Bijection)
    } else {
        (rng.gen_range(na..=7usize), MatchingKind::Injection)
    };
    let point = |rng: &mut StageRng| IntVector::new((0..3).map(|_| rng.gen_range(0..=20)).collect());
    let left: Vec<IntVector> = (0..na).map(|_| point(&mut rng)).collect();
    let right: Vec<IntVector> = (0..nb).map(|_| point(&mut rng)).collect();
    let pair = PointSetPair::new(3, left, right)?;
    let matrix: Vec<Vec<i128>> = (0..na).map(|_| (0..nb).map(|_| rng.gen_range(-50..=50)).collect()).collect();

    let mut dev = 0.0f64;
    for oracle in [
        CostOracle::euclidean(&pair)?,
        CostOracle::squared_euclidean(&pair)?,
        CostOracle::explicit(matrix)?,
    ] {
        let fast = min_cost_matching(&oracle, kind)?;
        let slow = brute_force_min_matching(&oracle, kind)?;
        fast.validate(na, nb)?;
        let recomputed = oracle.total(&fast.pairs)?;
        let d = cost_deviation(fast.cost, slow.cost).max(cost_deviation(recomputed, fast.cost));
        dev = dev.max(d);
        let tol = if oracle.is_metric() { 1e-12 } else { 0.0 };
        if d > tol {
            return Ok(TrialOutcome::fail(format!("Hungarian {} vs brute force {}", fast.cost, slow.cost)).deviation(d));
        }
    }
    if kind == MatchingKind::Bijection {
        let (e, _) = emd(&pair)?;
        let (s, _) = sqemd(&pair)?;
        let brute = brute_force_min_matching(&CostOracle::squared_euclidean(&pair)?, kind)?;
        if Cost::Exact(s) != brute.cost {
            return Ok(TrialOutcome::fail(format!("SQEMD {s} vs brute force {}", brute.cost)));
        }
        let brute = brute_force_min_matching(&CostOracle::euclidean(&pair)?, kind)?;
        let d = cost_deviation(Cost::Metric(e), brute.cost);
        dev = dev.max(d);
        if d > 1e-12 {
            return Ok(TrialOutcome::fail(format!("EMD {e} vs brute force {}", brute.cost)).deviation(d));
        }
    }
    Ok(TrialOutcome::ok().deviation(dev))
}

fn find_ov_sampling_check(_: u64, seed: u64) -> Result<TrialOutcome> {
    let (n, d) = (256, 32);
    let pair = binary_instance(Family::PlantedOrthogonal { count: 16 }, n, d, rational(3, 8), seed)?;
    let cfg = FindOvConfig::new(rational(1, 2), seed)?;
    let (res, trace) = find_ov_sampling(&pair, &cfg, &MomOracle)?;
    let truth = find_ov_oracle(&pair);
    if let Err(e) = res.verify(&pair) {
        return Ok(TrialOutcome::fail(format!("unsound output: {e}")));
    }
    let missed = truth.found.len() - res.found.len();
    let out = TrialOutcome::ok()
        .count("exact", (missed == 0) as u64)
        .count("missed", missed as u64)
        .count("step3-used", (!trace.mom_left.is_empty()) as u64)
        .deviation(missed as f64);
    if missed > n / 2 {
        return Ok(TrialOutcome::fail(format!("missed {missed} of {} witnesses", truth.found.len())));
    }
    Ok(out)
}

/// Steps 1 and 2 of the sampling algorithm with exact degrees in place of
/// estimates, followed by a check that the surviving left vectors with a
/// partner can all be matched into `2⌈n^α⌉` copies of the survivors in `B`.
fn find_ov_degree_bound(_: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    let n = rng.gen_range(16..=128usize);
    let d = rng.gen_range(8..=16usize);
    let (pair, _) = mixed_binary(&mut rng, n, d, seed)?;
    let alpha = rational(1, 2);
    let (left, right) = (pair.left(), pair.right());
    let orth = |i: usize, j: usize| left[i].is_orthogonal(&right[j]);

    let t1 = ceil_pow(n as u64, alpha / 2)? as usize;
    let mut a_rem: Vec<usize> = (0..n).filter(|&i| (0..n).filter(|&j| orth(i, j)).count() < t1).collect();
    let t2 = ceil_pow(n as u64, alpha)? as usize;
    let large: Vec<usize> = (0..n).filter(|&j| a_rem.iter().filter(|&&i| orth(i, j)).count() >= t2).collect();
    a_rem.retain(|&i| !large.iter().any(|&j| orth(i, j)));
    let b_rem: Vec<usize> = (0..n).filter(|j| !large.contains(j)).collect();

    let copies = 2 * ceil_scaled_pow(1, n as u64, alpha)? as usize;
    for &j in &b_rem {
        let deg = a_rem.iter().filter(|&&i| orth(i, j)).count();
        if deg > copies {
            return Ok(TrialOutcome::fail(format!("surviving b{j} has degree {deg} > {copies}")));
        }
    }
    let (dup, _) = duplicate(&b_rem, copies);
    let adjacency: Vec<Vec<usize>> = a_rem
        .iter()
        .map(|&i| (0..dup.len()).filter(|&r| orth(i, dup[r])).collect())
        .collect();
    let with_partner = adjacency.iter().filter(|adj| !adj.is_empty()).count();
    let matched = max_cardinality_matching(&adjacency, dup.len()).size();
    if matched != with_partner {
        return Ok(TrialOutcome::fail(format!("only {matched} of {with_partner} surviving pairs inject")));
    }
    Ok(TrialOutcome::ok().count("surviving-with-partner", with_partner as u64))
}

fn phased_hitting_set(_: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    let n = rng.gen_range(1..=256usize);
    let d = rng.gen_range(4..=16usize);
    let (pair, _) = mixed_binary(&mut rng, n, d, seed)?;
    let (verdict, trace) = hitting_set_phased(&pair, &OracleFindOv)?;
    let want = HsVerdict::from_oracle(&pair);
    let limit = ceil_log2(n as u64) as usize + 1;
    if trace.phases.len() > limit {
        return Ok(TrialOutcome::fail(format!("{} phases, limit {limit}", trace.phases.len())));
    }
    if verdict != want {
        return Ok(TrialOutcome::fail(format!("verdict {verdict:?}, oracle {want:?}")));
    }
    Ok(TrialOutcome::ok().count(
        if want == HsVerdict::HittingVectorExists { "hitting" } else { "none" },
        1,
    ))
}

fn promise_find_ov(trial: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    if trial.is_multiple_of(2) {
        let n = rng.gen_range(2..=128usize);
        let d = rng.gen_range(16..=24usize);
        // dense vectors rarely meet, so presence is mostly decided by the plant
        let family = if rng.gen_bool(0.5) {
            Family::PlantedOrthogonal { count: 1 }
        } else {
            Family::UniformBinary
        };
        let pair = binary_instance(family, n, d, rational(3, 4), seed)?;
        let got = ov_via_promise_findov(&pair, rational(1, 2), &ScanPromiseFindOv)?;
        let want = ov_oracle(&pair);
        if let Some((a, b)) = got {
            if !pair.left()[a].is_orthogonal(&pair.right()[b]) {
                return Ok(TrialOutcome::fail(format!("pair ({a}, {b}) is not orthogonal")));
            }
        }
        if got.is_some() != want.is_some() {
            return Ok(TrialOutcome::fail(format!("found {got:?}, oracle {want:?}")));
        }
        Ok(TrialOutcome::ok().count(if want.is_some() { "ov-yes" } else { "ov-no" }, 1))
    } else {
        let n = rng.gen_range(1..=256usize);
        let d = rng.gen_range(4..=16usize);
        let (pair, _) = mixed_binary(&mut rng, n, d, seed)?;
        let (verdict, trace) =
            hs_via_promise_findov(&pair, rational(7, 10), seed, &ScanPromiseFindOv, crate::ov::DEFAULT_BRUTE_FORCE_FLOOR)?;
        let want = HsVerdict::from_oracle(&pair);
        if verdict != want {
            return Ok(TrialOutcome::fail(format!("verdict {verdict:?}, oracle {want:?}")));
        }
        Ok(TrialOutcome::ok()
            .count(if want == HsVerdict::HittingVectorExists { "hs-hitting" } else { "hs-none" }, 1)
            .count("hs-delegated", trace.delegated as u64))
    }
}

fn pipeline_check(_: u64, seed: u64) -> Result<TrialOutcome> {
    let mut rng = stage_rng(seed, 0);
    let n = rng.gen_range(1..=64usize);
    let (pair, _) = mixed_binary(&mut rng, n, 16, seed)?;
    let (verdict, _) = pipeline_hs_via_emd(&pair, &PipelineConfig::new(seed))?;
    let want = hs_oracle(&pair);
    if (verdict == HsVerdict::HittingVectorExists) != want.is_some() {
        return Ok(TrialOutcome::fail(format!("verdict {verdict:?}, oracle {want:?}")));
    }
    Ok(TrialOutcome::ok().count(if want.is_some() { "hitting" } else { "none" }, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check_is_a_parameter_error() {
        assert!(matches!(verify("nope", 1, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn every_check_runs_a_few_trials() {
        for c in CHECKS {
            let trials = if c.name == "square-decomposition" { 2000 } else { 3 };
            let r = verify(c.name, trials, 7).unwrap();
            assert!(r.passed(), "{}: {:?}", c.name, r.failures);
            assert_eq!(r.instances, trials);
        }
    }

    #[test]
    fn reports_are_deterministic_without_timing() {
        let a = verify("mom-via-emd", 5, 3).unwrap();
        let b = verify("mom-via-emd", 5, 3).unwrap();
        let csv = VerificationReport::to_csv(&[a], false);
        assert_eq!(csv, VerificationReport::to_csv(&[b], false));
        assert!(csv.starts_with("check,instances,failures,max_deviation,failure_seeds\n"));
    }

    #[test]
    fn trials_replay_from_their_seed() {
        let r = verify("embedding-identities", 4, 11).unwrap();
        assert!(r.passed());
        let replay = verify_trial("embedding-identities", 2, derive_seed(11, 2)).unwrap();
        assert!(replay.failure.is_none());
    }

    #[test]
    fn failures_carry_seeds() {
        let r = VerificationReport {
            check: "x".into(),
            instances: 2,
            failures: vec![
                TrialFailure { trial: 0, seed: 5, detail: "a".into() },
                TrialFailure { trial: 1, seed: 9, detail: "b".into() },
            ],
            max_deviation: 0.5,
            runtime: Duration::from_millis(1500),
            counters: BTreeMap::new(),
        };
        assert_eq!(r.csv_row(false), "x,2,2,5e-1,5;9");
        assert_eq!(r.csv_row(true), "x,2,2,5e-1,5;9,1.500");
        assert!(!r.passed());
    }
}
