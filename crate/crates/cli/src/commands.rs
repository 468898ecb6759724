use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_rational::Rational64;

use emd_reductions::exact::{
    build_exact_reduction, build_lowrank_assignment, recover_closest_pair, recover_closest_pair_sq, ExactConstants,
    NMode,
};
use emd_reductions::gadgets::{
    build_mom_gadget, decode_mom, decode_symmetrized, mom_to_ov, symmetrize, AsymmetricEmdMom, MomGadget, MomLayout,
    MomSolver, SymmetrizeLayout, SymmetrizedInstance,
};
use emd_reductions::generate::{generate, Family, GeneratorSpec};
use emd_reductions::matching::{
    asymmetric_emd, brute_force_min_matching, emd, min_cost_matching, sqemd, CostOracle, MatchingKind,
};
use emd_reductions::ov::{
    find_ov_oracle, find_ov_sampling, hitting_set_phased, hs_oracle, hs_via_promise_findov, mom_oracle, ov_oracle,
    ov_via_promise_findov, FindOvConfig, HsPhaseTrace, HsVerdict, MomOracle, OracleFindOv, SamplingFindOv,
    SamplingTrace, ScanPromiseFindOv, DEFAULT_BRUTE_FORCE_FLOOR,
};
use emd_reductions::pipeline::{pipeline_hs_via_emd, EmdMomSolver, PipelineConfig, PIPELINE_DEFAULT_FLOOR};
use emd_reductions::seed::derive_seed;
use emd_reductions::verify::{find_check, verify as run_verify, VerificationReport, CHECKS};
use emd_reductions::{BinaryVector, Cost, Error, Instance, Matching, PointSetPair, Real, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{
    Algo, BenchArgs, DecodeArgs, DecodeKind, ExactReduceArgs, Format, GadgetReduceArgs, GenArgs, LayoutDecodeArgs,
    Mode, MomBackend, Outcome, PipelineArgs, Problem, ReduceArgs, ReduceKind, SolveArgs, Suite, VerifyArgs,
};

const DECIMALS: usize = 15;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes to `out`, or to standard output when no path is given.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict(v: &Value) {
    println!("{v}");
}

fn load(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?)
}

fn load_binary(path: &Path) -> Result<PointSetPair<BinaryVector>> {
    load(path)?.binary()
}

fn decimal(x: Real) -> String {
    x.to_decimal(DECIMALS)
}

pub fn gen(a: GenArgs) -> Result<Outcome> {
    let family: Family = a.family.parse()?;
    let spec = GeneratorSpec::new(family, a.n, a.d, a.seed).with_density(a.density);
    let inst = generate(&spec)?;
    emit(&a.out, &inst.to_json())?;
    eprintln!("emdred: generated {family} n={} d={} seed={}", a.n, a.d, a.seed);
    Ok(Outcome::Ok)
}

fn matching_problem(a: &SolveArgs, inst: &Instance) -> Result<Matching> {
    let (oracle, kind) = match (a.problem, inst) {
        (Problem::Sqemd, Instance::Binary(p)) => (CostOracle::squared_euclidean(p)?, MatchingKind::Bijection),
        (Problem::Sqemd, Instance::Integer(p)) => (CostOracle::squared_euclidean(p)?, MatchingKind::Bijection),
        (_, Instance::Binary(p)) => (CostOracle::euclidean(p)?, kind_of(a.problem)),
        (_, Instance::Integer(p)) => (CostOracle::euclidean(p)?, kind_of(a.problem)),
    };
    match a.algo {
        Algo::Oracle => {
            // the wrappers carry the shape checks of each problem
            Ok(match (a.problem, inst) {
                (Problem::Emd, Instance::Binary(p)) => emd(p)?.1,
                (Problem::Emd, Instance::Integer(p)) => emd(p)?.1,
                (Problem::AsymEmd, Instance::Binary(p)) => asymmetric_emd(p)?.1,
                (Problem::AsymEmd, Instance::Integer(p)) => asymmetric_emd(p)?.1,
                (Problem::Sqemd, Instance::Binary(p)) => sqemd(p)?.1,
                (Problem::Sqemd, Instance::Integer(p)) => sqemd(p)?.1,
                _ => min_cost_matching(&oracle, kind)?,
            })
        }
        Algo::BruteForce => brute_force_min_matching(&oracle, kind),
        other => Err(unsupported(a.problem, other)),
    }
}

fn kind_of(p: Problem) -> MatchingKind {
    if p == Problem::AsymEmd {
        MatchingKind::Injection
    } else {
        MatchingKind::Bijection
    }
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn unsupported(p: Problem, algo: Algo) -> Error {
    Error::parameter(format!("--algo {} does not apply to {}", value_name(&algo), value_name(&p)))
}

fn sampling_trace_csv(t: &SamplingTrace) -> String {
    let rows = [
        ("delegated", t.delegated as usize),
        ("step1_sample", t.step1_sample),
        ("step1_marked", t.step1_marked),
        ("step2_sample", t.step2_sample),
        ("b_large", t.b_large.len()),
        ("step2_marked", t.step2_marked),
        ("mom_left", t.mom_left.len()),
        ("mom_right", t.mom_right.len()),
        ("copies", t.copies),
        ("step3_marked", t.step3_marked),
    ];
    let mut s = String::from("field,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

fn write_trace(path: &Option<PathBuf>, csv: &str) -> Result<()> {
    match path {
        Some(p) => write(p, csv),
        None => Ok(()),
    }
}

fn verdict_name(v: HsVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

pub fn solve(a: SolveArgs) -> Result<Outcome> {
    let inst = load(&a.input)?;
    let floor = |default| a.floor.unwrap_or(default);
    match a.problem {
        Problem::Emd | Problem::AsymEmd | Problem::Sqemd => {
            let m = matching_problem(&a, &inst)?;
            eprintln!("emdred: cost {}", m.cost);
            emit(&a.out, &m.to_json())?;
        }
        Problem::Ov => {
            let pair = inst.binary()?;
            let found = match a.algo {
                Algo::Oracle => ov_oracle(&pair),
                Algo::Promise => ov_via_promise_findov(&pair, a.delta, &ScanPromiseFindOv)?,
                Algo::Emd => mom_to_ov(&pair, a.delta, &AsymmetricEmdMom)?,
                Algo::Pipeline => mom_to_ov(&pair, a.delta, &EmdMomSolver)?,
                other => return Err(unsupported(a.problem, other)),
            };
            verdict(&json!({
                "problem": "ov",
                "orthogonal": found.is_some(),
                "pair": found.map(|(i, j)| [i, j]),
            }));
        }
        Problem::Hs => {
            let pair = inst.binary()?;
            let (v, trace): (HsVerdict, Option<HsPhaseTrace>) = match a.algo {
                Algo::Oracle => (HsVerdict::from_oracle(&pair), None),
                Algo::Phased => {
                    let (v, t) = hitting_set_phased(&pair, &OracleFindOv)?;
                    (v, Some(t))
                }
                Algo::Sampling => {
                    let cfg = FindOvConfig::new(a.alpha, a.seed)?.with_floor(floor(DEFAULT_BRUTE_FORCE_FLOOR));
                    let (v, t) = match a.mom {
                        MomBackend::Oracle => hitting_set_phased(&pair, &SamplingFindOv { cfg, mom: &MomOracle })?,
                        MomBackend::Emd => hitting_set_phased(&pair, &SamplingFindOv { cfg, mom: &EmdMomSolver })?,
                    };
                    (v, Some(t))
                }
                Algo::Pipeline => {
                    let cfg = PipelineConfig {
                        alpha: a.alpha,
                        seed: a.seed,
                        brute_force_floor: floor(PIPELINE_DEFAULT_FLOOR),
                    };
                    let (v, t) = pipeline_hs_via_emd(&pair, &cfg)?;
                    (v, Some(t))
                }
                Algo::Promise => {
                    let (v, t) = hs_via_promise_findov(
                        &pair,
                        a.epsilon,
                        a.seed,
                        &ScanPromiseFindOv,
                        floor(DEFAULT_BRUTE_FORCE_FLOOR),
                    )?;
                    eprintln!(
                        "emdred: k={} k_block={} solver calls={} delegated={}",
                        t.k, t.k_block, t.solver_calls, t.delegated
                    );
                    (v, None)
                }
                other => return Err(unsupported(a.problem, other)),
            };
            if let Some(t) = &trace {
                write_trace(&a.trace, &t.to_csv())?;
            }
            let mut out = json!({ "problem": "hs", "verdict": verdict_name(v) });
            if a.algo == Algo::Oracle {
                out["hitting_vector"] = json!(hs_oracle(&pair));
            }
            if let Some(t) = trace {
                out["phases"] = json!(t.phases.len());
            }
            verdict(&out);
        }
        Problem::FindOv => {
            let pair = inst.binary()?;
            let result = match a.algo {
                Algo::Oracle => find_ov_oracle(&pair),
                Algo::Sampling => {
                    let cfg = FindOvConfig::new(a.alpha, a.seed)?.with_floor(floor(DEFAULT_BRUTE_FORCE_FLOOR));
                    let mom: &dyn MomSolver = match a.mom {
                        MomBackend::Oracle => &MomOracle,
                        MomBackend::Emd => &EmdMomSolver,
                    };
                    let (r, t) = find_ov_sampling(&pair, &cfg, mom)?;
                    write_trace(&a.trace, &sampling_trace_csv(&t))?;
                    r
                }
                other => return Err(unsupported(a.problem, other)),
            };
            result.verify(&pair)?;
            emit(&a.out, &serde_json::to_string(&result)?)?;
        }
        Problem::Mom => {
            let pair = inst.binary()?;
            let pairs: Vec<(usize, usize)> = match a.algo {
                Algo::Oracle => {
                    let (_, pi) = mom_oracle(&pair)?;
                    pi.into_iter()
                        .enumerate()
                        .filter(|&(i, j)| pair.left()[i].is_orthogonal(&pair.right()[j]))
                        .collect()
                }
                Algo::Emd => AsymmetricEmdMom.solve_mom(&pair)?,
                Algo::Pipeline => EmdMomSolver.solve_mom(&pair)?,
                other => return Err(unsupported(a.problem, other)),
            };
            verdict(&json!({
                "problem": "mom",
                "orthogonal_count": pairs.len(),
                "pairs": pairs.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
            }));
        }
    }
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct FactorFile<'a> {
    rank: usize,
    u: &'a [Vec<i128>],
    v: &'a [Vec<i128>],
}

fn exact_reduce(a: &ExactReduceArgs, lowrank: bool) -> Result<Outcome> {
    let input = load(&a.input)?.integer();
    let mode = match a.mode {
        Mode::Full => NMode::Full,
        Mode::Desk => NMode::Desk,
    };
    let inst = if lowrank {
        let (f, inst) = build_lowrank_assignment(&input, a.k, mode)?;
        let file = FactorFile {
            rank: f.rank,
            u: &f.u,
            v: &f.v,
        };
        emit(&a.out, &serde_json::to_string(&file)?)?;
        inst
    } else {
        let inst = build_exact_reduction(&input, a.k, mode)?;
        emit(&a.out, &inst.pair.to_json())?;
        inst
    };
    write(&a.constants, &format!("{}\n", inst.constants().to_json()))?;
    eprintln!(
        "emdred: n={} lifted d={} c={} N={} R²={}",
        inst.n, inst.d, inst.c, inst.big_n, inst.adj_norm_sq
    );
    Ok(Outcome::Ok)
}

fn gadget_reduce(a: &GadgetReduceArgs, mom: bool) -> Result<Outcome> {
    let pair = load_binary(&a.input)?;
    let (reduced, layout) = if mom {
        let g = build_mom_gadget(&pair)?;
        (g.pair, serde_json::to_string(&g.layout)?)
    } else {
        let s = symmetrize(&pair)?;
        (s.pair, serde_json::to_string(&s.layout)?)
    };
    emit(&a.out, &reduced.to_json())?;
    write(&a.layout, &format!("{layout}\n"))?;
    Ok(Outcome::Ok)
}

pub fn reduce(a: ReduceArgs) -> Result<Outcome> {
    match &a.kind {
        ReduceKind::ExactEmd(x) => exact_reduce(x, false),
        ReduceKind::Lowrank(x) => exact_reduce(x, true),
        ReduceKind::MomGadget(x) => gadget_reduce(x, true),
        ReduceKind::Symmetrize(x) => gadget_reduce(x, false),
    }
}

fn decode_layout(a: &LayoutDecodeArgs, mom: bool) -> Result<Outcome> {
    let pair = load_binary(&a.input)?;
    let layout = read(&a.layout)?;
    let m = Matching::from_json(&read(&a.matching)?)?;
    if mom {
        let layout: MomLayout = serde_json::from_str(&layout)?;
        let g = MomGadget::from_parts(pair, layout)?;
        let d = decode_mom(&g, &m)?;
        let report = json!({
            "orthogonal_count": d.orthogonal_count,
            "pairs": d.orthogonal_pairs.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
            "assignment": d.assignment,
        });
        if let Some(p) = &a.out {
            write(p, &format!("{report}\n"))?;
        }
        verdict(&report);
    } else {
        let layout: SymmetrizeLayout = serde_json::from_str(&layout)?;
        let inst = SymmetrizedInstance::from_parts(pair, layout)?;
        let d = decode_symmetrized(&inst, &m)?;
        if let Some(p) = &a.out {
            write(p, &format!("{}\n", d.projected.to_json()))?;
        }
        verdict(&json!({
            "total": decimal(d.check.total),
            "expected": decimal(d.check.expected),
            "relative_deviation": d.check.relative_deviation,
            "projected_cost": d.projected.cost.to_string(),
            "projected_pairs": d.projected.pairs.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome::Ok)
}

pub fn decode(a: DecodeArgs) -> Result<Outcome> {
    match &a.kind {
        DecodeKind::Symmetrized(x) => decode_layout(x, false),
        DecodeKind::Mom(x) => decode_layout(x, true),
        DecodeKind::ExactEmd(x) => {
            let consts = ExactConstants::from_json(&read(&x.constants)?)?;
            let m = Matching::from_json(&read(&x.matching)?)?;
            let report = match m.cost {
                Cost::Metric(v) => {
                    let lifted = recover_closest_pair(v, &consts)?;
                    json!({
                        "lifted_distance": decimal(lifted),
                        "distance": decimal(lifted / Real::from_i128(2)),
                    })
                }
                Cost::Exact(c) => {
                    let lifted = recover_closest_pair_sq(c, &consts)?;
                    if lifted % 4 != 0 {
                        return Err(Error::inconsistency(format!("lifted squared distance {lifted} is not a multiple of 4")));
                    }
                    json!({
                        "lifted_sq_distance": lifted.to_string(),
                        "sq_distance": (lifted / 4).to_string(),
                    })
                }
            };
            verdict(&report);
            Ok(Outcome::Ok)
        }
    }
}

pub fn verify(a: VerifyArgs) -> Result<Outcome> {
    if a.list {
        for c in CHECKS {
            println!("{}\t{}\t{}", c.name, c.default_trials, c.about);
        }
        return Ok(Outcome::Ok);
    }
    let names: Vec<&str> = if a.checks.iter().any(|c| c == "all") {
        CHECKS.iter().map(|c| c.name).collect()
    } else {
        a.checks.iter().map(String::as_str).collect()
    };
    let checks = names.iter().map(|n| find_check(n)).collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::with_capacity(checks.len());
    for c in checks {
        let trials = a.trials.unwrap_or(c.default_trials);
        let r = run_verify(c.name, trials, a.seed)?;
        eprintln!(
            "emdred: {} {} trials, {} failures, {:.2}s",
            r.check,
            r.instances,
            r.failures.len(),
            r.runtime.as_secs_f64()
        );
        for f in &r.failures {
            eprintln!("emdred:   trial {} seed {}: {}", f.trial, f.seed, f.detail);
        }
        reports.push(r);
    }
    let text = match a.format {
        Format::Csv => VerificationReport::to_csv(&reports, a.timing),
        Format::Json => {
            let v: Vec<Value> = reports.iter().map(|r| r.to_json_value(a.timing)).collect();
            serde_json::to_string(&v)?
        }
    };
    emit(&a.out, &text)?;
    Ok(if reports.iter().all(VerificationReport::passed) {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

pub fn pipeline(a: PipelineArgs) -> Result<Outcome> {
    let pair = load_binary(&a.input)?;
    let cfg = PipelineConfig {
        alpha: a.alpha,
        seed: a.seed,
        brute_force_floor: a.floor.unwrap_or(PIPELINE_DEFAULT_FLOOR),
    };
    let (v, trace) = pipeline_hs_via_emd(&pair, &cfg)?;
    write_trace(&a.trace, &trace.to_csv())?;
    let oracle = HsVerdict::from_oracle(&pair);
    let agrees = v == oracle;
    verdict(&json!({
        "verdict": verdict_name(v),
        "oracle": verdict_name(oracle),
        "agrees": agrees,
        "phases": trace.phases.len(),
    }));
    if !agrees {
        eprintln!("emdred: pipeline verdict contradicts the oracle");
        return Ok(Outcome::Failed);
    }
    Ok(Outcome::Ok)
}

struct BenchRow {
    n: usize,
    trial: u64,
    seed: u64,
    result: String,
    seconds: f64,
}

fn bench_one(suite: Suite, n: usize, d: usize, seed: u64) -> Result<String> {
    Ok(match suite {
        Suite::Matching => {
            let spec = GeneratorSpec::new(Family::ClusteredInteger { bound: 1000 }, n, d, seed);
            let (cost, _) = emd(&generate(&spec)?.integer())?;
            decimal(cost)
        }
        Suite::FindOv => {
            let spec = GeneratorSpec::new(Family::PlantedOrthogonal { count: n / 8 }, n, d, seed);
            let pair = generate(&spec)?.binary()?;
            let cfg = FindOvConfig::new(Rational64::new(1, 2), seed)?;
            let (r, _) = find_ov_sampling(&pair, &cfg, &MomOracle)?;
            r.found.len().to_string()
        }
        Suite::Phased => {
            let spec = GeneratorSpec::new(Family::UniformBinary, n, d, seed);
            let (v, _) = hitting_set_phased(&generate(&spec)?.binary()?, &OracleFindOv)?;
            verdict_name(v).as_str().unwrap_or_default().to_string()
        }
        Suite::Pipeline => {
            let spec = GeneratorSpec::new(Family::UniformBinary, n, d, seed);
            let (v, _) = pipeline_hs_via_emd(&generate(&spec)?.binary()?, &PipelineConfig::new(seed))?;
            verdict_name(v).as_str().unwrap_or_default().to_string()
        }
    })
}

pub fn bench(a: BenchArgs) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &n in &a.sizes {
        for t in 0..a.trials {
            let seed = derive_seed(derive_seed(a.seed, n as u64), t);
            let start = Instant::now();
            let result = bench_one(a.suite, n, a.d, seed)?;
            let seconds = start.elapsed().as_secs_f64();
            eprintln!("emdred: n={n} trial={t} {seconds:.4}s");
            rows.push(BenchRow { n, trial: t, seed, result, seconds });
        }
    }
    let suite = value_name(&a.suite);
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("suite,n,d,trial,seed,result,seconds\n");
            for r in &rows {
                s.push_str(&format!(
                    "{suite},{},{},{},{},{},{:.6}\n",
                    r.n, a.d, r.trial, r.seed, r.result, r.seconds
                ));
            }
            s
        }
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "suite": suite, "n": r.n, "d": a.d, "trial": r.trial,
                        "seed": r.seed, "result": r.result, "seconds": r.seconds,
                    })
                })
                .collect();
            serde_json::to_string(&v)?
        }
    };
    emit(&a.out, &text)?;
    Ok(Outcome::Ok)
}
