//! `emdred`: generate instances, run reductions and solvers, decode
//! solutions and run the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure or inconsistent input,
//! 2 usage error, 3 internal invariant violation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use emd_reductions::ratio::parse_rational;
use emd_reductions::Error;
use num_rational::Rational64;

#[derive(Parser, Debug)]
#[command(name = "emdred", version, about = "Reductions between geometric matching and Boolean vector problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Solve an instance.
    Solve(SolveArgs),
    /// Build a reduced instance plus its sidecar.
    Reduce(ReduceArgs),
    /// Map a solution of a reduced instance back.
    Decode(DecodeArgs),
    /// Run named invariant suites over seeded trials.
    Verify(VerifyArgs),
    /// Hitting set through the full EMD chain, checked against the oracle.
    Pipeline(PipelineArgs),
    /// Time solvers over generated instances.
    Bench(BenchArgs),
}

fn rational(s: &str) -> Result<Rational64, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct GenArgs {
    /// uniform-binary, planted-orthogonal:<count>, planted-hitting,
    /// clustered-integer:<bound> or complement-matched.
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1/2", value_parser = rational)]
    density: Rational64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Problem {
    Emd,
    AsymEmd,
    Sqemd,
    Ov,
    Hs,
    FindOv,
    Mom,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Algo {
    /// Exact solver (Hungarian) or brute-force oracle, depending on the problem.
    Oracle,
    /// Factorial enumeration, matching problems only.
    BruteForce,
    /// Sampling Find-OV.
    Sampling,
    /// Phased hitting set with the Find-OV oracle.
    Phased,
    /// The (k, 2k) Find-OV reductions.
    Promise,
    /// Through the MOM gadget and asymmetric EMD.
    Emd,
    /// Through the MOM gadget, symmetrization and EMD.
    Pipeline,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MomBackend {
    Oracle,
    Emd,
}

#[derive(Args, Debug)]
struct SolveArgs {
    problem: Problem,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Oracle)]
    algo: Algo,
    #[arg(long, default_value = "1/2", value_parser = rational)]
    alpha: Rational64,
    #[arg(long, default_value = "1/2", value_parser = rational)]
    delta: Rational64,
    #[arg(long, default_value = "7/10", value_parser = rational)]
    epsilon: Rational64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances with at most this many right vectors go to the oracle.
    #[arg(long)]
    floor: Option<usize>,
    /// MOM solver behind sampling Find-OV.
    #[arg(long, value_enum, default_value_t = MomBackend::Oracle)]
    mom: MomBackend,
    /// CSV trace of the phases or sampling steps.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[command(subcommand)]
    kind: ReduceKind,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// `N = ⌈n^{16k}⌉`.
    #[value(alias = "paper")]
    Full,
    /// Smallest power of two that keeps the distance gaps.
    Desk,
}

#[derive(Args, Debug)]
struct ExactReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "1", value_parser = rational)]
    k: Rational64,
    #[arg(long, value_enum, default_value_t = Mode::Desk)]
    mode: Mode,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the reduction constants.
    #[arg(long)]
    constants: PathBuf,
}

#[derive(Args, Debug)]
struct GadgetReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the layout.
    #[arg(long)]
    layout: PathBuf,
}

#[derive(Subcommand, Debug)]
enum ReduceKind {
    /// Closest pair to EMD.
    ExactEmd(ExactReduceArgs),
    /// Closest pair to a rank-bounded assignment; writes the factors.
    Lowrank(ExactReduceArgs),
    /// Maximum orthogonal matching to asymmetric EMD.
    MomGadget(GadgetReduceArgs),
    /// Asymmetric EMD to EMD on binary vectors.
    Symmetrize(GadgetReduceArgs),
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[command(subcommand)]
    kind: DecodeKind,
}

#[derive(Args, Debug)]
struct LayoutDecodeArgs {
    /// The reduced instance.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    layout: PathBuf,
    #[arg(long)]
    matching: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExactDecodeArgs {
    #[arg(long)]
    constants: PathBuf,
    #[arg(long)]
    matching: PathBuf,
}

#[derive(Subcommand, Debug)]
enum DecodeKind {
    /// Project an EMD matching of a symmetrized instance.
    Symmetrized(LayoutDecodeArgs),
    /// Turn an asymmetric EMD matching of a gadget into orthogonal pairs.
    Mom(LayoutDecodeArgs),
    /// Closest-pair distance from an EMD or SQEMD matching cost.
    ExactEmd(ExactDecodeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Check names, or `all`.
    #[arg(long = "check", default_value = "all")]
    checks: Vec<String>,
    /// Trials per check; each check has its own default.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Add a runtime column.
    #[arg(long)]
    timing: bool,
    /// List the checks and exit.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1/2", value_parser = rational)]
    alpha: Rational64,
    #[arg(long)]
    floor: Option<usize>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    /// Hungarian EMD on clustered integer points.
    Matching,
    /// Sampling Find-OV with the exact MOM backend.
    FindOv,
    /// Phased hitting set with the Find-OV oracle.
    Phased,
    /// The full EMD pipeline.
    Pipeline,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a run ended, beyond success.
enum Outcome {
    Ok,
    /// A verification or oracle comparison failed.
    Failed,
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Invariant(_) => 3,
        Error::Inconsistency(_) | Error::PromiseViolation(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Reduce(a) => commands::reduce(a),
        Command::Decode(a) => commands::decode(a),
        Command::Verify(a) => commands::verify(a),
        Command::Pipeline(a) => commands::pipeline(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("emdred: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
