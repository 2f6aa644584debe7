//! Command line front end: solve an instance file (or a generated one),
//! dump the approximate curve, verify against an exact oracle, or sweep the
//! scaling grids and emit CSV.

use std::fs;
use std::io::{self, Read as _, Write as _};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stepknap::instance::{self, Family, GeneratorSpec, Instance};
use stepknap::oracle::{
    brute_force_curve, default_grid, exact_profit_dp, measure_error, ExactCurve,
};
use stepknap::{solve, Config, Item, MonotoneStepFn, SolveStats};

/// Caller-visible exit code for a failed verification, distinct from the
/// usage/guard code so scripts can tell "measured out of bounds" apart from
/// "could not measure".
const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "stepknap", version, about = "Approximate 0-1 knapsack solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and print the approximate optimum.
    Solve(SolveArgs),
    /// Solve an instance and dump the whole profit curve.
    Curve(SolveArgs),
    /// Solve, then measure the gap against an exact oracle.
    Verify(VerifyArgs),
    /// Sweep the epsilon and size grids and emit CSV timings.
    Bench(BenchArgs),
    /// Generate an instance file to stdout.
    Generate(GenArgs),
}

/// Where the items come from: a file (`-` for stdin) or a seeded generator.
#[derive(Args)]
struct InputArgs {
    /// Instance file; omit it to generate one instead.
    file: Option<String>,
    /// Generator family when no file is given.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Item count for the generator.
    #[arg(short = 'n', long, default_value_t = 1000)]
    n: usize,
    /// Largest generated weight.
    #[arg(long, default_value_t = 1000)]
    max_weight: u64,
    /// Largest generated profit.
    #[arg(long, default_value_t = 1000)]
    max_profit: u64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolverArgs {
    /// Target relative gap; the guaranteed (snapped) value is printed.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Frame half-width multiplier.
    #[arg(long, default_value_t = 2)]
    cstar: u32,
    /// Logarithm base in the frame half-width formula.
    #[arg(long, default_value_t = 2.0)]
    log_base: f64,
    /// Re-check structural invariants while solving.
    #[arg(long)]
    debug_invariants: bool,
    /// Solve profit classes one at a time instead of on the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Exact reference: brute enumeration, profit DP, or whichever fits.
    #[arg(long, value_enum, default_value_t = OracleArg::Auto)]
    oracle: OracleArg,
}

#[derive(Args)]
struct BenchArgs {
    /// Which sweep to run.
    #[arg(long, value_enum, default_value_t = GridArg::Both)]
    grid: GridArg,
    /// Generator family for the sweep instances.
    #[arg(long, value_enum, default_value_t = FamilyArg::Uniform)]
    family: FamilyArg,
    /// Generator seed.
    #[arg(long, default_value_t = 909)]
    seed: u64,
    /// Epsilon for the size sweep.
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Item count for the epsilon sweep.
    #[arg(short = 'n', long, default_value_t = 10_000)]
    n: usize,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Uniform)]
    family: FamilyArg,
    #[arg(short = 'n', long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    max_weight: u64,
    #[arg(long, default_value_t = 1000)]
    max_profit: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Uniform,
    WeaklyCorrelated,
    StronglyCorrelated,
    EqualProfit,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Uniform => Family::Uniform,
            FamilyArg::WeaklyCorrelated => Family::WeaklyCorrelated,
            FamilyArg::StronglyCorrelated => Family::StronglyCorrelated,
            FamilyArg::EqualProfit => Family::EqualProfit,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OracleArg {
    Auto,
    Brute,
    Dp,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum GridArg {
    Eps,
    N,
    Both,
}

fn load_instance(input: &InputArgs) -> Result<Instance> {
    if let Some(path) = &input.file {
        let text = if path == "-" {
            let mut buf = String::new();
            io::stdin()
                .read_to_string(&mut buf)
                .context("reading stdin")?;
            buf
        } else {
            fs::read_to_string(path).with_context(|| format!("reading {path}"))?
        };
        return Ok(instance::parse(&text)?);
    }
    let Some(family) = input.family else {
        bail!("no instance file given and no --family to generate one");
    };
    Ok(instance::generate(&GeneratorSpec {
        family: family.into(),
        n: input.n,
        max_weight: input.max_weight,
        max_profit: input.max_profit,
        seed: input.seed,
    }))
}

fn to_items(inst: &Instance) -> Vec<Item> {
    inst.items
        .iter()
        .enumerate()
        .map(|(id, &(weight, profit))| Item {
            weight,
            profit,
            id,
        })
        .collect()
}

fn config(s: &SolverArgs) -> Config {
    Config {
        eps: s.eps,
        cstar: s.cstar,
        log_base: s.log_base,
        parallel: !s.sequential,
        debug_invariants: s.debug_invariants,
        ..Config::default()
    }
}

fn run_solve(args: &SolveArgs) -> Result<(MonotoneStepFn, SolveStats, Instance)> {
    let inst = load_instance(&args.input)?;
    let items = to_items(&inst);
    let (curve, stats) = solve(&items, inst.t, &config(&args.solver))?;
    Ok((curve, stats, inst))
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let (curve, stats, inst) = run_solve(args)?;
    println!("value={}", curve.eval0(inst.t));
    println!("eps={}", stats.eps_snapped);
    Ok(())
}

fn cmd_curve(args: &SolveArgs) -> Result<()> {
    let (curve, _, _) = run_solve(args)?;
    let stdout = io::stdout();
    curve.dump(&mut stdout.lock())?;
    Ok(())
}

fn exact_reference(choice: OracleArg, inst: &Instance) -> Result<ExactCurve> {
    match choice {
        OracleArg::Brute => Ok(brute_force_curve(&inst.items, inst.t)?),
        OracleArg::Dp => Ok(exact_profit_dp(&inst.items, inst.t)?),
        OracleArg::Auto => brute_force_curve(&inst.items, inst.t)
            .or_else(|_| exact_profit_dp(&inst.items, inst.t))
            .context("no oracle fits this instance; both guards tripped"),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let inst = load_instance(&args.input)?;
    let items = to_items(&inst);
    let (curve, stats) = solve(&items, inst.t, &config(&args.solver))?;
    let exact = exact_reference(args.oracle, &inst)?;
    let report = measure_error(&curve, &exact, &default_grid(&exact, inst.t));
    let bound = (stats.eps_snapped * exact.curve.eval0(inst.t) as f64).floor() as i64;
    println!("{report} bound={bound} eps={}", stats.eps_snapped);
    if report.violation || report.max_gap > bound {
        return Ok(EXIT_VIOLATION);
    }
    Ok(0)
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den.max(f64::EPSILON)
}

fn timed_solve(items: &[Item], t: u64, cfg: &Config) -> Result<(u128, SolveStats)> {
    // One warmup, then the median of three, to keep the fitted slopes from
    // chasing allocator noise.
    solve(items, t, cfg)?;
    let mut runs = Vec::with_capacity(3);
    for _ in 0..3 {
        let start = Instant::now();
        let (_, s) = solve(items, t, cfg)?;
        runs.push((start.elapsed().as_nanos(), s));
    }
    runs.sort_unstable_by_key(|r| r.0);
    let (nanos, stats) = runs.swap_remove(1);
    Ok((nanos, stats))
}

fn csv_rows(out: &mut impl io::Write, n: usize, eps: f64, total: u128, st: &SolveStats) -> Result<()> {
    let phases = [
        ("preprocess", st.preprocess_nanos),
        ("classes", st.classes_nanos),
        ("merge", st.merge_nanos),
        ("total", total),
    ];
    for (phase, nanos) in phases {
        writeln!(
            out,
            "{n},{eps},{phase},{nanos},{}",
            st.peak_breakpoints
        )?;
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let cfg_for = |eps: f64| Config {
        eps,
        parallel: !args.sequential,
        ..Config::default()
    };
    writeln!(out, "n,eps,phase,wall_nanos,peak_breakpoints")?;

    if args.grid != GridArg::N {
        let inst = instance::generate(&GeneratorSpec {
            family: args.family.into(),
            n: args.n,
            max_weight: 1000,
            max_profit: 1000,
            seed: args.seed,
        });
        let items = to_items(&inst);
        let eps_grid = [0.1, 0.05, 0.025, 0.0125];
        let mut totals = Vec::new();
        for &eps in &eps_grid {
            let (total, stats) = timed_solve(&items, inst.t, &cfg_for(eps))?;
            csv_rows(&mut out, args.n, eps, total, &stats)?;
            totals.push(total as f64);
        }
        let inv: Vec<f64> = eps_grid.iter().map(|e| 1.0 / e).collect();
        writeln!(out, "# slope eps-sweep total {:.2}", log_log_slope(&inv, &totals))?;
    }

    if args.grid != GridArg::Eps {
        let n_grid = [1_000usize, 10_000, 100_000];
        let mut totals = Vec::new();
        for &n in &n_grid {
            let inst = instance::generate(&GeneratorSpec {
                family: args.family.into(),
                n,
                max_weight: 1000,
                max_profit: 1000,
                seed: args.seed.wrapping_add(1),
            });
            let items = to_items(&inst);
            let (total, stats) = timed_solve(&items, inst.t, &cfg_for(args.eps))?;
            csv_rows(&mut out, n, args.eps, total, &stats)?;
            totals.push(total as f64);
        }
        let ns: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
        writeln!(out, "# slope n-sweep total {:.2}", log_log_slope(&ns, &totals))?;
    }
    Ok(())
}

fn cmd_generate(args: &GenArgs) -> Result<()> {
    let inst = instance::generate(&GeneratorSpec {
        family: args.family.into(),
        n: args.n,
        max_weight: args.max_weight,
        max_profit: args.max_profit,
        seed: args.seed,
    });
    print!("{}", instance::emit(&inst));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Solve(a) => cmd_solve(a).map(|()| 0),
        Cmd::Curve(a) => cmd_curve(a).map(|()| 0),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a).map(|()| 0),
        Cmd::Generate(a) => cmd_generate(a).map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
