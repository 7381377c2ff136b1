//! `slicedw` — sliced Wasserstein distances between point-cloud files,
//! plus the cost model, benchmark harness, k advisor, and a gradient-flow
//! demo.
//!
//! Deterministic results go to stdout as key=value lines; wall-clock
//! timings go to stderr, so identical invocations produce bitwise
//! identical stdout.
//!
//! Exit codes: 2 file parse error, 3 dimension mismatch, 4 invalid
//! configuration, 1 other I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use slicedw::error::Error;
use slicedw::flow::{self, FlowConfig, FlowMethod};
use slicedw::measures::{read_csv_measure, write_csv_measure, DiscreteMeasure};
use slicedw::sliced::{recommend_k, recommend_k_vs};
use slicedw::strategy::{DistanceRequest, MethodRegistry};
use slicedw::verification::{bench, cost_model, BenchConfig, BenchRow, CostMethod};

#[derive(Parser)]
#[command(
    name = "slicedw",
    version,
    about = "Sliced Wasserstein distance toolkit"
)]
struct Cli {
    /// Worker threads for the estimators (0 = available parallelism).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two CSV point clouds.
    Distance(DistanceArgs),
    /// Particle gradient-flow demo emitting snapshots and a loss log.
    Flow(FlowArgs),
    /// Analytic compute/projection cost of an estimator configuration.
    Cost(CostArgs),
    /// Wall-clock benchmark paired with the cost model.
    Bench(BenchArgs),
    /// Largest bottleneck count k that keeps HSW cheaper than SW.
    RecommendK(RecommendKArgs),
}

#[derive(Args)]
struct DistanceArgs {
    /// One of: sw, hsw, max-sw, max-hsw, exact.
    method: String,
    file_a: PathBuf,
    file_b: PathBuf,
    /// Distance order.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Projection count (mixing directions for hsw).
    #[arg(long = "L", default_value_t = 100)]
    l: usize,
    /// Bottleneck direction count (hsw, max-hsw).
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Head count (hsw).
    #[arg(long = "H", default_value_t = 1)]
    h: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read a trailing weight column from the CSV files.
    #[arg(long)]
    weighted: bool,
    /// Ascent learning rate (max methods).
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Ascent iteration cap (max methods).
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Ascent movement tolerance (max methods).
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Ascent restarts (max methods).
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Output style: kv (default) or csv.
    #[arg(long, default_value = "kv")]
    format: String,
}

#[derive(Args)]
struct FlowArgs {
    /// Target point cloud (CSV).
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 512)]
    particles: usize,
    /// sw or hsw.
    #[arg(long, default_value = "hsw")]
    method: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long = "L", default_value_t = 128)]
    l: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long = "H", default_value_t = 1)]
    h: usize,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 0.05)]
    step_size: f64,
    #[arg(long, default_value_t = 100)]
    snapshot_every: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    weighted: bool,
    /// Directory receiving snapshot_%06d.csv and loss.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CostArgs {
    /// sw or hsw.
    method: String,
    #[arg(long)]
    d: u64,
    #[arg(long)]
    n: u64,
    #[arg(long = "L")]
    l: u64,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long = "H", default_value_t = 1)]
    h: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimator spec, repeatable: "sw:L=100" or "hsw:k=70,L=2000[,H=1]".
    #[arg(long = "config", required = true)]
    configs: Vec<String>,
}

#[derive(Args)]
struct RecommendKArgs {
    #[arg(long)]
    d: u64,
    /// SW projection count for the same-L rule k ≤ Ld/(L+d).
    #[arg(long = "L")]
    l: Option<u64>,
    /// SW projection count for the budget rule (with --l2 and --n).
    #[arg(long)]
    l1: Option<u64>,
    /// HSW final projection count for the budget rule.
    #[arg(long)]
    l2: Option<u64>,
    /// Support count for the budget rule.
    #[arg(long)]
    n: Option<u64>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 2,
        Error::DimensionMismatch { .. } => 3,
        Error::InvalidArgument(_)
        | Error::UnsupportedConfiguration(_)
        | Error::NumericalDomain(_)
        | Error::ResourceLimit(_) => 4,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(4);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: cannot configure {} threads: {e}", cli.threads);
            return ExitCode::from(4);
        }
    }

    let result = match cli.command {
        Command::Distance(args) => cmd_distance(args),
        Command::Flow(args) => cmd_flow(args),
        Command::Cost(args) => cmd_cost(args),
        Command::Bench(args) => cmd_bench(args),
        Command::RecommendK(args) => cmd_recommend_k(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn summary_stats(terms: &[f64]) -> Option<(f64, f64, f64)> {
    if terms.is_empty() {
        return None;
    }
    let n = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / n;
    let max = terms.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let var = terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    Some((mean, max, var.sqrt()))
}

fn cmd_distance(args: DistanceArgs) -> Result<(), Error> {
    let registry = MethodRegistry::default();
    let method = registry.get(&args.method)?;
    if args.format != "kv" && args.format != "csv" {
        return Err(Error::invalid(format!(
            "unknown format `{}` (expected kv or csv)",
            args.format
        )));
    }
    let mu = read_csv_measure(&args.file_a, args.weighted)?;
    let nu = read_csv_measure(&args.file_b, args.weighted)?;
    let req = DistanceRequest {
        p: args.p,
        projections: args.l,
        bottleneck: args.k,
        heads: args.h,
        seed: args.seed,
        eta: args.eta,
        iterations: args.iters,
        tolerance: args.tolerance,
        restarts: args.restarts,
    };
    let started = Instant::now();
    let report = method.compute(&mu, &nu, &req)?;
    let elapsed = started.elapsed().as_secs_f64();

    if args.format == "csv" {
        println!("method,p,L,k,H,seed,value");
        println!(
            "{},{},{},{},{},{},{}",
            args.method,
            args.p,
            args.l,
            args.k,
            args.h,
            args.seed,
            fmt17(report.value)
        );
    } else {
        println!("command=distance");
        println!("method={}", args.method);
        println!("file_a={}", args.file_a.display());
        println!("file_b={}", args.file_b.display());
        println!("p={}", args.p);
        println!("L={}", args.l);
        println!("k={}", args.k);
        println!("H={}", args.h);
        println!("seed={}", args.seed);
        println!("value={}", fmt17(report.value));
        if let Some((mean, max, std)) = summary_stats(&report.per_projection) {
            println!("proj_count={}", report.per_projection.len());
            println!("proj_mean={}", fmt17(mean));
            println!("proj_max={}", fmt17(max));
            println!("proj_std={}", fmt17(std));
        }
        for (key, value) in &report.details {
            println!("{key}={value}");
        }
        println!("version={}", env!("CARGO_PKG_VERSION"));
    }
    eprintln!("elapsed_seconds={elapsed:.6}");
    Ok(())
}

fn cmd_flow(args: FlowArgs) -> Result<(), Error> {
    let method = match args.method.as_str() {
        "sw" => FlowMethod::Sw,
        "hsw" => FlowMethod::Hsw,
        other => {
            return Err(Error::invalid(format!(
                "flow method must be sw or hsw, got `{other}`"
            )))
        }
    };
    let target = read_csv_measure(&args.target, args.weighted)?;
    let cfg = FlowConfig {
        method,
        p: args.p,
        projections: args.l,
        bottleneck: args.k,
        heads: args.h,
        particles: args.particles,
        steps: args.steps,
        step_size: args.step_size,
        snapshot_every: args.snapshot_every,
        seed: args.seed,
    };
    let started = Instant::now();
    let record = flow::run(&target, &cfg)?;
    let elapsed = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out_dir)?;
    let mut loss_csv = String::from("step,loss\n");
    for (step, loss) in &record.losses {
        loss_csv.push_str(&format!("{step},{}\n", fmt17(*loss)));
    }
    std::fs::write(args.out_dir.join("loss.csv"), loss_csv)?;
    for (step, particles) in &record.snapshots {
        let m = DiscreteMeasure::uniform(particles.clone())?;
        write_csv_measure(
            args.out_dir.join(format!("snapshot_{step:06}.csv")),
            &m,
            false,
        )?;
    }

    println!("command=flow");
    println!("method={}", args.method);
    println!("target={}", args.target.display());
    println!("particles={}", args.particles);
    println!("steps={}", args.steps);
    println!("step_size={}", args.step_size);
    println!("L={}", args.l);
    println!("k={}", args.k);
    println!("H={}", args.h);
    println!("seed={}", args.seed);
    println!("initial_loss={}", fmt17(record.losses.first().unwrap().1));
    println!("final_loss={}", fmt17(record.losses.last().unwrap().1));
    println!("snapshots={}", record.snapshots.len());
    println!("out_dir={}", args.out_dir.display());
    println!("version={}", env!("CARGO_PKG_VERSION"));
    eprintln!("elapsed_seconds={elapsed:.6}");
    Ok(())
}

fn cmd_cost(args: CostArgs) -> Result<(), Error> {
    let (method, k, h) = match args.method.as_str() {
        "sw" => (CostMethod::Sw, None, None),
        "hsw" => (CostMethod::Hsw, args.k, Some(args.h)),
        other => {
            return Err(Error::invalid(format!(
                "cost method must be sw or hsw, got `{other}`"
            )))
        }
    };
    let report = cost_model(method, args.d, args.n, args.l, k, h)?;
    println!("command=cost");
    println!("method={}", report.method.name());
    println!("d={}", report.d);
    println!("n={}", report.n);
    println!("L={}", report.l);
    if let Some(k) = report.k {
        println!("k={k}");
    }
    if let Some(h) = report.h {
        println!("H={h}");
    }
    println!("compute_units={}", report.compute_units);
    println!("projection_units={}", report.projection_units);
    println!("compute_millions={:.2}", report.compute_units as f64 / 1e6);
    println!(
        "projection_millions={:.2}",
        report.projection_units as f64 / 1e6
    );
    Ok(())
}

fn parse_bench_config(spec: &str) -> Result<BenchConfig, Error> {
    let bad = || Error::invalid(format!("cannot parse bench config `{spec}`"));
    let (method, rest) = spec.split_once(':').ok_or_else(bad)?;
    let mut l: Option<u64> = None;
    let mut k: Option<u64> = None;
    let mut h: u64 = 1;
    for part in rest.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(bad)?;
        let value: u64 = value.trim().parse().map_err(|_| bad())?;
        match key.trim() {
            "L" => l = Some(value),
            "k" => k = Some(value),
            "H" => h = value,
            _ => return Err(bad()),
        }
    }
    let l = l.ok_or_else(bad)?;
    match method.trim() {
        "sw" => Ok(BenchConfig::Sw { l }),
        "hsw" => {
            let k = k.ok_or_else(bad)?;
            Ok(BenchConfig::Hsw { k, l, h })
        }
        _ => Err(bad()),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let configs: Vec<BenchConfig> = args
        .configs
        .iter()
        .map(|s| parse_bench_config(s))
        .collect::<Result<_, _>>()?;
    let rows = bench(&configs, args.d, args.n, args.repeats, args.p, args.seed)?;
    println!("{}", BenchRow::csv_header());
    for row in &rows {
        println!("{}", row.to_csv_row());
    }
    Ok(())
}

fn cmd_recommend_k(args: RecommendKArgs) -> Result<(), Error> {
    match (args.l, args.l1, args.l2, args.n) {
        (Some(l), None, None, None) => {
            let k = recommend_k(args.d, l);
            println!("command=recommend-k");
            println!("d={}", args.d);
            println!("L={l}");
            println!("k={k}");
            if k == 0 {
                eprintln!("warning: no admissible k (bound below 1)");
            }
            Ok(())
        }
        (None, Some(l1), Some(l2), Some(n)) => {
            if l2 < l1 {
                return Err(Error::invalid("the budget rule requires L2 ≥ L1"));
            }
            let k = recommend_k_vs(args.d, l1, l2, n);
            println!("command=recommend-k");
            println!("d={}", args.d);
            println!("L1={l1}");
            println!("L2={l2}");
            println!("n={n}");
            println!("k={k}");
            if k == 0 {
                eprintln!("warning: no admissible k (bound below 1)");
            }
            Ok(())
        }
        _ => Err(Error::invalid(
            "pass either --L (same-L rule) or all of --l1 --l2 --n (budget rule)",
        )),
    }
}
