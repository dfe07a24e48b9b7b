use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use duff_cli::data::{ingest_csv, ColumnRef, Distribution};
use duff_cli::experiment::{run_experiment_detailed, DataSource, ExperimentConfig};
use duff_cli::output::{estimates_path, write_csv, write_estimates};
use duff_core::{
    cauchy_quantile_radius, corollary_radius, duff_median, em_error_bound,
    sublevel_growth_constant, GridLlnStrategy, MechanismKind, OutputRange, Prepared, PrivacyParams,
    RngStream, SensitivityProfile, StatisticKind,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "duff",
    version,
    about = "Differentially private statistics with the Duff utility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Release one private estimate from a data file.
    Estimate(EstimateArgs),
    /// Monte-Carlo error benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Error bounds for the exponential mechanism on a data file.
    Bound(BoundArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Synthetic N(0,1), U(0,1) or Beta(0.5,0.5) datasets.
    Synthetic(SyntheticArgs),
    /// A column of a data file, one dataset per class.
    Real(RealArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// 0-based column index or header name.
    #[arg(long)]
    column: ColumnRef,
    #[arg(long)]
    class_column: Option<ColumnRef>,
    #[arg(long, requires = "class_column")]
    class_value: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    lower: f64,
    #[arg(long, allow_negative_numbers = true)]
    upper: f64,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, default_value = "median")]
    stat: StatisticKind,
    #[arg(long, default_value = "duff")]
    mechanism: MechanismKind,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "duff,ss-pure,ss-approx,laplace-ln"
    )]
    mechanisms: Vec<MechanismKind>,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SyntheticArgs {
    #[arg(long)]
    dist: Distribution,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    datasets: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.5,1,2")]
    epsilons: Vec<f64>,
    /// Override the default range ([-10, 10] for normal, [0, 1] otherwise).
    #[arg(long, allow_negative_numbers = true, requires = "upper")]
    lower: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "lower")]
    upper: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RealArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    epsilon: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    eta: f64,
    /// Sublevel growth constant C with λ(H_t) >= C t; measured from the data by default.
    #[arg(long)]
    constant: Option<f64>,
    /// Deviations at which to evaluate the tail bound; defaults to fractions of the range width.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
}

/// Continuous `[lower, upper]`, or the integers in it for the mode.
fn range_for(stat: StatisticKind, lower: f64, upper: f64) -> Result<OutputRange> {
    if stat != StatisticKind::Mode {
        return Ok(OutputRange::continuous(lower, upper)?);
    }
    let (lo, hi) = (lower.ceil() as i64, upper.floor() as i64);
    if hi < lo || hi - lo > 1_000_000 {
        bail!("the mode needs between 1 and 10^6 integer labels in [{lower}, {upper}]");
    }
    Ok(OutputRange::finite((lo..=hi).map(|v| v as f64))?)
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let range = range_for(args.stat, args.input.lower, args.input.upper)?;
    let s = ingest_csv(
        &args.input.input,
        &args.input.column,
        args.input.class_column.as_ref(),
        args.input.class_value.as_deref(),
        range,
    )?;
    let privacy = PrivacyParams::new(args.epsilon, args.delta)?;
    let prepared = Prepared::new(
        &s,
        args.stat,
        args.mechanism,
        privacy,
        &GridLlnStrategy::default(),
    )?;
    let released = prepared.release(&mut RngStream::new(args.seed))?;
    let line = json!({
        "statistic": args.stat,
        "mechanism": released.mechanism,
        "estimate": released.value,
        "n": s.len(),
        "params_used": released.params_used,
        "seed": released.seed_trace,
    });
    println!("{line}");
    Ok(())
}

fn run(config: ExperimentConfig, run: &RunArgs, with_estimates: bool) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.threads)
        .build()?;
    let output = pool.install(|| run_experiment_detailed(&config, with_estimates))?;
    write_csv(&output.records, &run.out)?;
    log::info!(
        "wrote {} records to {}",
        output.records.len(),
        run.out.display()
    );
    if with_estimates {
        let path = estimates_path(&run.out);
        write_estimates(&output.estimates, &path)?;
        log::info!(
            "wrote {} estimates to {}",
            output.estimates.len(),
            path.display()
        );
    }
    Ok(())
}

fn bench_synthetic(args: SyntheticArgs) -> Result<()> {
    let range = match (args.lower, args.upper) {
        (Some(lo), Some(hi)) => OutputRange::continuous(lo, hi)?,
        _ => args.dist.default_range(),
    };
    let config = ExperimentConfig {
        statistic: StatisticKind::Median,
        mechanisms: args.run.mechanisms.clone(),
        epsilons: args.epsilons,
        delta: args.run.delta,
        source: DataSource::Synthetic {
            dist: args.dist,
            n: args.n,
            datasets: args.datasets,
        },
        range,
        trials: args.run.trials,
        seed: args.run.seed,
    };
    run(config, &args.run, false)
}

fn bench_real(args: RealArgs) -> Result<()> {
    let config = ExperimentConfig {
        statistic: StatisticKind::Median,
        mechanisms: args.run.mechanisms.clone(),
        epsilons: vec![args.epsilon],
        delta: args.run.delta,
        source: DataSource::File {
            path: args.input.input,
            column: args.input.column,
            class_column: args.input.class_column,
            class_value: args.input.class_value,
        },
        range: OutputRange::continuous(args.input.lower, args.input.upper)?,
        trials: args.run.trials,
        seed: args.run.seed,
    };
    run(config, &args.run, true)
}

fn bound(args: BoundArgs) -> Result<()> {
    let range = OutputRange::continuous(args.input.lower, args.input.upper)?;
    let width = args.input.upper - args.input.lower;
    let s = ingest_csv(
        &args.input.input,
        &args.input.column,
        args.input.class_column.as_ref(),
        args.input.class_value.as_deref(),
        range,
    )?;
    let u = duff_median(&s)?;
    let ts = args.t.unwrap_or_else(|| {
        [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2]
            .iter()
            .map(|f| f * width)
            .collect()
    });
    let samples = ts
        .iter()
        .map(|t| {
            let b = em_error_bound(&s, &u, args.epsilon, *t).with_context(|| format!("bound at t = {t}"))?;
            Ok(json!({ "t": t, "bound": b.bound, "gamma": b.gamma, "beta": b.beta.beta, "vacuous": b.vacuous }))
        })
        .collect::<Result<Vec<_>>>()?;
    let c = args
        .constant
        .unwrap_or_else(|| sublevel_growth_constant(&u, (s.len() / 2) as u32));
    let radius = corollary_radius(width, args.epsilon, args.eta, c, &s)?;
    let ab = args.epsilon / 6.0;
    let pure_scale = SensitivityProfile::median(&s).smooth(ab) / ab;
    let line = json!({
        "n": s.len(),
        "epsilon": args.epsilon,
        "eta": args.eta,
        "tail_bounds": samples,
        "constant": c,
        "corollary_radius": radius,
        "ss_pure_radius": cauchy_quantile_radius(pure_scale, args.eta)?,
    });
    println!("{line}");
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Estimate(a) => estimate(a),
        Command::Bench(BenchCommand::Synthetic(a)) => bench_synthetic(a),
        Command::Bench(BenchCommand::Real(a)) => bench_real(a),
        Command::Bound(a) => bound(a),
    }
}
