//! `histotest`: seeded experiment harness for the histogram tester.

#![forbid(unsafe_code)]

mod config;
mod error;
mod instance;
mod runner;

use clap::{Args, Parser, Subcommand};
use config::{resolve, Overrides};
use error::{CliError, CliResult};
use histotest_core::hard::generate_hard_pair_with;
use histotest_core::rng::RngStream;
use instance::hard_contamination;
use runner::{parse_sweep, print_summary, run_bench, run_experiment};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "histotest",
    version,
    about = "Sample-based testing of piecewise-constant structure in discrete distributions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run accept/reject trials of the k-histogram tester.
    Test(RunArgs),
    /// Select a piece count by doubling search.
    SelectK(RunArgs),
    /// Sweep one parameter and report per-value sample costs.
    Bench(BenchArgs),
    /// Generate one moment-matched hard instance pair as JSON.
    GenHard(GenHardArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file; flags given here win over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Domain size.
    #[arg(long)]
    n: Option<usize>,
    /// Piece count under test.
    #[arg(long)]
    k: Option<usize>,
    /// Accuracy parameter in (0, 1).
    #[arg(long)]
    eps: Option<f64>,
    /// Failure probability for selection, in (0, 1].
    #[arg(long)]
    delta: Option<f64>,
    /// Number of independent trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; trial t runs with seed XOR t.
    #[arg(long)]
    seed: Option<u64>,
    /// uniform | random-khist | zigzag | hard-yes | hard-no | file
    #[arg(long)]
    instance: Option<String>,
    /// Path for instance=file: newline-separated non-negative decimals.
    #[arg(long)]
    instance_file: Option<PathBuf>,
    /// Worker threads for parallel trials.
    #[arg(long)]
    jobs: Option<usize>,
    /// Zigzag block count (default 4k).
    #[arg(long)]
    blocks: Option<usize>,
    /// Sieve budget constant.
    #[arg(long)]
    c_sieve: Option<f64>,
    /// Identity-test budget constant.
    #[arg(long)]
    c_test: Option<f64>,
    /// Suspect-mass probe constant.
    #[arg(long)]
    c_mass: Option<f64>,
    /// Hard-instance degree multiplier.
    #[arg(long)]
    little_c: Option<f64>,
    /// Hard-instance scale divisor.
    #[arg(long)]
    big_c: Option<f64>,
    /// Selection amplification multiplier.
    #[arg(long)]
    amp: Option<f64>,
    /// Refine the selected piece count by linear scan.
    #[arg(long)]
    refine: bool,
    /// CSV report path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON report path (rows plus resolved config).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Sweep declaration, e.g. eps=0.4,0.3,0.2 (also: n=..., k=...).
    #[arg(long)]
    sweep: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GenHardArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Contamination weight in (0, 1/10].
    #[arg(long)]
    eps: f64,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    little_c: Option<f64>,
    #[arg(long)]
    big_c: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            k: self.k,
            eps: self.eps,
            delta: self.delta,
            trials: self.trials,
            seed: self.seed,
            instance: self.instance.clone(),
            instance_file: self
                .instance_file
                .as_ref()
                .map(|p| p.display().to_string()),
            jobs: self.jobs,
            blocks: self.blocks,
            c_sieve: self.c_sieve,
            c_test: self.c_test,
            c_mass: self.c_mass,
            little_c: self.little_c,
            big_c: self.big_c,
            amp: self.amp,
            refine: if self.refine { Some(true) } else { None },
        }
    }
}

fn run_mode(mode: &str, args: &CommonArgs) -> CliResult<()> {
    let cfg = resolve(mode, args.config.as_deref(), &args.overrides())?;
    let rows = run_experiment(&cfg, args.csv.as_deref(), args.json.as_deref())?;
    print_summary(&cfg, &rows, &mut std::io::stdout());
    Ok(())
}

fn run_bench_mode(args: &BenchArgs) -> CliResult<()> {
    let (param, values) = parse_sweep(&args.sweep)?;
    let cfg = resolve("test", args.common.config.as_deref(), &args.common.overrides())?;
    let (_rows, points) = run_bench(
        &cfg,
        &param,
        &values,
        args.common.csv.as_deref(),
        args.common.json.as_deref(),
    )?;
    println!("bench: n={} k={} sweeping {}", cfg.n, cfg.k, param);
    for p in &points {
        println!(
            "{}={}: accept rate {:.3}, mean samples {:.0}",
            p.param, p.value, p.accept_rate, p.mean_samples_total
        );
    }
    Ok(())
}

fn run_gen_hard(args: &GenHardArgs) -> CliResult<()> {
    if !(args.eps > 0.0 && args.eps <= 0.1) {
        return Err(CliError::usage(format!(
            "gen-hard eps must lie in (0, 1/10], got {}",
            args.eps
        )));
    }
    let mut rng = RngStream::new(args.seed.unwrap_or(1));
    let pair = generate_hard_pair_with(
        args.n,
        args.k,
        hard_contamination(args.eps),
        args.little_c.unwrap_or(histotest_core::hard::DEFAULT_LITTLE_C),
        args.big_c.unwrap_or(histotest_core::hard::DEFAULT_BIG_C),
        &mut rng,
    )?;
    let doc = serde_json::json!({
        "schema_version": runner::SCHEMA_VERSION,
        "n": args.n,
        "k": args.k,
        "eps": pair.eps,
        "H": pair.h.as_slice(),
        "H_prime": pair.h_prime.as_slice(),
        "diagnostics": pair.diagnostics,
    });
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::runtime(format!("cannot serialize hard pair: {}", e)))?;
    text.push('\n');
    std::fs::write(&args.out, text)?;
    println!(
        "wrote hard pair n={} k={} eps={} to {}",
        args.n,
        args.k,
        pair.eps,
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are "errors" to the parser but
            // successful exits for the user.
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match &cli.cmd {
        Cmd::Test(args) => run_mode("test", &args.common),
        Cmd::SelectK(args) => run_mode("select-k", &args.common),
        Cmd::Bench(args) => run_bench_mode(args),
        Cmd::GenHard(args) => run_gen_hard(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
