//! Benchmark CLI: seeded experiment grids over the four counterfactual
//! estimators, with CSV tables and SVG scatter plots as output.

mod experiments;
mod records;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use experiments::AnyResult;
use records::BenchRecord;

#[derive(Parser)]
#[command(name = "bench-cli", version, about = "Counterfactual estimator benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one synthetic dataset quad as CSV files.
    Gen {
        #[arg(long, default_value = "bivariate-gamma")]
        family: String,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// Illustrative 2D runs for both latent families with scatter figures.
    Illustrative {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[arg(long)]
        metric_subsample: Option<usize>,
    },
    /// Accuracy/runtime against sample size with d fixed at 2.
    BenchN {
        #[arg(long, default_value = "bivariate-gamma")]
        family: String,
        #[arg(long, value_delimiter = ',', default_values_t = [500usize, 1000, 2000, 5000])]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 30.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[arg(long)]
        metric_subsample: Option<usize>,
    },
    /// Accuracy/runtime against dimension with n fixed.
    BenchD {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5, 10, 20, 50, 100])]
        d_list: Vec<usize>,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 30.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[arg(long)]
        metric_subsample: Option<usize>,
    },
    /// ROT against the direction count k, plus the ascent variant.
    BenchK {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 100])]
        d_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 50, 100, 200, 500])]
        k_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [50usize, 100, 500])]
        ascent_iters: Vec<usize>,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[arg(long)]
        metric_subsample: Option<usize>,
    },
    /// Sinkhorn regularization sweep over the n- and d-grids.
    LambdaSweep {
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, 30.0, 90.0])]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [500usize, 1000, 2000, 5000])]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5, 10, 20, 50, 100])]
        d_list: Vec<usize>,
        #[arg(long, default_value_t = 5000)]
        n_for_d: usize,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[arg(long)]
        metric_subsample: Option<usize>,
    },
    /// Card-Krueger FT/PT analysis against the OT reference.
    Ck {
        /// Normalized Card-Krueger CSV (see README for the schema).
        #[arg(long)]
        ck: PathBuf,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> AnyResult<()> {
    let mut records: Vec<BenchRecord> = Vec::new();
    let out = match &cli.command {
        Command::Gen { out, .. }
        | Command::Illustrative { out, .. }
        | Command::BenchN { out, .. }
        | Command::BenchD { out, .. }
        | Command::BenchK { out, .. }
        | Command::LambdaSweep { out, .. }
        | Command::Ck { out, .. } => out.clone(),
    };
    std::fs::create_dir_all(&out)?;

    match cli.command {
        Command::Gen {
            family,
            n,
            d,
            seed,
            out,
        } => {
            experiments::run_gen(&family, n, d, seed, &out)?;
            return Ok(());
        }
        Command::Illustrative {
            n,
            seeds,
            k,
            seed,
            out,
            metric_subsample,
        } => experiments::run_illustrative(n, seeds, k, seed, metric_subsample, &out, &mut records)?,
        Command::BenchN {
            family,
            n_list,
            seeds,
            k,
            lambda,
            seed,
            metric_subsample,
            ..
        } => experiments::run_varying_n(
            &family,
            &n_list,
            seeds,
            k,
            lambda,
            seed,
            metric_subsample,
            &mut records,
        )?,
        Command::BenchD {
            d_list,
            n,
            seeds,
            k,
            lambda,
            seed,
            metric_subsample,
            ..
        } => experiments::run_varying_d(
            &d_list,
            n,
            seeds,
            k,
            lambda,
            seed,
            metric_subsample,
            &mut records,
        )?,
        Command::BenchK {
            d_list,
            k_list,
            ascent_iters,
            n,
            runs,
            seed,
            metric_subsample,
            ..
        } => experiments::run_varying_k(
            &d_list,
            &k_list,
            &ascent_iters,
            n,
            runs,
            seed,
            metric_subsample,
            &mut records,
        )?,
        Command::LambdaSweep {
            lambdas,
            n_list,
            d_list,
            n_for_d,
            seeds,
            k,
            seed,
            metric_subsample,
            ..
        } => experiments::run_lambda_sweep(
            &lambdas,
            &n_list,
            &d_list,
            n_for_d,
            seeds,
            k,
            seed,
            metric_subsample,
            &mut records,
        )?,
        Command::Ck {
            ck,
            runs,
            k,
            seed,
            out,
        } => experiments::run_ck(&ck, runs, k, seed, &out, &mut records)?,
    }

    records::write_records(&out.join("records.csv"), &records)?;
    records::write_summary(&out.join("summary.csv"), &records)?;
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
