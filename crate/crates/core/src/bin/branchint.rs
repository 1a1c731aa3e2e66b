use std::path::PathBuf;
use std::process::ExitCode;

use branchint::cli::{parse_alpha, run_batch, Overrides};
use branchint::Error;
use clap::Parser;

/// Evaluate and continue degenerate-series matrix elements from JSON job files.
#[derive(Debug, Parser)]
#[command(name = "branchint", version)]
struct Args {
    /// Job file; repeat for a batch.
    #[arg(long = "job", required = true)]
    jobs: Vec<PathBuf>,
    /// Output directory. Batches write one subdirectory per job.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the cycle resolution.
    #[arg(long)]
    resolution: Option<usize>,
    /// Override alpha, as `re` or `re,im`.
    #[arg(long, value_parser = parse_alpha, allow_hyphen_values = true)]
    alpha: Option<[f64; 2]>,
    /// Seed for the sampling-based checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for a batch.
    #[arg(long = "jobs", default_value_t = 1)]
    workers: usize,
}

fn report(job: &PathBuf, err: &Error) {
    eprintln!("error: {}: {err}", job.display());
    if let Error::Isotopy { clearance_trace, .. } = err {
        if !clearance_trace.is_empty() {
            let tail: Vec<String> = clearance_trace
                .iter()
                .rev()
                .take(8)
                .rev()
                .map(|c| format!("{c:.3e}"))
                .collect();
            eprintln!("  last clearances: {}", tail.join(" "));
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        resolution: args.resolution,
        alpha: args.alpha,
        seed: args.seed,
    };
    let results = run_batch(&args.jobs, &args.out, &overrides, args.workers);
    let mut code = 0;
    for (job, result) in args.jobs.iter().zip(&results) {
        if let Err(err) = result {
            report(job, err);
            if code == 0 {
                code = err.exit_code();
            }
        }
    }
    ExitCode::from(code as u8)
}
