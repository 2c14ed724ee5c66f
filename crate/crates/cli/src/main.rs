use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ucp_cli::{run, Experiment, Overrides, RunConfig, EXIT_ERROR};

/// Reproducible uncertainty-product experiments.
#[derive(Parser)]
#[command(name = "ucp", version)]
struct Cli {
    /// constants | verify | scaling | inverse | degenerate | disconnected | n2check
    experiment: String,
    /// TOML run configuration; every section is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's output_dir, else out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn fail(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(EXIT_ERROR as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail("--threads must be >= 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(e);
        }
    }
    let experiment: Experiment = match cli.experiment.parse() {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    let cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => return fail(e),
        },
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
    };
    match run(experiment, cfg, &overrides) {
        Ok(summary) => {
            for name in &summary.failed {
                match name.strip_prefix("condition_").and_then(|r| r.split_once('_')) {
                    Some((k, what)) => println!("admissibility: fails condition {k} ({what})"),
                    None => println!("verdict failed: {name}"),
                }
            }
            println!(
                "run {} {} -> {}",
                summary.run_id,
                if summary.passed { "passed" } else { "failed" },
                summary.out_dir.display()
            );
            ExitCode::from(summary.exit_code as u8)
        }
        Err(e) => fail(e),
    }
}
