//! Batch experiment runner.
//!
//! Exit codes: 0 success, 1 audit violation, 2 config error, 3 numerical
//! blow-up in a required cell.

use clap::{Args, Parser, Subcommand};
use mvlab::experiments::ExperimentKind;
use mvlab::experiments::{run_experiment, wasserstein_between_snapshots, ExperimentConfig};
use mvlab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mvlab",
    version,
    about = "Mean-field particle systems, spectral SPDE solvers and empirical Wasserstein tooling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// experiment config (TOML)
    #[arg(long, env = "MVLAB_CONFIG")]
    config: PathBuf,
    /// override the master seed from the config
    #[arg(long, env = "MVLAB_SEED")]
    seed: Option<u64>,
    /// override the output directory from the config
    #[arg(long, env = "MVLAB_OUT")]
    out: Option<PathBuf>,
    /// skip cells already finished under the same config hash
    #[arg(long, env = "MVLAB_RESUME", default_value_t = false)]
    resume: bool,
    /// rayon worker threads (default: all cores)
    #[arg(long, env = "MVLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Single system run: snapshot + diagnostics
    Simulate(RunArgs),
    /// Chaos-decay study over an N schedule against a surrogate limit law
    Chaos(RunArgs),
    /// Spectral refinement study over a mode schedule
    Galerkin(RunArgs),
    /// Paired perturbed runs with shared noise
    Stability(RunArgs),
    /// Structural-condition audits of the configured model
    Audit(RunArgs),
    /// Exact W2 between two snapshot files
    Ot {
        a: PathBuf,
        b: PathBuf,
        /// also write the distance as JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::BlowUp { .. } => 3,
        _ => 2,
    }
}

fn run(args: &RunArgs, kind: ExperimentKind) -> Result<u8, Error> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "config kind {:?} does not match the subcommand",
            cfg.kind
        )));
    }
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let outcome = run_experiment(&cfg, &out_dir, args.resume)?;

    for audit in &outcome.audits {
        println!(
            "audit {:<20} {}  margin {:+.6e}  fitted C {:.6e}",
            audit.condition,
            if audit.violated { "VIOLATED" } else { "ok" },
            audit.worst_margin,
            audit.fitted_constant
        );
    }
    for agg in &outcome.record.aggregates {
        println!(
            "n {:>6}: mean statistic {:.6e} (se {:.2e}, {} cells)",
            agg.n, agg.mean, agg.std_err, agg.cells
        );
    }
    if let Some(slope) = outcome.record.slope {
        println!("fitted log-log slope: {slope:.4}");
    }
    for (k, v) in &outcome.record.extra {
        println!("{k}: {v:.6e}");
    }
    println!(
        "wall {:.2}s, {:.3e} particle-mode-steps/s, results in {}",
        outcome.metrics.wall_seconds,
        outcome.metrics.particle_mode_steps_per_second,
        out_dir.display()
    );
    Ok(if outcome.audit_violation { 1 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<u8, Error> = match &cli.command {
        Command::Ot { a, b, out } => (|| {
            let w2 = wasserstein_between_snapshots(a, b)?;
            println!("w2 {w2:.12e}");
            if let Some(path) = out {
                let json = format!("{{\n  \"w2\": {w2}\n}}\n");
                std::fs::write(path, json)?;
            }
            Ok(0)
        })(),
        Command::Simulate(a) => run(a, ExperimentKind::Simulate),
        Command::Chaos(a) => run(a, ExperimentKind::Chaos),
        Command::Galerkin(a) => run(a, ExperimentKind::Galerkin),
        Command::Stability(a) => run(a, ExperimentKind::Stability),
        Command::Audit(a) => run(a, ExperimentKind::Audit),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
