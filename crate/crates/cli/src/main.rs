use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use msmortar::harness::{
    emit_outputs, export_bases, run_error_study, run_fine_solve, run_precond_study, ExperimentConfig, RunReport,
};

/// Multiscale mortar mixed finite element experiments.
#[derive(Parser)]
#[command(name = "msmortar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monolithic fine solve with pressure and flux dumps.
    Solve(Common),
    /// Coarse-space error decay study.
    Errors(Common),
    /// Preconditioned interface solve iteration study.
    Precond(Common),
    /// Export the mortar bases of the error study.
    Snapshots(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        if let Some(k) = self.threads {
            anyhow::ensure!(k > 0, "--threads must be positive");
            rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
        }
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

fn emit(report: &RunReport, common: &Common) -> Result<()> {
    emit_outputs(report, &common.out).with_context(|| format!("writing outputs to {}", common.out.display()))?;
    println!("config_hash {}", report.config_hash);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(c) => {
            let report = run_fine_solve(&c.load()?)?;
            emit(&report, c)?;
        }
        Command::Errors(c) => {
            let report = run_error_study(&c.load()?)?;
            for r in &report.errors {
                println!("{:>9.2e} {:<10} Nb={} e_u={:.4e} e_q={:.4e}", r.contrast, r.basis.name(), r.nb, r.e_u, r.e_q);
            }
            emit(&report, c)?;
        }
        Command::Precond(c) => {
            let report = run_precond_study(&c.load()?)?;
            for r in &report.iterations {
                println!(
                    "{:>9.2e} {:<10} Nb={} domain={} {:<14} {:<5} {:>5}{}",
                    r.contrast,
                    r.coarse.name(),
                    r.nb,
                    r.domain,
                    r.composition.name(),
                    r.solver.name(),
                    r.iterations,
                    if r.converged { "" } else { " (not converged)" }
                );
            }
            emit(&report, c)?;
        }
        Command::Snapshots(c) => {
            for name in export_bases(&c.load()?, &c.out)? {
                println!("{}", c.out.join(name).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
