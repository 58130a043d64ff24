//! Thin batch driver over the library experiments.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use qhd::experiments::{
    run_divisors, run_drift, run_energy_check, run_lifespan, run_simulate, ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "qhd",
    about = "Quantum hydrodynamics on anisotropic tori: batch experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides config and the QHD_OUT variable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replace the configured seed list with a single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and stream conservation monitors.
    Simulate,
    /// Sweep epsilon and measure 2-epsilon exit times.
    Lifespan,
    /// Compare modified-energy drift against the plain Sobolev energy.
    Drift,
    /// Run divisor scans, lower-bound fits and measure estimates.
    Divisors,
    /// Fast algebraic identity battery at the configured parameters.
    EnergyCheck,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("thread pool")?;
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os("QHD_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));

    match cli.command {
        Command::Simulate => {
            let summary = run_simulate(&cfg, &out_dir)?;
            println!(
                "simulate: {} samples to t = {}, mass drift {:.3e}, |z|_Hs max {:.3e}",
                summary.samples, summary.t_final, summary.mass_drift, summary.z_hs_max
            );
        }
        Command::Lifespan => {
            let result = run_lifespan(&cfg, &out_dir)?;
            for p in &result.points {
                println!(
                    "epsilon {:>9.3e} seed {:>3}: exit {:>12.2}{}",
                    p.epsilon,
                    p.seed,
                    p.exit_time,
                    if p.censored { " (censored)" } else { "" }
                );
            }
            if let Some(slope) = result.slope {
                println!("log-log slope: {slope:.3}");
            }
        }
        Command::Drift => {
            let report = run_drift(&cfg, &out_dir)?;
            for arm in &report.arms {
                println!(
                    "epsilon {:>9.3e}: N = {:.1}, ratio {:.4} (control {:.1})",
                    arm.epsilon, arm.n_cutoff, arm.ratio, arm.control_ratio
                );
            }
            for (i, imp) in report.improvements.iter().enumerate() {
                println!("improvement {}: {:.3}", i + 1, imp);
            }
        }
        Command::Divisors => {
            let report = run_divisors(&cfg, &out_dir)?;
            println!(
                "{} fitted, {} resonant; gamma in [{:.3e}, {:.3e}]; equal-sign floor {:.4}",
                report.fitted,
                report.resonant,
                report.gamma_min,
                report.gamma_max,
                report.equal_sign_floor
            );
            println!(
                "isotropic probe: {}",
                report
                    .isotropic
                    .resonance
                    .as_deref()
                    .unwrap_or("no resonance found")
            );
            println!("measure slope: {:.3}", report.measure_slope);
        }
        Command::EnergyCheck => {
            run_energy_check(&cfg, &out_dir)?;
        }
    }
    println!("results in {}", out_dir.display());
    Ok(())
}
