//! Reduced-scale lifespan sweep: exit times of the 2-epsilon threshold
//! for a short epsilon ladder with small budgets. The headline sweep
//! (hours) runs through the `qhd lifespan` subcommand with defaults.
//!
//! Run with `cargo run --release --example lifespan_sweep`.

use qhd::experiments::{run_lifespan, ExperimentConfig};

fn main() {
    let cfg = ExperimentConfig {
        j_max: 4,
        s: 6.0,
        epsilons: vec![3e-2, 1e-2],
        t_max: 2000.0,
        ..ExperimentConfig::default()
    };
    let out = std::env::temp_dir().join("qhd_example_lifespan");
    let result = run_lifespan(&cfg, &out).unwrap();
    println!("grid {}^2, dt = {:.3e}", result.grid_n, result.dt);
    for p in &result.points {
        println!(
            "epsilon {:>8.1e} seed {}: exit at t = {:>10.2}{}{}",
            p.epsilon,
            p.seed,
            p.exit_time,
            if p.censored { " (censored)" } else { "" },
            if p.blow_up { " (blow-up!)" } else { "" },
        );
    }
    match result.slope {
        Some(s) => println!("fitted log-log slope: {s:.3}"),
        None => println!("not enough points for a slope"),
    }
    println!("results in {}", out.display());
}
