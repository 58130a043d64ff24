//! Reduced-scale drift comparison: the modified energy `N_s + E_3` against
//! the plain Sobolev energy along the integrated flow. The headline
//! configuration lives in the `qhd drift` subcommand; this example runs a
//! small lattice in about a minute.
//!
//! Run with `cargo run --release --example drift_experiment`.

use qhd::experiments::{run_drift, ExperimentConfig};

fn main() {
    let cfg = ExperimentConfig {
        j_max: 4,
        s: 6.0,
        dt: 2.5e-4,
        epsilons: vec![1e-2, 5e-3],
        ..ExperimentConfig::default()
    };
    let out = std::env::temp_dir().join("qhd_example_drift");
    let report = run_drift(&cfg, &out).unwrap();
    println!(
        "grid {}^2, dt = {}, J = {}",
        report.grid_n, report.dt, report.j_max
    );
    for arm in &report.arms {
        println!(
            "epsilon {:>8.1e}: cutoff N = {:>6.1}, max|dE_s/dt| = {:.3e}, max|dN_s/dt| = {:.3e}, ratio {:.4}",
            arm.epsilon, arm.n_cutoff, arm.max_de_dt, arm.max_dn_dt, arm.ratio
        );
    }
    for imp in &report.improvements {
        println!("ratio improvement when halving epsilon: {imp:.3}");
    }
    println!("series written to {}", out.display());
}
