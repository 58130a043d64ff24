//! Conservation structure of the split-step integrator: exact mass,
//! second-order energy error (Richardson factor 4 under step halving),
//! and the free-flow period identity.
//!
//! Run with `cargo run --release --example split_step_conservation`.

use num_complex::Complex64;
use qhd::dispersion::ModelParams;
use qhd::integrator::{evolve, prepare_initial, EvolveOptions, ModeProfile, Stepper};
use qhd::lattice::{anisotropic_norm_sq, LatticePoint, TorusShape};
use qhd::spectral::SpectralField;

fn main() {
    let shape = TorusShape::new(vec![1.32, 1.74]).unwrap();
    let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();
    let psi0 =
        prepare_initial(1e-2, ModeProfile { exponent: 5.0 }, 1, &shape, &p, 16, 4, 4.0).unwrap();

    let mut stepper = Stepper::new(&shape, &p, 16, 1e-3, 4.0);
    let m0 = psi0.mass();
    let mut psi = psi0.clone();
    stepper.evolve_steps(&mut psi, 10_000);
    println!(
        "mass drift over 10^4 steps: {:.3e} (relative)",
        ((psi.mass() - m0) / m0).abs()
    );

    let drift_at = |dt: f64| -> f64 {
        let mut st = Stepper::new(&shape, &p, 16, dt, 4.0);
        let opts = EvolveOptions {
            sample_every: ((0.05 / dt).round() as usize).max(1),
            ..EvolveOptions::new(1.0)
        };
        let traj = evolve(&mut st, &psi0, &opts).unwrap();
        let h0 = traj.hamiltonian[0];
        traj.hamiltonian
            .iter()
            .fold(0.0f64, |m, &h| m.max((h - h0).abs()))
    };
    let d1 = drift_at(2e-3);
    let d2 = drift_at(1e-3);
    println!("energy drift over unit time: {d1:.3e} at dt = 2e-3, {d2:.3e} at dt = 1e-3");
    println!("Richardson factor: {:.3} (second order gives 4)", d1 / d2);

    // free flow: a single mode returns after its linear period
    let free = ModelParams::degenerate(1.0, 1.0).unwrap();
    let j = LatticePoint::new(&[2, 1]).unwrap();
    let x = anisotropic_norm_sq(&j, &shape);
    let mut z = SpectralField::zero(shape.clone());
    z.insert(j, Complex64::new(0.3, 0.1));
    let start = z.to_grid(16);
    let period = 2.0 * std::f64::consts::PI / (0.5 * free.hbar() * x);
    let mut st = Stepper::new(&shape, &free, 16, period / 1024.0, 4.0);
    let mut psi = start.clone();
    st.evolve_steps(&mut psi, 1024);
    let err = psi
        .data
        .iter()
        .zip(&start.data)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    println!("free-flow return error after one period: {err:.3e}");
}
