//! Small-divisor scan on a generic shape against the isotropic probe:
//! lower-bound fit, equal-sign floor, worst offenders, and the dyadic
//! uniformity windows.
//!
//! Run with `cargo run --release --example divisor_scan`.

use qhd::dispersion::ModelParams;
use qhd::divisors::{scan_fit, window_minimum};
use qhd::lattice::TorusShape;

fn main() {
    let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();
    let generic = TorusShape::new(vec![1.32, 1.74]).unwrap();

    println!("== generic shape a = (1.32, 1.74), J = 24");
    let summary = scan_fit(24, &generic, &p);
    println!("triples visited: {}", summary.triples_visited);
    println!(
        "equal-sign |Omega| floor: {:.4} (sqrt(kappa) = {})",
        summary.equal_sign_min,
        p.kappa().sqrt()
    );
    println!("smallest mixed |Omega|: {:.6e}", summary.mixed_min_abs);
    let fit = summary.fit.expect("generic shape fits");
    println!("fitted exponent M = {}, gamma = {:.6e}", fit.m_exp, fit.gamma);
    for (m, g, desc) in fit.worst.iter().take(3) {
        println!("  worst at M = {m}: gamma(M) = {g:.4e}  [{desc}]");
    }

    println!("\n== isotropic probe a = (1, 1)");
    let iso = scan_fit(12, &TorusShape::isotropic(2), &p);
    match iso.resonance {
        Some(r) => println!("reported resonant: {r}"),
        None => println!("unexpected: no resonance found"),
    }

    println!("\n== dyadic windows (mu_3 <= 2): kappa^-1/2 |Omega| mu_1^(d-1) log^(d+1)(1+mu_1^2)");
    for j in [20, 40, 60] {
        let w = window_minimum(j, 2.0, &generic, &p);
        println!("  J in ({:>2}, {:>2}]: min = {w:.4}", j / 2, j);
    }
}
