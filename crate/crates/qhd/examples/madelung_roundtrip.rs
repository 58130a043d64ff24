//! Madelung transform and gauge reduction on random small data:
//! round-trip accuracy, mass bookkeeping, and the two-sided smallness
//! bounds between `(rho, phi)` and the reduced variable `z`.
//!
//! Run with `cargo run --release --example madelung_roundtrip`.

use qhd::dispersion::ModelParams;
use qhd::lattice::TorusShape;
use qhd::madelung::{gauge_reconstruct, gauge_reduce, madelung_forward, madelung_inverse, random_pair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let shape = TorusShape::new(vec![1.32, 1.74]).unwrap();
    let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();
    let s = 6.0;
    let n = 16;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pair = random_pair(&shape, n, 4, s + 1.0, &mut rng);
    let delta0 = pair.delta(&p, s);
    pair.scale(1e-3 / delta0);
    let delta = pair.delta(&p, s);
    println!("random (rho, phi) with delta = |rho|/m + |phi'|/sqrt(kappa) = {delta:.3e}");

    let psi = madelung_forward(&pair, &p).unwrap();
    println!("forward: min |psi| = {:.6}, mass = {:.12}", psi.min_modulus(), psi.mass());

    let back = madelung_inverse(&psi, &p).unwrap();
    let rho_err = pair
        .rho
        .iter()
        .zip(&back.rho)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("inverse: max |rho - rho'| = {rho_err:.3e} (phi recovered up to its mean)");

    let g = gauge_reduce(&psi).unwrap();
    println!(
        "gauge: alpha = {:.9}, theta = {:.6}, |z|_Hs = {:.6e}",
        g.alpha,
        g.theta,
        g.z.h_s_norm(s)
    );
    println!(
        "mass split: alpha^2 + sum |z_j|^2 - mass = {:.3e}",
        g.alpha * g.alpha + g.z.l2_norm_sq() - psi.mass()
    );
    let rec = gauge_reconstruct(&g, n);
    let rec_err = psi
        .data
        .iter()
        .zip(&rec.data)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    println!("reconstruction error: {rec_err:.3e}");

    let m = p.mass();
    println!(
        "smallness bounds: |z|_Hs = {:.4e} <= 2 sqrt(m) delta = {:.4e}",
        g.z.h_s_norm(s),
        2.0 * m.sqrt() * delta
    );
    println!(
        "                  delta' = {:.4e} <= 16 |z|_Hs / sqrt(m) = {:.4e}",
        back.delta(&p, s),
        16.0 * g.z.h_s_norm(s) / m.sqrt()
    );
}
