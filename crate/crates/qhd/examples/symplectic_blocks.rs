//! Per-mode symplectic diagonalization: block entries, determinant,
//! conjugation defect, and the operator-norm bound of the change of
//! variables.
//!
//! Run with `cargo run --release --example symplectic_blocks`.

use num_complex::Complex64;
use qhd::diagonalization::{mode_matrix, to_w, to_z, verify_diagonalization};
use qhd::dispersion::{omega, ModelParams};
use qhd::lattice::{ball, LatticePoint, TorusShape};
use qhd::spectral::SpectralField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let shape = TorusShape::new(vec![1.32, 1.74]).unwrap();
    let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();

    println!("{:>10} {:>12} {:>12} {:>14} {:>12}", "j", "omega", "A", "det - 1", "defect");
    for coords in [[1, 0], [0, 1], [1, 1], [2, -1], [5, 3], [16, 16]] {
        let j = LatticePoint::new(&coords).unwrap();
        let m = mode_matrix(&j, &shape, &p);
        println!(
            "{:>10} {:>12.6} {:>12.6} {:>14.2e} {:>12.2e}",
            format!("{j:?}"),
            omega(&j, &shape, &p),
            m.a_val,
            m.det() - 1.0,
            verify_diagonalization(&j, &shape, &p)
        );
    }

    let mut worst = 0.0f64;
    for j in ball(16, &shape) {
        worst = worst.max(verify_diagonalization(&j, &shape, &p));
    }
    println!("\nworst diagonalization defect on ball(16): {worst:.3e}");

    let bound = 1.0 + p.kappa().sqrt() * p.beta();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut z = SpectralField::zero(shape.clone());
    for j in ball(8, &shape) {
        z.insert(
            j,
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        );
    }
    let w = to_w(&z, &shape, &p);
    let back = to_z(&w, &shape, &p);
    let rt = z
        .iter()
        .map(|(j, c)| (back.get(j) - c).norm())
        .fold(0.0f64, f64::max);
    println!(
        "norm ratio |w|/|z| in H^6: {:.4} (bound 1 + sqrt(kappa) beta = {bound})",
        w.h_s_norm(6.0) / z.h_s_norm(6.0)
    );
    println!("round-trip max coefficient error: {rt:.3e}");
}
