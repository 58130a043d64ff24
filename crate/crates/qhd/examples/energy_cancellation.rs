//! Construction of the modified energy: cubic table in diagonalizing
//! variables, sign/frequency splits, the correction `E_3`, and the
//! cancellation identity
//! `{N_s, K~^3} + {E_3, K~^2} = {N_s, (K~^{(3,-1)})^{>N}}`.
//!
//! Run with `cargo run --release --example energy_cancellation`.

use qhd::dispersion::ModelParams;
use qhd::energy::{build_e3, default_floor, e3_bound_constant, verify_cancellation};
use qhd::hamiltonian::{build_k3_w, build_k3_z};
use qhd::lattice::TorusShape;
use qhd::trilinear::{split_sign, split_truncate};

fn main() {
    let shape = TorusShape::new(vec![1.32, 1.74]).unwrap();
    let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();
    let s = 6.0;
    let j_max = 8;

    let k3 = build_k3_z(&p, j_max, &shape);
    println!(
        "cubic table in z: {} classes, max coefficient {:.4}",
        k3.len(),
        k3.max_abs_coeff()
    );
    let k3w = build_k3_w(&p, j_max, &shape);
    println!(
        "after the symplectic substitution: {} classes, max coefficient {:.4}",
        k3w.len(),
        k3w.max_abs_coeff()
    );
    let (kp, km) = split_sign(&k3w);
    println!("sign split: {} (+1) classes, {} (-1) classes", kp.len(), km.len());

    for n_cut in [4.0, 10.0] {
        let (lo, hi) = split_truncate(&km, n_cut);
        let me = build_e3(&k3w, s, n_cut, &shape, &p, default_floor(&p)).unwrap();
        let residual = verify_cancellation(&k3w, &me, &shape, &p);
        println!(
            "N = {n_cut:>4}: (-1) part keeps {} / truncates {}, E_3 has {} classes, \
             min divisor {:.4e}, cancellation residual {residual:.3e}",
            lo.len(),
            hi.len(),
            me.e3.len(),
            me.provenance.min_divisor,
        );
    }

    println!("\ncoefficient growth envelope (constant must not grow with N):");
    for n_cut in [4.0, 8.0, 16.0] {
        let me = build_e3(&k3w, s, n_cut, &shape, &p, default_floor(&p)).unwrap();
        println!(
            "  N = {n_cut:>4}: fitted constant {:.4}",
            e3_bound_constant(&me, 2, 2.0)
        );
    }
}
