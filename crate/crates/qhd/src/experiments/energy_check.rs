//! Fast algebraic identity battery at the configured parameters:
//! cancellation residual, adjoint round-trip, commuting diagonals,
//! coefficient bounds, and the norm-equivalence margin.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::divisors::scan_fit;
use crate::energy::{build_e3, default_floor, e3_bound_constant, energy_value, verify_cancellation};
use crate::error::Result;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::io;
use crate::hamiltonian::build_k3_w;
use crate::lattice::ball;
use crate::spectral::SpectralField;
use crate::trilinear::{ad_inverse, diagonal_poisson_value, poisson_with_diagonal, QuadraticDiagonal};

#[derive(Debug, Clone, Serialize)]
pub struct EnergyCheckReport {
    pub schema: String,
    pub s: f64,
    pub j_max: i32,
    pub cancellation_residual: Vec<(f64, f64)>,
    pub ad_roundtrip_residual: f64,
    pub diagonal_bracket: f64,
    pub k3_w_max_coeff: f64,
    pub fitted_m: Option<i32>,
    pub e3_bound_constants: Vec<(f64, f64)>,
    pub equivalence_margin: f64,
    pub min_divisor: f64,
}

pub fn run_energy_check(
    cfg: &ExperimentConfig,
    out_dir: &std::path::Path,
) -> Result<EnergyCheckReport> {
    let shape = cfg.shape()?;
    let p = cfg.params()?;
    let k3w = build_k3_w(&p, cfg.j_max, &shape);
    let floor = default_floor(&p);

    let cutoffs: Vec<f64> = if cfg.n_cutoff > 0.0 {
        vec![cfg.n_cutoff]
    } else {
        vec![4.0, 10.0]
    };
    let mut cancellation = Vec::new();
    let mut min_div = f64::INFINITY;
    for &n_cut in &cutoffs {
        let me = build_e3(&k3w, cfg.s, n_cut, &shape, &p, floor)?;
        cancellation.push((n_cut, verify_cancellation(&k3w, &me, &shape, &p)));
        min_div = min_div.min(me.provenance.min_divisor);
        println!(
            "cancellation residual at N = {n_cut}: {:.3e}",
            cancellation.last().unwrap().1
        );
    }

    // ad o ad^{-1} round-trip on the model table
    let omega = QuadraticDiagonal::Omega {
        shape: shape.clone(),
        params: p.clone(),
    };
    let inv = ad_inverse(&poisson_with_diagonal(&omega, &k3w), &shape, &p, floor)?;
    let ad_roundtrip = k3w
        .iter()
        .map(|(k, c)| (inv.get(k) - c).norm() / (1.0 + c.norm()))
        .fold(0.0f64, f64::max);
    println!("adjoint round-trip residual: {ad_roundtrip:.3e}");

    // {N_s, K^2} vanishes identically
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds[0]);
    let mut w = SpectralField::zero(shape.clone());
    for j in ball(cfg.j_max, &shape) {
        if rng.gen::<f64>() < 0.3 {
            w.insert(
                j,
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            );
        }
    }
    let ns = QuadraticDiagonal::Sobolev { s: cfg.s };
    let diag = diagonal_poisson_value(&ns, &omega, &w);
    println!("{{N_s, K^2}} at a random field: {diag:.1e}");

    // coefficient growth with the exponent fitted from a divisor scan
    let scan = scan_fit(cfg.j_max.min(12), &shape, &p);
    let fitted_m = scan.fit.as_ref().map(|f| f.m_exp);
    let mut bound_constants = Vec::new();
    if let Some(m_exp) = fitted_m {
        for n_cut in [4.0, 8.0, 16.0] {
            let me = build_e3(&k3w, cfg.s, n_cut, &shape, &p, floor)?;
            bound_constants.push((n_cut, e3_bound_constant(&me, cfg.dim, m_exp as f64)));
        }
        println!("E_3 bound constants over N in {{4, 8, 16}}: {bound_constants:?}");
    }

    // norm equivalence margin at |w| = 1e-3
    let me = build_e3(&k3w, cfg.s, cutoffs[0], &shape, &p, floor)?;
    let mut margin = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = SpectralField::zero(shape.clone());
        for j in ball(cfg.j_max, &shape) {
            if rng.gen::<f64>() < 0.3 {
                w.insert(
                    j,
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                );
            }
        }
        let norm = w.h_s_norm(cfg.s);
        if norm == 0.0 {
            continue;
        }
        w.scale(1e-3 / norm);
        let n_s = w.h_s_norm_sq(cfg.s);
        let e_s = energy_value(&me, &w);
        margin = margin.max((e_s - n_s).abs() / n_s);
    }
    println!("norm equivalence margin |E_s - N_s| / N_s at 1e-3: {margin:.3e}");

    // coefficient table for offline inspection and cross-implementation diffs
    io::ensure_dir(out_dir)?;
    let f = std::fs::File::create(out_dir.join("k3_w.csv"))?;
    crate::trilinear::write_table_csv(&k3w, std::io::BufWriter::new(f))?;

    let report = EnergyCheckReport {
        schema: "qhd.energy_check.v1".into(),
        s: cfg.s,
        j_max: cfg.j_max,
        cancellation_residual: cancellation,
        ad_roundtrip_residual: ad_roundtrip,
        diagonal_bracket: diag,
        k3_w_max_coeff: k3w.max_abs_coeff(),
        fitted_m,
        e3_bound_constants: bound_constants,
        equivalence_margin: margin,
        min_divisor: min_div,
    };
    io::write_json(out_dir, "energy_check", &report)?;
    Ok(report)
}
