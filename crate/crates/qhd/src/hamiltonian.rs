//! The reduced Hamiltonian and its Taylor layers.
//!
//! With `alpha = sqrt(m - sum |z_j|^2)` eliminated, the energy of the flow
//! is
//!
//! ```text
//! K_m(z) = (hbar/2) mean( |D|^2_a z . conj z ) + (1/hbar) mean( G(|alpha + z|^2) ),
//! ```
//!
//! (`G' = g`, `G(m) = 0`; all integrals are means over the torus). Expanding
//! at `z = 0`:
//!
//! * quadratic layer: `K^2 = (hbar/2) sum |j|^2_a |z_j|^2
//!   + (m g'(m) / 2 hbar) mean( (z + conj z)^2 )`;
//! * cubic layer: `K^3 = (g'(m) sqrt(m) / hbar) mean( (z + conj z) |z|^2 )
//!   + (g''(m) m^{3/2} / 6 hbar) mean( (z + conj z)^3 )`;
//! * everything quartic and higher is never expanded in coefficients: its
//!   exact value is recovered on the grid as `K_m - K^2 - K^3`.
//!
//! The cubic coefficient tables built here are validated against
//! third-order finite differences of the exactly evaluated `K_m`.

use num_complex::Complex64;

use crate::diagonalization::ModeMatrixCache;
use crate::dispersion::ModelParams;
use crate::error::Result;
use crate::grid::{aniso_table, FftNd, GridField};
use crate::lattice::{anisotropic_norm_sq, ball, LatticePoint, TorusShape};
use crate::madelung::alpha_from_z;
use crate::spectral::SpectralField;
use crate::trilinear::{conjugate_by_modes, Leg, TriBuilder, TrilinearHamiltonian};

/// Energy of the full field,
/// `H(psi) = (hbar/2) sum |j|^2_a |psi_j|^2 + (1/hbar) mean G(|psi|^2)`.
pub fn hamiltonian_value(psi: &GridField, p: &ModelParams) -> f64 {
    let d = psi.shape.dim();
    let mut buf = psi.data.clone();
    let mut engine = FftNd::new(psi.n, d);
    engine.forward(&mut buf);
    let at = aniso_table(&psi.shape, psi.n);
    let kin: f64 = buf
        .iter()
        .zip(&at)
        .map(|(c, &x)| x * c.norm_sqr())
        .sum();
    let m = p.mass();
    let pot: f64 = psi
        .data
        .iter()
        .map(|w| p.g_antiderivative_of_u(w.norm_sqr() - m))
        .sum::<f64>()
        / psi.len() as f64;
    0.5 * p.hbar() * kin + pot / p.hbar()
}

/// Exact reduced energy `K_m(z)`, with `alpha` recovered from the mass
/// constraint and the potential term evaluated pointwise on an `n` grid.
pub fn k_exact(z: &SpectralField, p: &ModelParams, n: usize) -> Result<f64> {
    let alpha = alpha_from_z(z, p)?;
    let kin: f64 = z
        .iter()
        .map(|(j, c)| anisotropic_norm_sq(j, &z.shape) * c.norm_sqr())
        .sum();
    let state = crate::madelung::GaugeState {
        alpha,
        theta: 0.0,
        z: z.clone(),
    };
    let f = crate::madelung::gauge_reconstruct(&state, n);
    let m = p.mass();
    let pot: f64 = f
        .data
        .iter()
        .map(|w| p.g_antiderivative_of_u(w.norm_sqr() - m))
        .sum::<f64>()
        / f.len() as f64;
    Ok(0.5 * p.hbar() * kin + pot / p.hbar())
}

/// Quadratic layer `K^2(z)`.
pub fn k2_value(z: &SpectralField, shape: &TorusShape, p: &ModelParams) -> f64 {
    let kin: f64 = z
        .iter()
        .map(|(j, c)| anisotropic_norm_sq(j, shape) * c.norm_sqr())
        .sum();
    // mean((z + conj z)^2) = sum_j |z_j + conj(z_{-j})|^2 over all modes
    let mut seen: std::collections::HashSet<LatticePoint> = std::collections::HashSet::new();
    let mut quad = 0.0;
    for (j, _) in z.iter() {
        for jj in [j.clone(), j.neg()] {
            if seen.insert(jj.clone()) {
                let v = z.get(&jj) + z.get(&jj.neg()).conj();
                quad += v.norm_sqr();
            }
        }
    }
    0.5 * p.hbar() * kin + 0.5 * p.mass() * p.g_prime_m() / p.hbar() * quad
}

/// Cubic layer evaluated in physical space (the dual representation used
/// to cross-check the coefficient table).
pub fn k3_grid_value(z: &SpectralField, p: &ModelParams, n: usize) -> f64 {
    let f = z.to_grid(n);
    let m = p.mass();
    let c1 = p.g_prime_m() * m.sqrt() / p.hbar();
    let c2 = p.g_second_m() * m.powf(1.5) / (6.0 * p.hbar());
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for w in &f.data {
        let v = 2.0 * w.re;
        t1 += v * w.norm_sqr();
        t2 += v * v * v;
    }
    let len = f.len() as f64;
    c1 * t1 / len + c2 * t2 / len
}

/// Cubic Taylor coefficients of `K_m` at `z = 0`, as a symmetric table over
/// the sup-norm ball.
///
/// The `g'(m)` part comes from `mean((z + conj z)(|z|^2 - mean|z|^2))`; the
/// subtracted mean pairs with the zero-average factor and drops out. A
/// second-order nonlinearity (`g'' != 0`) adds the `(z + conj z)^3`
/// monomials.
pub fn build_k3_z(p: &ModelParams, j_max: i32, shape: &TorusShape) -> TrilinearHamiltonian {
    let m = p.mass();
    let c1 = p.g_prime_m() * m.sqrt() / p.hbar();
    let c2 = p.g_second_m() * m.powf(1.5) / (6.0 * p.hbar());
    let points = ball(j_max, shape);
    let d = shape.dim();
    let mut b = TriBuilder::new(shape.clone(), j_max);

    let diff = |a: &LatticePoint, bb: &LatticePoint| -> Option<LatticePoint> {
        let coords: Vec<i32> = a
            .coords()
            .iter()
            .zip(bb.coords())
            .map(|(&x, &y)| x - y)
            .collect();
        if coords.iter().all(|&x| x == 0) || coords.iter().any(|&x| x.abs() > j_max) {
            None
        } else {
            Some(LatticePoint::new_unchecked(&coords))
        }
    };

    if c1 != 0.0 {
        let c1c = Complex64::new(c1, 0.0);
        for jb in &points {
            for jc in &points {
                // (z + conj z) leg with sigma = +1: momentum j_a + j_b - j_c = 0
                if let Some(ja) = diff(jc, jb) {
                    b.add_ordered(
                        [(1, ja), (1, jb.clone()), (-1, jc.clone())],
                        c1c,
                    );
                }
                // sigma = -1 leg carries momentum -j_a
                if let Some(ja) = diff(jb, jc) {
                    b.add_ordered(
                        [(-1, ja), (1, jb.clone()), (-1, jc.clone())],
                        c1c,
                    );
                }
            }
        }
    }

    if c2 != 0.0 {
        let c2c = Complex64::new(c2, 0.0);
        for j1 in &points {
            for j2 in &points {
                for s1 in [1i8, -1] {
                    for s2 in [1i8, -1] {
                        for s3 in [1i8, -1] {
                            let coords: Vec<i32> = (0..d)
                                .map(|k| {
                                    -(s3 as i32)
                                        * (s1 as i32 * j1.coords()[k]
                                            + s2 as i32 * j2.coords()[k])
                                })
                                .collect();
                            if coords.iter().all(|&x| x == 0)
                                || coords.iter().any(|&x| x.abs() > j_max)
                            {
                                continue;
                            }
                            let j3 = LatticePoint::new_unchecked(&coords);
                            let legs: [Leg; 3] =
                                [(s1, j1.clone()), (s2, j2.clone()), (s3, j3)];
                            b.add_ordered(legs, c2c);
                        }
                    }
                }
            }
        }
    }

    b.finish()
}

/// The cubic table in the diagonalizing variables:
/// `K~^3(w) = K^3(C [w, conj w])`.
pub fn build_k3_w(p: &ModelParams, j_max: i32, shape: &TorusShape) -> TrilinearHamiltonian {
    let k3 = build_k3_z(p, j_max, shape);
    let cache = ModeMatrixCache::with_ball(shape, p, 2 * j_max);
    conjugate_by_modes(&k3, |j| cache.uv(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn defaults() -> (TorusShape, ModelParams) {
        (
            TorusShape::new(vec![1.32, 1.74]).unwrap(),
            ModelParams::new(1.0, 1.0, vec![1.0]).unwrap(),
        )
    }

    fn random_direction(shape: &TorusShape, j_max: i32, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = SpectralField::zero(shape.clone());
        for j in ball(j_max, shape) {
            v.insert(
                j,
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            );
        }
        let norm = v.l2_norm_sq().sqrt();
        v.scale(1.0 / norm);
        v
    }

    /// Richardson-extrapolated centered third derivative of
    /// `t -> K_m(t v)`, divided by 6: the cubic form at `v`.
    fn k3_finite_difference(
        v: &SpectralField,
        p: &ModelParams,
        n: usize,
        h: f64,
    ) -> f64 {
        let f = |t: f64| -> f64 {
            let mut zt = v.clone();
            zt.scale(t);
            k_exact(&zt, p, n).unwrap()
        };
        let stencil = |h: f64| -> f64 {
            (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h)
        };
        let d1 = stencil(h);
        let d2 = stencil(h / 2.0);
        ((4.0 * d2 - d1) / 3.0) / 6.0
    }

    #[test]
    fn cubic_table_matches_finite_differences_linear_g() {
        let (shape, p) = defaults();
        let k3 = build_k3_z(&p, 3, &shape);
        k3.validate().unwrap();
        for seed in 0..6u64 {
            let v = random_direction(&shape, 3, seed);
            let fd = k3_finite_difference(&v, &p, 16, 1e-2);
            let exact = k3.evaluate(&v);
            let scale = exact.abs().max(1e-3);
            assert!(
                (fd - exact).abs() / scale < 1e-7,
                "seed {seed}: fd {fd} vs table {exact}"
            );
        }
    }

    #[test]
    fn cubic_table_matches_finite_differences_quadratic_g() {
        let shape = TorusShape::new(vec![1.32, 1.74]).unwrap();
        let p = ModelParams::new(1.0, 1.0, vec![1.0, 0.4]).unwrap();
        let k3 = build_k3_z(&p, 3, &shape);
        k3.validate().unwrap();
        for seed in 10..14u64 {
            let v = random_direction(&shape, 3, seed);
            let fd = k3_finite_difference(&v, &p, 16, 1e-2);
            let exact = k3.evaluate(&v);
            let scale = exact.abs().max(1e-3);
            assert!(
                (fd - exact).abs() / scale < 1e-7,
                "seed {seed}: fd {fd} vs table {exact}"
            );
        }
    }

    #[test]
    fn cubic_table_matches_grid_form() {
        let (shape, p) = defaults();
        let k3 = build_k3_z(&p, 3, &shape);
        for seed in 20..24u64 {
            let mut v = random_direction(&shape, 3, seed);
            v.scale(0.1);
            let grid_val = k3_grid_value(&v, &p, 16);
            let table_val = k3.evaluate(&v);
            assert!(
                (grid_val - table_val).abs() < 1e-10 * (1.0 + table_val.abs()),
                "grid {grid_val} vs table {table_val}"
            );
        }
    }

    #[test]
    fn quadratic_layer_matches_exact_at_second_order() {
        // K_m(t v) = t^2 K^2(v) + O(t^3)
        let (shape, p) = defaults();
        for seed in 30..33u64 {
            let v = random_direction(&shape, 3, seed);
            let f = |t: f64| {
                let mut zt = v.clone();
                zt.scale(t);
                k_exact(&zt, &p, 16).unwrap()
            };
            let h = 1e-3;
            let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h) / 2.0;
            let k2 = k2_value(&v, &shape, &p);
            assert!(
                (second - k2).abs() < 1e-5 * (1.0 + k2.abs()),
                "fd {second} vs k2 {k2}"
            );
        }
    }

    #[test]
    fn coefficients_uniformly_bounded() {
        let (shape, p) = defaults();
        let k3 = build_k3_z(&p, 12, &shape);
        // |K^3_{sigma,j}| is bounded by the prefactor g'(m) sqrt(m)/hbar
        let bound = p.g_prime_m() * p.mass().sqrt() / p.hbar() + 1e-12;
        assert!(k3.max_abs_coeff() <= bound);
        let k3w = build_k3_w(&p, 6, &shape);
        k3w.validate().unwrap();
        // conjugation inflates by at most the cubed operator norm
        let c_norm = 1.0 + p.kappa().sqrt() * p.beta();
        assert!(k3w.max_abs_coeff() <= bound * c_norm.powi(3));
    }

    #[test]
    fn hamiltonian_value_at_equilibrium() {
        let (shape, p) = defaults();
        let psi = GridField::constant(shape, 16, Complex64::new(1.0, 0.0));
        assert!(hamiltonian_value(&psi, &p).abs() < 1e-14);
    }
}
