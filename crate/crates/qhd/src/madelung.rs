//! Madelung change of variables and the zero-mode gauge reduction.
//!
//! Forward map: `psi = sqrt(m + rho) e^{i phi / hbar}` (defined while the
//! density `m + rho` stays positive). In these variables the hydrodynamic
//! pair obeys the semilinear Schroedinger flow integrated by
//! [`crate::integrator`].
//!
//! Gauge reduction: writing the zero mode in polar form,
//!
//! ```text
//! psi_0 = alpha e^{-i theta},    psi_j = z_j e^{-i theta}  (j != 0),
//! ```
//!
//! the observables never see `theta`, and `alpha` is recovered from the
//! conserved mass as `alpha = sqrt(m - sum_{j!=0} |z_j|^2)`. The reduced
//! variable `z` carries the whole dynamics.

use num_complex::Complex64;
use rand::Rng;

use crate::dispersion::ModelParams;
use crate::error::{Error, Result};
use crate::grid::{FftNd, GridField};
use crate::lattice::TorusShape;
use crate::spectral::SpectralField;

/// Zero-mean density perturbation and velocity potential on a common grid.
#[derive(Debug, Clone)]
pub struct RealFieldPair {
    pub shape: TorusShape,
    pub n: usize,
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
}

impl RealFieldPair {
    /// Validates the zero-mean constraint on `rho` (to roundoff, relative
    /// to the field scale).
    pub fn new(shape: TorusShape, n: usize, rho: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let len = n.pow(shape.dim() as u32);
        if rho.len() != len || phi.len() != len {
            return Err(Error::Config(format!(
                "field length mismatch: want {len}, got {} / {}",
                rho.len(),
                phi.len()
            )));
        }
        let mean = rho.iter().sum::<f64>() / len as f64;
        let scale = rho.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
        if mean.abs() > 1e-8 * scale {
            return Err(Error::Config(format!(
                "rho must have zero mean (got {mean:.3e})"
            )));
        }
        Ok(Self { shape, n, rho, phi })
    }

    fn spectral_buf(&self, which: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = which.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut engine = FftNd::new(self.n, self.shape.dim());
        engine.forward(&mut buf);
        buf
    }

    pub fn rho_h_s(&self, s: f64) -> f64 {
        let buf = self.spectral_buf(&self.rho);
        let w = crate::grid::sobolev_table(self.shape.dim(), self.n, s);
        crate::grid::weighted_norm_sq(&buf, &w).sqrt()
    }

    /// `|Pi_0^perp phi|_{H^s}`: the mean of `phi` is pure gauge and excluded.
    pub fn phi_perp_h_s(&self, s: f64) -> f64 {
        let mut buf = self.spectral_buf(&self.phi);
        buf[0] = Complex64::new(0.0, 0.0);
        let w = crate::grid::sobolev_table(self.shape.dim(), self.n, s);
        crate::grid::weighted_norm_sq(&buf, &w).sqrt()
    }

    pub fn phi_mean(&self) -> f64 {
        self.phi.iter().sum::<f64>() / self.phi.len() as f64
    }

    /// The smallness parameter `delta = |rho|_{H^s}/m + |Pi_0^perp phi|_{H^s}/sqrt(kappa)`.
    pub fn delta(&self, p: &ModelParams, s: f64) -> f64 {
        self.rho_h_s(s) / p.mass() + self.phi_perp_h_s(s) / p.kappa().sqrt()
    }

    pub fn scale(&mut self, lambda: f64) {
        for x in self.rho.iter_mut() {
            *x *= lambda;
        }
        for x in self.phi.iter_mut() {
            *x *= lambda;
        }
    }
}

/// Random real pair with power-law spectral profile `<j>^{-exponent}` and
/// support in the sup-norm ball. Unit-scale; callers rescale.
pub fn random_pair(
    shape: &TorusShape,
    n: usize,
    j_max: i32,
    exponent: f64,
    rng: &mut impl Rng,
) -> RealFieldPair {
    let d = shape.dim();
    let mut rho_buf = vec![Complex64::new(0.0, 0.0); n.pow(d as u32)];
    let mut phi_buf = rho_buf.clone();
    for j in crate::lattice::ball(j_max, shape) {
        // fill each +/- pair once, from the representative whose first
        // nonzero coordinate is positive
        let first = *j.coords().iter().find(|&&x| x != 0).unwrap();
        if first < 0 {
            continue;
        }
        let mut idx = 0;
        let mut idx_neg = 0;
        for k in 0..d {
            idx = idx * n + crate::grid::index_of_freq(j.coords()[k], n);
            idx_neg = idx_neg * n + crate::grid::index_of_freq(-j.coords()[k], n);
        }
        let amp = (1.0 + j.norm_sq()).powf(-exponent / 2.0);
        let cr = amp * Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let cp = amp * Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        rho_buf[idx] = cr;
        rho_buf[idx_neg] = cr.conj();
        phi_buf[idx] = cp;
        phi_buf[idx_neg] = cp.conj();
    }
    let mut engine = FftNd::new(n, d);
    engine.inverse(&mut rho_buf);
    engine.inverse(&mut phi_buf);
    RealFieldPair {
        shape: shape.clone(),
        n,
        rho: rho_buf.iter().map(|z| z.re).collect(),
        phi: phi_buf.iter().map(|z| z.re).collect(),
    }
}

/// `psi = sqrt(m + rho) e^{i phi / hbar}`; errors when the density is not
/// positive everywhere.
pub fn madelung_forward(f: &RealFieldPair, p: &ModelParams) -> Result<GridField> {
    let m = p.mass();
    let min_density = f.rho.iter().fold(f64::INFINITY, |acc, &r| acc.min(m + r));
    if min_density <= 0.0 {
        return Err(Error::NonpositiveDensity(min_density));
    }
    let inv_hbar = 1.0 / p.hbar();
    let mut out = GridField::zeros(f.shape.clone(), f.n);
    for (i, z) in out.data.iter_mut().enumerate() {
        let r = (m + f.rho[i]).sqrt();
        let (s, c) = (f.phi[i] * inv_hbar).sin_cos();
        *z = Complex64::new(r * c, r * s);
    }
    Ok(out)
}

/// Inverse map `m + rho = |psi|^2`, `phi = hbar arg(psi)` after gauge
/// alignment. The complex argument replaces the literal arctangent
/// quotient, which has the same values on its domain but a fragile branch
/// cut; alignment makes the zero mode real positive, so for fields in the
/// working regime the argument stays in `(-pi/2, pi/2)`. The mean of `phi`
/// is not recovered (it is pure gauge).
pub fn madelung_inverse(psi: &GridField, p: &ModelParams) -> Result<RealFieldPair> {
    let min_mod = psi.min_modulus();
    if min_mod <= 0.0 {
        return Err(Error::VanishingModulus(min_mod));
    }
    let mean = psi.mean();
    if mean.norm() == 0.0 {
        return Err(Error::VanishingZeroMode);
    }
    let align = (mean / mean.norm()).conj();
    let m = p.mass();
    let hbar = p.hbar();
    let mut rho = Vec::with_capacity(psi.len());
    let mut phi = Vec::with_capacity(psi.len());
    for z in &psi.data {
        let za = z * align;
        if za.re <= 0.0 {
            return Err(Error::BranchCut);
        }
        rho.push(z.norm_sqr() - m);
        phi.push(hbar * za.im.atan2(za.re));
    }
    RealFieldPair::new(psi.shape.clone(), psi.n, rho, phi)
}

/// Gauge variables: zero-mode polar pair plus the reduced field.
#[derive(Debug, Clone)]
pub struct GaugeState {
    pub alpha: f64,
    pub theta: f64,
    pub z: SpectralField,
}

/// Extract `(alpha, theta, z)` from a grid field:
/// `alpha = |psi_0|`, `theta = -arg(psi_0)`, `z_j = psi_j e^{i theta}`.
///
/// The polar convention `psi_0 = alpha e^{-i theta}` fixes the sign of
/// `theta` and of its rate below.
pub fn gauge_reduce(psi: &GridField) -> Result<GaugeState> {
    let d = psi.shape.dim();
    let mut buf = psi.data.clone();
    let mut engine = FftNd::new(psi.n, d);
    engine.forward(&mut buf);
    let c0 = buf[0];
    let alpha = c0.norm();
    if alpha == 0.0 {
        return Err(Error::VanishingZeroMode);
    }
    let theta = -c0.im.atan2(c0.re);
    let rot = Complex64::new(0.0, theta).exp();
    for c in buf.iter_mut() {
        *c *= rot;
    }
    let z = SpectralField::from_spectral_buf(&buf, &psi.shape, psi.n, psi.n as i32 / 2, 0.0);
    Ok(GaugeState { alpha, theta, z })
}

/// `psi = (alpha + z) e^{-i theta}` back on the grid.
pub fn gauge_reconstruct(state: &GaugeState, n: usize) -> GridField {
    let shape = state.z.shape.clone();
    let d = shape.dim();
    let mut buf = vec![Complex64::new(0.0, 0.0); n.pow(d as u32)];
    buf[0] = Complex64::new(state.alpha, 0.0);
    for (j, c) in state.z.iter() {
        let mut idx = 0;
        for k in 0..d {
            idx = idx * n + crate::grid::index_of_freq(j.coords()[k], n);
        }
        buf[idx] = *c;
    }
    let rot = Complex64::new(0.0, -state.theta).exp();
    for c in buf.iter_mut() {
        *c *= rot;
    }
    let mut engine = FftNd::new(n, d);
    engine.inverse(&mut buf);
    GridField {
        shape,
        n,
        data: buf,
    }
}

/// `alpha = sqrt(m - sum |z_j|^2)`; errors once the reduced field carries
/// the whole mass.
pub fn alpha_from_z(z: &SpectralField, p: &ModelParams) -> Result<f64> {
    let sum = z.l2_norm_sq();
    let m = p.mass();
    if sum >= m {
        return Err(Error::MassExceeded { sum, mass: m });
    }
    Ok((m - sum).sqrt())
}

/// Synthesize `alpha + z` on an `n` grid.
fn alpha_plus_z_grid(alpha: f64, z: &SpectralField, n: usize) -> GridField {
    let state = GaugeState {
        alpha,
        theta: 0.0,
        z: z.clone(),
    };
    gauge_reconstruct(&state, n)
}

/// Rate of the gauge angle:
/// `theta_dot = (1/alpha) Pi_0( g(|alpha+z|^2) Re(alpha+z) ) / hbar`.
pub fn theta_rate(state: &GaugeState, p: &ModelParams, n: usize) -> Result<f64> {
    if state.alpha <= 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let f = alpha_plus_z_grid(state.alpha, &state.z, n);
    let m = p.mass();
    let mean = f
        .data
        .iter()
        .map(|w| p.g_of_u(w.norm_sqr() - m) * w.re)
        .sum::<f64>()
        / f.len() as f64;
    Ok(mean / (p.hbar() * state.alpha))
}

/// Right-hand side of the closed equation for the reduced variable,
///
/// ```text
/// dz_j/dt = -i [ (hbar/2)|j|^2_a z_j + (1/hbar) (g(|alpha+z|^2)(alpha+z))_j
///                - (z_j / 2 alpha) dH/dalpha ],
/// ```
///
/// over all nonzero modes of the `n` grid. Used to cross-check that the
/// reduced flow and the gauge-reduced full flow agree.
pub fn reduced_rhs(z: &SpectralField, p: &ModelParams, n: usize) -> Result<SpectralField> {
    let nonlin = reduced_nonlinear_rhs(z, p, n)?;
    let mut out = nonlin;
    let half_hbar = 0.5 * p.hbar();
    for j in z.iter().map(|(j, _)| j.clone()).collect::<Vec<_>>() {
        let x = crate::lattice::anisotropic_norm_sq(&j, &z.shape);
        out.add_assign(&j, Complex64::new(0.0, -half_hbar * x) * z.get(&j));
    }
    Ok(out)
}

/// The non-diagonal part of [`reduced_rhs`] (everything except the
/// `-i (hbar/2)|j|^2_a z_j` rotation), for exponential integrators.
pub fn reduced_nonlinear_rhs(z: &SpectralField, p: &ModelParams, n: usize) -> Result<SpectralField> {
    let alpha = alpha_from_z(z, p)?;
    let d = z.shape.dim();
    let f = alpha_plus_z_grid(alpha, z, n);
    let m = p.mass();
    let inv_hbar = 1.0 / p.hbar();
    // dH/dalpha = (2/hbar) mean( g(|f|^2) Re f )
    let mut dh_dalpha = 0.0;
    let mut gbuf = Vec::with_capacity(f.len());
    for w in &f.data {
        let g = p.g_of_u(w.norm_sqr() - m);
        dh_dalpha += g * w.re;
        gbuf.push(g * w);
    }
    dh_dalpha *= 2.0 * inv_hbar / f.len() as f64;
    let mut engine = FftNd::new(n, d);
    engine.forward(&mut gbuf);
    let ghat = SpectralField::from_spectral_buf(&gbuf, &z.shape, n, n as i32 / 2, 0.0);

    let mut out = SpectralField::zero(z.shape.clone());
    let minus_i = Complex64::new(0.0, -1.0);
    let corr = dh_dalpha / (2.0 * alpha);
    for (j, c) in ghat.iter() {
        out.add_assign(j, minus_i * inv_hbar * c);
    }
    for (j, c) in z.iter() {
        out.add_assign(j, minus_i * (-corr) * c);
    }
    Ok(out)
}

/// Continue an angle sample next to a previous unwrapped value.
pub fn unwrap_phase(previous: f64, theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    theta + two_pi * ((previous - theta) / two_pi).round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn defaults() -> (TorusShape, ModelParams) {
        (
            TorusShape::new(vec![1.32, 1.74]).unwrap(),
            ModelParams::new(1.0, 1.0, vec![1.0]).unwrap(),
        )
    }

    fn small_pair(scale: f64, seed: u64) -> (RealFieldPair, TorusShape, ModelParams) {
        let (shape, p) = defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = random_pair(&shape, 16, 4, 3.0, &mut rng);
        let d0 = f.delta(&p, 6.0);
        f.scale(scale / d0);
        (f, shape, p)
    }

    #[test]
    fn forward_equilibrium_and_pure_gauge() {
        let (shape, p) = defaults();
        let n = 8;
        let zero = RealFieldPair::new(shape.clone(), n, vec![0.0; 64], vec![0.0; 64]).unwrap();
        let psi = madelung_forward(&zero, &p).unwrap();
        for z in &psi.data {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let gauge = RealFieldPair::new(shape, n, vec![0.0; 64], vec![0.7; 64]).unwrap();
        let psi = madelung_forward(&gauge, &p).unwrap();
        let want = Complex64::new(0.0, 0.7 / p.hbar()).exp();
        for z in &psi.data {
            assert!((z - want).norm() < 1e-15);
        }
    }

    #[test]
    fn forward_smallness_inequality() {
        // |psi - sqrt(m) e^{i sigma}|_{H^s} <= 2 sqrt(m) delta, sigma = Pi_0 phi
        for seed in 0..100u64 {
            let (f, shape, p) = small_pair(1e-3, seed);
            let psi = madelung_forward(&f, &p).unwrap();
            let sigma = f.phi_mean() / p.hbar();
            let base = p.mass().sqrt() * Complex64::new(0.0, sigma).exp();
            let mut diff = psi.clone();
            for z in diff.data.iter_mut() {
                *z -= base;
            }
            let w = crate::grid::sobolev_table(shape.dim(), 16, 6.0);
            let mut buf = diff.data;
            FftNd::new(16, shape.dim()).forward(&mut buf);
            let lhs = crate::grid::weighted_norm_sq(&buf, &w).sqrt();
            assert!(lhs <= 2.0 * p.mass().sqrt() * f.delta(&p, 6.0));
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let (f, _, p) = small_pair(1e-3, 42);
        let psi = madelung_forward(&f, &p).unwrap();
        let back = madelung_inverse(&psi, &p).unwrap();
        // rho recovered; phi recovered up to its mean
        let max_rho_err = f
            .rho
            .iter()
            .zip(&back.rho)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(max_rho_err < 1e-10);
        let mean_f = f.phi_mean();
        let mean_b = back.phi_mean();
        let max_phi_err = f
            .phi
            .iter()
            .zip(&back.phi)
            .fold(0.0f64, |m, (a, b)| m.max(((a - mean_f) - (b - mean_b)).abs()));
        assert!(max_phi_err < 1e-10);
    }

    #[test]
    fn inverse_rejects_vanishing_modulus() {
        let (shape, p) = defaults();
        let mut psi = GridField::constant(shape, 8, Complex64::new(1.0, 0.0));
        psi.data[5] = Complex64::new(0.0, 0.0);
        assert!(matches!(
            madelung_inverse(&psi, &p),
            Err(Error::VanishingModulus(_))
        ));
    }

    #[test]
    fn inverse_of_equilibrium() {
        let (shape, p) = defaults();
        let psi = GridField::constant(shape, 8, Complex64::new(1.0, 0.0));
        let f = madelung_inverse(&psi, &p).unwrap();
        assert!(f.rho.iter().all(|&r| r.abs() < 1e-15));
        assert!(f.phi.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn gauge_reduce_examples() {
        let (shape, p) = defaults();
        let m = p.mass();
        let psi = GridField::constant(shape.clone(), 8, Complex64::new(m.sqrt(), 0.0));
        let g = gauge_reduce(&psi).unwrap();
        assert!((g.alpha - m.sqrt()).abs() < 1e-15);
        assert_eq!(g.theta, 0.0);
        assert_eq!(g.z.support_len(), 0);
        // pure phase: psi_0 = alpha e^{-i theta} gives theta = -0.7 here
        let psi = GridField::constant(
            shape,
            8,
            m.sqrt() * Complex64::new(0.0, 0.7).exp(),
        );
        let g = gauge_reduce(&psi).unwrap();
        assert!((g.alpha - m.sqrt()).abs() < 1e-15);
        assert!((g.theta + 0.7).abs() < 1e-12);
    }

    #[test]
    fn gauge_parseval_and_reconstruction() {
        let (f, _, p) = small_pair(1e-2, 3);
        let psi = madelung_forward(&f, &p).unwrap();
        let g = gauge_reduce(&psi).unwrap();
        // rearrangement only: alpha^2 + sum |z_j|^2 = sum |psi_j|^2 = mass
        let total = g.alpha * g.alpha + g.z.l2_norm_sq();
        assert!((total - psi.mass()).abs() < 1e-12);
        let back = gauge_reconstruct(&g, 16);
        let max_err = psi
            .data
            .iter()
            .zip(&back.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(max_err < 1e-12);
    }

    #[test]
    fn alpha_from_z_examples() {
        let (shape, p) = defaults();
        let z = SpectralField::zero(shape.clone());
        assert_eq!(alpha_from_z(&z, &p).unwrap(), 1.0);
        let mut z1 = SpectralField::zero(shape.clone());
        z1.insert(
            LatticePoint::new(&[1, 0]).unwrap(),
            Complex64::new((0.5f64).sqrt(), 0.0),
        );
        assert!((alpha_from_z(&z1, &p).unwrap() - (0.5f64).sqrt()).abs() < 1e-15);
        let mut z2 = SpectralField::zero(shape);
        z2.insert(LatticePoint::new(&[1, 0]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(matches!(
            alpha_from_z(&z2, &p),
            Err(Error::MassExceeded { .. })
        ));
    }

    #[test]
    fn theta_rate_constant_fields() {
        let (shape, p) = defaults();
        // equilibrium is steady
        let eq = GaugeState {
            alpha: 1.0,
            theta: 0.0,
            z: SpectralField::zero(shape.clone()),
        };
        assert!(theta_rate(&eq, &p, 8).unwrap().abs() < 1e-15);
        // alpha = sqrt(m/2), g(rho) = rho - m: theta_dot = -m/(2 hbar)
        let st = GaugeState {
            alpha: (0.5f64).sqrt(),
            theta: 0.0,
            z: SpectralField::zero(shape),
        };
        let want = -1.0 / (2.0 * p.hbar());
        assert!((theta_rate(&st, &p, 8).unwrap() - want).abs() < 1e-14);
        // alpha = 0 rejected
        let bad = GaugeState {
            alpha: 0.0,
            theta: 0.0,
            z: SpectralField::zero(TorusShape::isotropic(2)),
        };
        assert!(matches!(theta_rate(&bad, &p, 8), Err(Error::ZeroAlpha)));
    }

    #[test]
    fn reduction_bounds() {
        // |z|_{H^s} <= 2 sqrt(m) delta  and the reverse control with factor 16
        for seed in 100..200u64 {
            let (f, _, p) = small_pair(1e-3, seed);
            let psi = madelung_forward(&f, &p).unwrap();
            let g = gauge_reduce(&psi).unwrap();
            let z_norm = g.z.h_s_norm(6.0);
            assert!(z_norm <= 2.0 * p.mass().sqrt() * f.delta(&p, 6.0));
            let back = madelung_inverse(&psi, &p).unwrap();
            assert!(back.delta(&p, 6.0) <= 16.0 * z_norm / p.mass().sqrt());
        }
    }

    #[test]
    fn unwrap_continuity() {
        let th = unwrap_phase(6.2, -0.05);
        assert!((th - (2.0 * std::f64::consts::PI - 0.05)).abs() < 1e-12);
        assert_eq!(unwrap_phase(0.1, 0.2), 0.2);
    }
}
