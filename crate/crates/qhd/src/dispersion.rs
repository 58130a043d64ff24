//! Linear dispersion relation and signed small divisors.
//!
//! After the gauge reduction and the per-mode symplectic change of
//! variables the linearized flow is diagonal with frequencies
//!
//! ```text
//! omega(j) = sqrt( kappa |j|^4_a + m g'(m) |j|^2_a ),
//! ```
//!
//! where `kappa = hbar^2/4`. Combinations `sum_i sigma_i omega(j_i)` over
//! momentum-conserving triples are the denominators of the normal-form
//! construction; their lower bounds are what the divisor scans measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{anisotropic_norm_sq, LatticePoint, TorusShape};

/// Physical constants and the nonlinearity `g`, stored as a power series at
/// the mean density: `g(m + u) = sum_{k>=1} g_k u^k` (so `g(m) = 0` by
/// construction). `hbar = 2 sqrt(kappa)` and `beta = m g'(m) / kappa` are
/// cached at construction and consumed everywhere else; no formula
/// recomputes them independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    kappa: f64,
    hbar: f64,
    mass: f64,
    g_coeffs: Vec<f64>,
    beta: f64,
}

impl ModelParams {
    pub fn new(kappa: f64, mass: f64, g_coeffs: Vec<f64>) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::BadParams(format!("kappa = {kappa} must be > 0")));
        }
        if !(mass > 0.0) {
            return Err(Error::BadParams(format!("mass = {mass} must be > 0")));
        }
        let g1 = g_coeffs.first().copied().unwrap_or(0.0);
        if !(g1 > 0.0) {
            return Err(Error::BadParams(format!(
                "ellipticity requires g'(m) > 0, got g_1 = {g1}"
            )));
        }
        let hbar = 2.0 * kappa.sqrt();
        let beta = mass * g1 / kappa;
        Ok(Self {
            kappa,
            hbar,
            mass,
            g_coeffs,
            beta,
        })
    }

    /// `g'(m) = 0` configuration. Violates ellipticity; the linearization
    /// is already diagonal and several identities degenerate exactly, which
    /// makes it useful as a unit-test limit. Rejected by the experiment
    /// configuration loader.
    pub fn degenerate(kappa: f64, mass: f64) -> Result<Self> {
        if !(kappa > 0.0 && mass > 0.0) {
            return Err(Error::BadParams("kappa, mass must be > 0".into()));
        }
        Ok(Self {
            kappa,
            hbar: 2.0 * kappa.sqrt(),
            mass,
            g_coeffs: Vec::new(),
            beta: 0.0,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn g_coeffs(&self) -> &[f64] {
        &self.g_coeffs
    }

    /// `g'(m)`, the first series coefficient.
    pub fn g_prime_m(&self) -> f64 {
        self.g_coeffs.first().copied().unwrap_or(0.0)
    }

    /// `g''(m) = 2 g_2`.
    pub fn g_second_m(&self) -> f64 {
        2.0 * self.g_coeffs.get(1).copied().unwrap_or(0.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `g(m + u)` by Horner evaluation of the series.
    pub fn g_of_u(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &gk in self.g_coeffs.iter().rev() {
            acc = (acc + gk) * u;
        }
        acc
    }

    /// `G(m + u) - G(m)` where `G' = g`: the antiderivative
    /// `sum_k g_k u^{k+1} / (k+1)`.
    pub fn g_antiderivative_of_u(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &gk) in self.g_coeffs.iter().enumerate().rev() {
            acc = (acc + gk / (k as f64 + 2.0)) * u;
        }
        acc * u
    }
}

/// Signs attached to the three legs of a trilinear monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern(pub [i8; 3]);

impl SignPattern {
    pub fn new(s: [i8; 3]) -> Self {
        assert!(s.iter().all(|&x| x == 1 || x == -1));
        Self(s)
    }

    pub fn flipped(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Frequency from the squared anisotropic norm; shared by the table-driven
/// scan paths.
#[inline]
pub fn omega_from_norm_sq(x: f64, p: &ModelParams) -> f64 {
    (x * (p.kappa() * x + p.mass() * p.g_prime_m())).sqrt()
}

/// Dispersion relation `omega(j)`; even and strictly increasing in
/// `|j|^2_a`.
pub fn omega(j: &LatticePoint, shape: &TorusShape, p: &ModelParams) -> f64 {
    omega_from_norm_sq(anisotropic_norm_sq(j, shape), p)
}

/// Three-term expansion `sqrt(kappa) (|j|^2_a + beta/2 - beta^2 / (8 |j|^2_a))`.
///
/// Test oracle only: the remainder is `O(beta^3 / |j|^4_a)` and the
/// expansion is meaningless unless `|j|^2_a > beta`.
pub fn omega_asymptotic(j: &LatticePoint, shape: &TorusShape, p: &ModelParams) -> Result<f64> {
    let x = anisotropic_norm_sq(j, shape);
    let beta = p.beta();
    if x <= beta {
        return Err(Error::AsymptoticDomain { x, beta });
    }
    Ok(p.kappa().sqrt() * (x + beta / 2.0 - beta * beta / (8.0 * x)))
}

/// Signed divisor `sum_i sigma_i omega(j_i)` on a momentum-conserving
/// triple. Errors if `sigma_1 j_1 + sigma_2 j_2 + sigma_3 j_3 != 0`.
pub fn small_divisor(
    sigma: SignPattern,
    j1: &LatticePoint,
    j2: &LatticePoint,
    j3: &LatticePoint,
    shape: &TorusShape,
    p: &ModelParams,
) -> Result<f64> {
    let d = shape.dim();
    for k in 0..d {
        let s = sigma.0[0] as i64 * j1.coords()[k] as i64
            + sigma.0[1] as i64 * j2.coords()[k] as i64
            + sigma.0[2] as i64 * j3.coords()[k] as i64;
        if s != 0 {
            return Err(Error::MomentumViolation);
        }
    }
    Ok(sigma.0[0] as f64 * omega(j1, shape, p)
        + sigma.0[1] as f64 * omega(j2, shape, p)
        + sigma.0[2] as f64 * omega(j3, shape, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ball;

    fn p2(c: &[i32]) -> LatticePoint {
        LatticePoint::new(c).unwrap()
    }

    fn defaults() -> (TorusShape, ModelParams) {
        (
            TorusShape::isotropic(2),
            ModelParams::new(1.0, 1.0, vec![1.0]).unwrap(),
        )
    }

    #[test]
    fn omega_unit_examples() {
        let (sh, p) = defaults();
        assert!((omega(&p2(&[1, 0]), &sh, &p) - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((omega(&p2(&[2, 0]), &sh, &p) - 20.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn omega_direct_formula_oracle() {
        // independent one-line evaluation of the defining square root
        let sh = TorusShape::new(vec![1.3, 1.7]).unwrap();
        let p = ModelParams::new(0.25, 1.0, vec![1.0]).unwrap();
        let x: f64 = 1.3 + 1.7;
        let expected = (0.25 * x * x + 1.0 * 1.0 * x).sqrt();
        assert!((omega(&p2(&[1, 1]), &sh, &p) - expected).abs() < 1e-15);
        // same point cross-checked against the expansion at a larger mode,
        // where the remainder bound beta^3/|j|^4_a applies (beta = 4 here)
        let j = p2(&[6, 6]);
        let xa = anisotropic_norm_sq(&j, &sh);
        let asym = omega_asymptotic(&j, &sh, &p).unwrap();
        let beta = p.beta();
        assert!((omega(&j, &sh, &p) - asym).abs() <= p.kappa().sqrt() * beta.powi(3) / (8.0 * xa * xa));
    }

    #[test]
    fn asymptotic_domain_and_remainder() {
        let (sh, p) = defaults();
        // beta = 0 degenerate limit: expansion is exact
        let free = ModelParams::degenerate(1.0, 1.0).unwrap();
        let j = p2(&[3, 1]);
        assert_eq!(
            omega_asymptotic(&j, &sh, &free).unwrap(),
            omega(&j, &sh, &free)
        );
        // remainder at |j| = 10, beta = 1
        let j10 = p2(&[10, 0]);
        let asym = omega_asymptotic(&j10, &sh, &p).unwrap();
        assert!((omega(&j10, &sh, &p) - asym).abs() <= 1.0 / (8.0 * 1e4));
        // the error branch is not taken once |j|^2_a >= 4 beta
        for j in ball(8, &sh) {
            if anisotropic_norm_sq(&j, &sh) >= 4.0 * p.beta() {
                assert!(omega_asymptotic(&j, &sh, &p).is_ok());
            }
        }
        // and it is taken at |j|^2_a = beta
        assert!(omega_asymptotic(&p2(&[1, 0]), &sh, &p).is_err());
    }

    #[test]
    fn small_divisor_example() {
        let (sh, p) = defaults();
        let d = small_divisor(
            SignPattern::new([1, -1, -1]),
            &p2(&[2, 0]),
            &p2(&[1, 0]),
            &p2(&[1, 0]),
            &sh,
            &p,
        )
        .unwrap();
        assert!((d - (20.0_f64.sqrt() - 2.0 * 2.0_f64.sqrt())).abs() < 1e-14);
        // momentum violation rejected
        assert!(small_divisor(
            SignPattern::new([1, 1, 1]),
            &p2(&[2, 0]),
            &p2(&[1, 0]),
            &p2(&[1, 0]),
            &sh,
            &p
        )
        .is_err());
    }

    #[test]
    fn evenness_and_bounds() {
        let sh = TorusShape::new(vec![1.32, 1.74]).unwrap();
        let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();
        let rk = p.kappa().sqrt();
        let beta = p.beta();
        for j in ball(16, &sh) {
            let w = omega(&j, &sh, &p);
            assert_eq!(w, omega(&j.neg(), &sh, &p));
            let x = anisotropic_norm_sq(&j, &sh);
            assert!(w >= rk * x - 1e-12);
            if x >= 1.0 {
                assert!(w <= rk * x * (1.0 + beta).sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn all_plus_divisors_bounded_below() {
        let (sh, p) = defaults();
        // sigma = (+,+,+): no cancellation, value >= 3 omega_min
        let omega_min = omega(&p2(&[1, 0]), &sh, &p);
        for j1 in ball(3, &sh) {
            for j2 in ball(3, &sh) {
                let s: Vec<i32> = j1
                    .coords()
                    .iter()
                    .zip(j2.coords())
                    .map(|(&a, &b)| -(a + b))
                    .collect();
                if s.iter().all(|&x| x == 0) {
                    continue;
                }
                let j3 = LatticePoint::new(&s).unwrap();
                let d = small_divisor(SignPattern::new([1, 1, 1]), &j1, &j2, &j3, &sh, &p).unwrap();
                assert!(d >= 3.0 * omega_min - 1e-12);
            }
        }
    }

    #[test]
    fn params_invariants() {
        let p = ModelParams::new(0.25, 2.0, vec![0.5, 0.1]).unwrap();
        assert_eq!(p.hbar(), 2.0 * 0.25_f64.sqrt());
        assert_eq!(p.beta(), 2.0 * 0.5 / 0.25);
        assert!(ModelParams::new(1.0, 1.0, vec![]).is_err());
        assert!(ModelParams::new(1.0, 1.0, vec![-1.0]).is_err());
        // series evaluation: g(m+u) = u + 0.2 u^2 at g = [1, 0.2]
        let q = ModelParams::new(1.0, 1.0, vec![1.0, 0.2]).unwrap();
        let u = 0.3;
        assert!((q.g_of_u(u) - (u + 0.2 * u * u)).abs() < 1e-15);
        // antiderivative: u^2/2 + 0.2 u^3/3
        assert!((q.g_antiderivative_of_u(u) - (u * u / 2.0 + 0.2 * u * u * u / 3.0)).abs() < 1e-15);
    }
}
