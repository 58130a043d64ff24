//! The modified energy `E_s = N_s + E_3`.
//!
//! The correction is assembled from the cubic table in diagonalizing
//! variables, split by the sign of the two largest modes and truncated in
//! the second-largest frequency:
//!
//! ```text
//! E_3^{(+1)} = ad^{-1} { N_s, K~^{(3,+1)} },
//! E_3^{(-1)} = ad^{-1} { N_s, (K~^{(3,-1)})^{<=N} },
//! ```
//!
//! so that `{N_s, K~^3} + {E_3, K~^2} = {N_s, (K~^{(3,-1)})^{>N}}` holds
//! coefficient by coefficient. The residual of that identity is the
//! strongest single check on the whole coefficient algebra; it is reported
//! normalized per coefficient (the raw terms reach `mu_1^{2s}` in size, so
//! an absolute residual would just measure the float exponent range).

use serde::Serialize;

use crate::dispersion::ModelParams;
use crate::error::{Error, Result};
use crate::lattice::TorusShape;
use crate::spectral::SpectralField;
use crate::trilinear::{
    ad_inverse, min_divisor, poisson_with_diagonal, split_sign, split_truncate,
    QuadraticDiagonal, TrilinearHamiltonian,
};

/// Construction record kept alongside `E_3`.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub j_max: i32,
    pub floor: f64,
    pub min_divisor: f64,
}

#[derive(Debug, Clone)]
pub struct ModifiedEnergy {
    pub s: f64,
    pub n_cutoff: f64,
    pub e3: TrilinearHamiltonian,
    pub provenance: Provenance,
}

/// Default resonance floor used when constructing `E_3`.
pub fn default_floor(p: &ModelParams) -> f64 {
    1e-12 * p.kappa().sqrt()
}

/// Build `E_3` from the cubic table in `w` variables.
pub fn build_e3(
    k3_w: &TrilinearHamiltonian,
    s: f64,
    n_cutoff: f64,
    shape: &TorusShape,
    p: &ModelParams,
    floor: f64,
) -> Result<ModifiedEnergy> {
    let (kp, km) = split_sign(k3_w);
    let (km_lo, _) = split_truncate(&km, n_cutoff);
    let target = kp.add(&km_lo);
    let ns = QuadraticDiagonal::Sobolev { s };
    let q = poisson_with_diagonal(&ns, &target);
    let e3 = ad_inverse(&q, shape, p, floor)?;
    let md = if target.is_empty() {
        f64::INFINITY
    } else {
        min_divisor(&target, shape, p)
    };
    Ok(ModifiedEnergy {
        s,
        n_cutoff,
        e3,
        provenance: Provenance {
            j_max: k3_w.j_max,
            floor,
            min_divisor: md,
        },
    })
}

/// Max normalized coefficient residual of
/// `{N_s, K~^3} + {E_3, K~^2} - {N_s, (K~^{(3,-1)})^{>N}}`.
pub fn verify_cancellation(
    k3_w: &TrilinearHamiltonian,
    me: &ModifiedEnergy,
    shape: &TorusShape,
    p: &ModelParams,
) -> f64 {
    let ns = QuadraticDiagonal::Sobolev { s: me.s };
    let omega = QuadraticDiagonal::Omega {
        shape: shape.clone(),
        params: p.clone(),
    };
    let lhs1 = poisson_with_diagonal(&ns, k3_w);
    // {E_3, K~^2} = -ad_{K~^2} E_3
    let lhs2 = poisson_with_diagonal(&omega, &me.e3).neg();
    let (_, km) = split_sign(k3_w);
    let (_, km_hi) = split_truncate(&km, me.n_cutoff);
    let rhs = poisson_with_diagonal(&ns, &km_hi);

    let mut keys: std::collections::HashSet<_> = lhs1.iter().map(|(k, _)| k.clone()).collect();
    keys.extend(lhs2.iter().map(|(k, _)| k.clone()));
    keys.extend(rhs.iter().map(|(k, _)| k.clone()));
    let mut worst = 0.0f64;
    for key in keys {
        let a = lhs1.get(&key);
        let b = lhs2.get(&key);
        let c = rhs.get(&key);
        let resid = (a + b - c).norm();
        let scale = a.norm().max(b.norm()).max(c.norm()).max(1.0);
        worst = worst.max(resid / scale);
    }
    worst
}

/// `E_s(w) = N_s(w) + E_3(w)`.
pub fn energy_value(me: &ModifiedEnergy, w: &SpectralField) -> f64 {
    w.h_s_norm_sq(me.s) + me.e3.evaluate(w)
}

/// Fitted constant of the coefficient growth bound: the maximum over the
/// support of `|E_3| / (N^{d-2} log^{d+1}(1+N) mu_3^{M+1} mu_1^{2s})`.
pub fn e3_bound_constant(me: &ModifiedEnergy, d: usize, m_exp: f64) -> f64 {
    let n = me.n_cutoff;
    let envelope = n.powi(d as i32 - 2) * (1.0 + n).ln().powi(d as i32 + 1);
    let mut worst = 0.0f64;
    for (key, c) in me.e3.iter() {
        let (mu1, _, mu3) = key.mus();
        let denom = envelope * mu3.powf(m_exp + 1.0) * mu1.powf(2.0 * me.s);
        worst = worst.max(c.norm() / denom);
    }
    worst
}

/// One row of a drift series.
#[derive(Debug, Clone, Serialize)]
pub struct DriftSample {
    pub t: f64,
    pub e_s: f64,
    pub n_s: f64,
    pub de_dt: f64,
    pub dn_dt: f64,
}

/// Centered time derivatives of `E_s` and `N_s` along sampled states.
/// Needs at least three samples; derivative rows cover the interior ones.
pub fn drift_series(
    me: &ModifiedEnergy,
    samples: &[(f64, SpectralField)],
) -> Result<Vec<DriftSample>> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: samples.len(),
        });
    }
    let values: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|(t, w)| {
            let n_s = w.h_s_norm_sq(me.s);
            (*t, n_s + me.e3.evaluate(w), n_s)
        })
        .collect();
    let mut out = Vec::with_capacity(values.len() - 2);
    for i in 1..values.len() - 1 {
        let (t0, e0, n0) = values[i - 1];
        let (t1, e1, n1) = values[i];
        let (t2, e2, n2) = values[i + 1];
        let dt = t2 - t0;
        out.push(DriftSample {
            t: t1,
            e_s: e1,
            n_s: n1,
            de_dt: (e2 - e0) / dt,
            dn_dt: (n2 - n0) / dt,
        });
    }
    Ok(out)
}
