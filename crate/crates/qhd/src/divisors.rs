//! Small-divisor scans over the mode lattice.
//!
//! For momentum-conserving signed triples the quantity
//! `Omega = sigma_1 omega_1 + sigma_2 omega_2 + sigma_3 omega_3` is the
//! denominator of the normal-form construction. With the modes ordered by
//! `|.|_a`, two regimes matter:
//!
//! * equal signs on the two largest modes: `|Omega| >= omega_2 >= sqrt(kappa)`
//!   unconditionally;
//! * mixed signs: `|Omega|` can be small, and the scans fit the largest
//!   `gamma` with
//!   `kappa^{-1/2} |Omega| >= gamma / (mu_1^{d-1} log^{d+1}(1+mu_1^2) mu_3^M)`
//!   over a range of exponents `M`, reporting the worst offenders.
//!
//! Shapes carrying exactly degenerate frequency pairs (`|j|^2_a = |j'|^2_a`
//! with `j' != +-j`, e.g. any isotropic torus) are reported as resonant and
//! excluded from fitting: the separation of eigenvalues that the whole
//! construction relies on fails there. An exact zero divisor is likewise
//! flagged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dispersion::{omega_from_norm_sq, ModelParams, SignPattern};
use crate::error::{Error, Result};
use crate::lattice::{anisotropic_norm_sq, ball, LatticePoint, TorusShape};

pub const M_EXPONENTS: std::ops::RangeInclusive<i32> = 2..=12;
/// Exact-resonance detector: `|Omega| < RESONANCE_TOL * sqrt(kappa)`.
pub const RESONANCE_TOL: f64 = 1e-13;
/// Smallest acceptable fitted constant.
pub const GAMMA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    EqualSign,
    ThreeComparable,
    TwoLargeOneSmall,
}

/// One signed triple with its divisor, modes ordered by `|.|_a` descending.
#[derive(Debug, Clone)]
pub struct DivisorRecord {
    pub sigma: SignPattern,
    pub j: [LatticePoint; 3],
    pub omega_sum: f64,
    pub mu1: f64,
    pub mu3: f64,
    pub regime: Regime,
}

/// The paper's frequency-separation threshold `J(j_1, beta)`: a triple is
/// "two large, one small" when `|j_3|` falls below it.
pub fn separation_threshold(j1_norm: f64, beta: f64, gamma: f64, d: usize) -> f64 {
    let df = d as f64;
    let first = ((j1_norm * j1_norm - 4.0 * df * df * beta).abs()).sqrt() / (2.0 * df);
    let inner = if beta > 0.0 {
        let a = (gamma / (4.0 * beta * beta)).powf(1.0 / (df + 2.0));
        let b = (gamma / (2.0 * beta * beta * beta)).powf(1.0 / (df + 1.0));
        a.min(b)
    } else {
        f64::INFINITY
    };
    let envelope =
        (j1_norm.powf(4.0 - df) / (1.0 + j1_norm).ln().powf(df + 1.0)).powf(1.0 / (df + 2.0));
    first.min(inner * envelope)
}

/// Label a record. Equal signs on the two `|.|_a`-largest modes win
/// outright; otherwise the triple is "two large, one small" iff
/// `|j_3| < J(j_1, beta)` with the threshold above at the given `gamma`.
pub fn classify_regime(rec: &DivisorRecord, p: &ModelParams, gamma: f64) -> Regime {
    if rec.sigma.0[0] * rec.sigma.0[1] == 1 {
        return Regime::EqualSign;
    }
    let d = rec.j[0].dim();
    let j1 = rec.j[0].norm();
    let j3 = rec.j[2].norm();
    if j3 < separation_threshold(j1, p.beta(), gamma, d) {
        Regime::TwoLargeOneSmall
    } else {
        Regime::ThreeComparable
    }
}

fn order_by_aniso(
    legs: [(i8, LatticePoint); 3],
    shape: &TorusShape,
) -> [(i8, LatticePoint); 3] {
    let mut with_x: Vec<(f64, (i8, LatticePoint))> = legs
        .into_iter()
        .map(|l| (anisotropic_norm_sq(&l.1, shape), l))
        .collect();
    with_x.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1 .1.coords().cmp(b.1 .1.coords()))
            .then_with(|| b.1 .0.cmp(&a.1 .0))
    });
    let mut it = with_x.into_iter().map(|(_, l)| l);
    [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]
}

fn record_from_legs(
    legs: [(i8, LatticePoint); 3],
    shape: &TorusShape,
    p: &ModelParams,
    gamma: f64,
) -> DivisorRecord {
    let mut legs = order_by_aniso(legs, shape);
    if legs[0].0 < 0 {
        for l in legs.iter_mut() {
            l.0 = -l.0;
        }
    }
    let omega_sum: f64 = legs
        .iter()
        .map(|(s, j)| *s as f64 * omega_from_norm_sq(anisotropic_norm_sq(j, shape), p))
        .sum();
    let (mu1, _, mu3) =
        crate::lattice::mu_ordering(&legs[0].1, &legs[1].1, &legs[2].1);
    let sigma = SignPattern::new([legs[0].0, legs[1].0, legs[2].0]);
    let j = [legs[0].1.clone(), legs[1].1.clone(), legs[2].1.clone()];
    let mut rec = DivisorRecord {
        sigma,
        j,
        omega_sum,
        mu1,
        mu3,
        regime: Regime::EqualSign,
    };
    rec.regime = classify_regime(&rec, p, gamma);
    rec
}

/// Gamma used when labelling records in enumerations; re-classify with
/// [`classify_regime`] for campaign-fitted values.
pub const DEFAULT_REGIME_GAMMA: f64 = 1.0;

/// Every momentum-conserving signed class with modes in the sup-norm ball,
/// emitted once (permutations and the global sign flip identified).
/// Intended for modest `j_max`; the campaign paths stream instead.
pub fn enumerate_triples(
    j_max: i32,
    shape: &TorusShape,
    p: &ModelParams,
) -> Result<Vec<DivisorRecord>> {
    let points = ball(j_max, shape);
    let d = shape.dim();
    let mut seen: std::collections::HashSet<Vec<(i8, Vec<i32>)>> =
        std::collections::HashSet::new();
    let mut out = Vec::new();
    for j1 in &points {
        for j2 in &points {
            for (s2, s3) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                let coords: Vec<i32> = (0..d)
                    .map(|k| {
                        -(s3 as i32)
                            * (j1.coords()[k] + s2 as i32 * j2.coords()[k])
                    })
                    .collect();
                if coords.iter().all(|&x| x == 0) || coords.iter().any(|&x| x.abs() > j_max)
                {
                    continue;
                }
                let j3 = LatticePoint::new_unchecked(&coords);
                let rec = record_from_legs(
                    [(1, j1.clone()), (s2, j2.clone()), (s3, j3)],
                    shape,
                    p,
                    DEFAULT_REGIME_GAMMA,
                );
                let key: Vec<(i8, Vec<i32>)> = rec
                    .j
                    .iter()
                    .zip(rec.sigma.0)
                    .map(|(j, s)| (s, j.coords().to_vec()))
                    .collect();
                if seen.insert(key) {
                    out.push(rec);
                }
            }
        }
    }
    Ok(out)
}

/// Result of the lower-bound fit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundFit {
    pub gamma: f64,
    pub m_exp: i32,
    /// Worst triple per candidate exponent: `(m, gamma(m), description)`.
    pub worst: Vec<(i32, f64, String)>,
}

/// Scan-level summary: either a fit or a resonance report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanSummary {
    pub j_max: i32,
    pub a: Vec<f64>,
    pub triples_visited: u64,
    pub equal_sign_min: f64,
    pub mixed_min_abs: f64,
    pub resonance: Option<String>,
    pub fit: Option<BoundFit>,
}

struct FitReducer {
    gamma_per_m: Vec<f64>,
    worst_per_m: Vec<Option<(f64, String)>>,
    equal_sign_min: f64,
    mixed_min_abs: f64,
    resonant: Option<String>,
    visited: u64,
}

impl FitReducer {
    fn new() -> Self {
        let n = M_EXPONENTS.count();
        Self {
            gamma_per_m: vec![f64::INFINITY; n],
            worst_per_m: vec![None; n],
            equal_sign_min: f64::INFINITY,
            mixed_min_abs: f64::INFINITY,
            resonant: None,
            visited: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for i in 0..self.gamma_per_m.len() {
            if other.gamma_per_m[i] < self.gamma_per_m[i] {
                self.gamma_per_m[i] = other.gamma_per_m[i];
                self.worst_per_m[i] = other.worst_per_m[i].clone();
            }
        }
        self.equal_sign_min = self.equal_sign_min.min(other.equal_sign_min);
        self.mixed_min_abs = self.mixed_min_abs.min(other.mixed_min_abs);
        if self.resonant.is_none() {
            self.resonant = other.resonant;
        }
        self.visited += other.visited;
        self
    }
}

/// Exactly degenerate frequency pair in the ball, if any: modes with
/// identical `|j|^2_a` that are not related by per-axis reflections.
/// Reflection pairs such as `(1,1)` and `(1,-1)` share a frequency on
/// every diagonal anisotropy and never build a zero divisor on their own;
/// the obstruction is the extra coincidences of special shapes (any
/// isotropic torus has `(1,0)` against `(0,1)`). Exact in the rational
/// arithmetic carried by f64 sums.
pub fn find_degenerate_pair(
    j_max: i32,
    shape: &TorusShape,
) -> Option<(LatticePoint, LatticePoint)> {
    let points = ball(j_max, shape);
    // ordered buckets so the reported pair is stable across runs
    let mut by_norm: std::collections::BTreeMap<u64, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (i, j) in points.iter().enumerate() {
        let x = anisotropic_norm_sq(j, shape);
        by_norm.entry(x.to_bits()).or_default().push(i);
    }
    let abs_pattern =
        |j: &LatticePoint| -> Vec<i32> { j.coords().iter().map(|&x| x.abs()).collect() };
    for bucket in by_norm.values() {
        for (k, &i1) in bucket.iter().enumerate() {
            for &i2 in &bucket[k + 1..] {
                if abs_pattern(&points[i1]) != abs_pattern(&points[i2]) {
                    return Some((points[i1].clone(), points[i2].clone()));
                }
            }
        }
    }
    None
}

/// Streaming scan of all signed triples in the ball; fits the lower-bound
/// constant per exponent without materializing records. Parallel over rows
/// of the pair space; the reduction is a deterministic min.
pub fn scan_fit(j_max: i32, shape: &TorusShape, p: &ModelParams) -> ScanSummary {
    let a = shape.a().to_vec();
    if let Some((j1, j2)) = find_degenerate_pair(j_max, shape) {
        return ScanSummary {
            j_max,
            a,
            triples_visited: 0,
            equal_sign_min: f64::NAN,
            mixed_min_abs: f64::NAN,
            resonance: Some(format!(
                "degenerate frequencies: |{j1:?}|^2_a = |{j2:?}|^2_a"
            )),
            fit: None,
        };
    }
    let points = ball(j_max, shape);
    let d = shape.dim();
    let n_points = points.len();
    let x_a: Vec<f64> = points
        .iter()
        .map(|j| anisotropic_norm_sq(j, shape))
        .collect();
    let om: Vec<f64> = x_a.iter().map(|&x| omega_from_norm_sq(x, p)).collect();
    let eu: Vec<f64> = points.iter().map(|j| j.norm_sq()).collect();
    // box-indexed tables for the dependent third mode
    let side = (2 * j_max + 1) as usize;
    let box_len = side.pow(d as u32);
    let mut box_x = vec![-1.0f64; box_len];
    let mut box_om = vec![0.0f64; box_len];
    let mut box_eu = vec![0.0f64; box_len];
    let box_index = |coords: &[i32]| -> usize {
        let mut idx = 0usize;
        for &c in coords {
            idx = idx * side + (c + j_max) as usize;
        }
        idx
    };
    for (i, j) in points.iter().enumerate() {
        let idx = box_index(j.coords());
        box_x[idx] = x_a[i];
        box_om[idx] = om[i];
        box_eu[idx] = eu[i];
    }
    let rk = p.kappa().sqrt();
    let inv_rk = 1.0 / rk;
    let m_lo = *M_EXPONENTS.start();
    let m_hi = *M_EXPONENTS.end();

    let reducer = (0..n_points)
        .into_par_iter()
        .fold(FitReducer::new, |mut red, i1| {
            let j1 = &points[i1];
            let c1 = j1.coords();
            let mut coords = vec![0i32; d];
            for i2 in i1..n_points {
                let j2 = &points[i2];
                let c2 = j2.coords();
                for (s2, s3) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                    let mut zero = true;
                    let mut in_box = true;
                    for k in 0..d {
                        let v = -(s3 as i32) * (c1[k] + s2 as i32 * c2[k]);
                        if v != 0 {
                            zero = false;
                        }
                        if v.abs() > j_max {
                            in_box = false;
                            break;
                        }
                        coords[k] = v;
                    }
                    if zero || !in_box {
                        continue;
                    }
                    let bi = box_index(&coords);
                    let x3 = box_x[bi];
                    red.visited += 1;
                    // order the three (sign, x, omega, |j|^2) rows by x desc
                    let mut rows = [
                        (1.0f64, x_a[i1], om[i1], eu[i1]),
                        (s2 as f64, x_a[i2], om[i2], eu[i2]),
                        (s3 as f64, x3, box_om[bi], box_eu[bi]),
                    ];
                    rows.sort_by(|p, q| q.1.partial_cmp(&p.1).unwrap());
                    let omega_sum = rows[0].0 * rows[0].2 + rows[1].0 * rows[1].2
                        + rows[2].0 * rows[2].2;
                    let abs = omega_sum.abs();
                    if abs < RESONANCE_TOL * rk && red.resonant.is_none() {
                        red.resonant = Some(format!(
                            "zero divisor {omega_sum:.3e} at ({:?}, {:?}, s2={s2}, s3={s3})",
                            j1, j2
                        ));
                    }
                    if rows[0].0 * rows[1].0 > 0.0 {
                        red.equal_sign_min = red.equal_sign_min.min(abs);
                    } else {
                        red.mixed_min_abs = red.mixed_min_abs.min(abs);
                        let mu1sq = rows[0].3.max(rows[1].3).max(rows[2].3);
                        let mu3sq = rows[0].3.min(rows[1].3).min(rows[2].3);
                        let mu1 = mu1sq.sqrt();
                        let mu3 = mu3sq.sqrt();
                        let df = d as f64;
                        let base = inv_rk
                            * abs
                            * mu1.powf(df - 1.0)
                            * (1.0 + mu1sq).ln().powi(d as i32 + 1);
                        let mut weight = base * mu3 * mu3; // m = 2
                        for m in m_lo..=m_hi {
                            let slot = (m - m_lo) as usize;
                            if weight < red.gamma_per_m[slot] {
                                red.gamma_per_m[slot] = weight;
                                red.worst_per_m[slot] = Some((
                                    weight,
                                    format!(
                                        "j1={:?} j2={:?} s2={s2} s3={s3} |Omega|={abs:.6e}",
                                        j1, j2
                                    ),
                                ));
                            }
                            weight *= mu3;
                        }
                    }
                }
            }
            red
        })
        .reduce(FitReducer::new, FitReducer::merge);

    if let Some(r) = reducer.resonant {
        return ScanSummary {
            j_max,
            a,
            triples_visited: reducer.visited,
            equal_sign_min: reducer.equal_sign_min,
            mixed_min_abs: reducer.mixed_min_abs,
            resonance: Some(r),
            fit: None,
        };
    }

    let mut worst = Vec::new();
    let mut chosen: Option<(i32, f64)> = None;
    for m in M_EXPONENTS {
        let slot = (m - m_lo) as usize;
        let gamma = reducer.gamma_per_m[slot];
        if let Some((g, desc)) = &reducer.worst_per_m[slot] {
            worst.push((m, *g, desc.clone()));
        }
        if chosen.is_none() && gamma.is_finite() && gamma >= GAMMA_FLOOR {
            chosen = Some((m, gamma));
        }
    }
    // fall back to the largest exponent when nothing clears the floor
    let (m_exp, gamma) = chosen.unwrap_or_else(|| {
        let slot = (m_hi - m_lo) as usize;
        (m_hi, reducer.gamma_per_m[slot])
    });
    ScanSummary {
        j_max,
        a,
        triples_visited: reducer.visited,
        equal_sign_min: reducer.equal_sign_min,
        mixed_min_abs: reducer.mixed_min_abs,
        resonance: None,
        fit: Some(BoundFit {
            gamma,
            m_exp,
            worst,
        }),
    }
}

/// Fit over materialized records (same rule as [`scan_fit`]): for each
/// exponent the largest violation-free `gamma`, then the smallest exponent
/// whose `gamma` clears the floor.
pub fn fit_lower_bound(records: &[DivisorRecord], d: usize, kappa: f64) -> Result<BoundFit> {
    let rk = kappa.sqrt();
    let m_lo = *M_EXPONENTS.start();
    let n = M_EXPONENTS.count();
    let mut gamma_per_m = vec![f64::INFINITY; n];
    let mut worst_per_m: Vec<Option<String>> = vec![None; n];
    for rec in records {
        let abs = rec.omega_sum.abs();
        if rec.sigma.0[0] * rec.sigma.0[1] == 1 {
            continue;
        }
        if abs < RESONANCE_TOL * rk {
            return Err(Error::ExactResonance(format!(
                "zero divisor at sigma={:?} j={:?}",
                rec.sigma, rec.j
            )));
        }
        let df = d as f64;
        let base = abs / rk
            * rec.mu1.powf(df - 1.0)
            * (1.0 + rec.mu1 * rec.mu1).ln().powi(d as i32 + 1);
        let mut weight = base * rec.mu3 * rec.mu3;
        for m in M_EXPONENTS {
            let slot = (m - m_lo) as usize;
            if weight < gamma_per_m[slot] {
                gamma_per_m[slot] = weight;
                worst_per_m[slot] = Some(format!("sigma={:?} j={:?}", rec.sigma, rec.j));
            }
            weight *= rec.mu3;
        }
    }
    let mut worst = Vec::new();
    let mut chosen = None;
    for m in M_EXPONENTS {
        let slot = (m - m_lo) as usize;
        if let Some(desc) = &worst_per_m[slot] {
            worst.push((m, gamma_per_m[slot], desc.clone()));
        }
        if chosen.is_none() && gamma_per_m[slot].is_finite() && gamma_per_m[slot] >= GAMMA_FLOOR
        {
            chosen = Some((m, gamma_per_m[slot]));
        }
    }
    let (m_exp, gamma) =
        chosen.unwrap_or((*M_EXPONENTS.end(), gamma_per_m[n - 1]));
    Ok(BoundFit {
        gamma,
        m_exp,
        worst,
    })
}

/// Smallest `kappa^{-1/2}|Omega| mu_1^{d-1} log^{d+1}(1+mu_1^2)` over
/// mixed-sign triples with `mu_3 <= mu3_cap` and `mu_1` inside the dyadic
/// window `(j_hi/2, j_hi]`. The uniformity of this quantity across windows
/// is the finite-size content of the two-large-one-small estimate.
pub fn window_minimum(
    j_hi: i32,
    mu3_cap: f64,
    shape: &TorusShape,
    p: &ModelParams,
) -> f64 {
    let d = shape.dim();
    let small = ball(mu3_cap.floor() as i32, shape);
    let big = ball(j_hi, shape);
    let rk = p.kappa().sqrt();
    let lo = (j_hi as f64) / 2.0;
    let hi = j_hi as f64;
    big.par_iter()
        .fold(
            || f64::INFINITY,
            |mut best, j1| {
                for j3 in &small {
                    if j3.norm() > mu3_cap {
                        continue;
                    }
                    for (s2, s3) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                        let coords: Vec<i32> = (0..d)
                            .map(|k| {
                                -(s2 as i32)
                                    * (j1.coords()[k] + s3 as i32 * j3.coords()[k])
                            })
                            .collect();
                        if coords.iter().all(|&x| x == 0)
                            || coords.iter().any(|&x| x.abs() > j_hi)
                        {
                            continue;
                        }
                        let j2 = LatticePoint::new_unchecked(&coords);
                        let rec = record_from_legs(
                            [(1, j1.clone()), (s2, j2), (s3, j3.clone())],
                            shape,
                            p,
                            DEFAULT_REGIME_GAMMA,
                        );
                        if rec.sigma.0[0] * rec.sigma.0[1] == 1 {
                            continue;
                        }
                        if rec.mu3 > mu3_cap || rec.mu1 <= lo || rec.mu1 > hi {
                            continue;
                        }
                        let w = rec.omega_sum.abs() / rk
                            * rec.mu1.powf(d as f64 - 1.0)
                            * (1.0 + rec.mu1 * rec.mu1).ln().powi(d as i32 + 1);
                        best = best.min(w);
                    }
                }
                best
            },
        )
        .reduce(|| f64::INFINITY, f64::min)
}

/// Monte Carlo measure estimate: the fraction of uniformly sampled
/// `a in (1,4)^d` with `|Omega(a)| <= gamma`, per grid value. Monotone in
/// `gamma` by construction and reproducible under a fixed seed.
pub fn measure_estimate(
    sigma: SignPattern,
    j: [&LatticePoint; 3],
    gamma_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let d = j[0].dim();
    for k in 0..d {
        let s: i64 = (0..3)
            .map(|i| sigma.0[i] as i64 * j[i].coords()[k] as i64)
            .sum();
        if s != 0 {
            return Err(Error::MomentumViolation);
        }
    }
    if samples < 1000 {
        return Err(Error::Config(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples);
    let kappa = 1.0;
    let mgp = 1.0;
    for _ in 0..samples {
        let a: Vec<f64> = (0..d).map(|_| 1.0 + 3.0 * rng.gen::<f64>()).collect();
        let mut total = 0.0;
        for i in 0..3 {
            let x: f64 = j[i]
                .coords()
                .iter()
                .zip(&a)
                .map(|(&c, &ak)| ak * (c as f64) * (c as f64))
                .sum();
            total += sigma.0[i] as f64 * (kappa * x * x + mgp * x).sqrt();
        }
        values.push(total.abs());
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let out = gamma_grid
        .iter()
        .map(|&g| {
            let count = values.partition_point(|&v| v <= g);
            (g, count as f64 / samples as f64)
        })
        .collect();
    Ok(out)
}

/// Least-squares slope of `ln(fraction)` against `ln(gamma)` over the
/// points with fraction strictly inside `(0, 1)`.
pub fn loglog_slope(table: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|&&(g, f)| g > 0.0 && f > 0.0 && f < 1.0)
        .map(|&(g, f)| (g.ln(), f.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Config(
            "not enough interior points for a slope fit".into(),
        ));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
