//! Divisor campaign: lower-bound fits over sampled shapes, the isotropic
//! resonance report, Monte Carlo measure estimates, and the dyadic-window
//! uniformity check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dispersion::SignPattern;
use crate::divisors::{
    enumerate_triples, loglog_slope, measure_estimate, scan_fit, window_minimum, Regime,
    ScanSummary,
};
use crate::error::Result;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::io;
use crate::lattice::{LatticePoint, TorusShape};

#[derive(Debug, Clone, Serialize)]
pub struct DivisorReport {
    pub schema: String,
    pub shapes: Vec<ScanSummary>,
    pub isotropic: ScanSummary,
    pub fitted: usize,
    pub resonant: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub equal_sign_floor: f64,
    pub measure_slope: f64,
    pub windows: Vec<(i32, f64)>,
}

/// Fixed momentum-conserving probe for the measure estimate; its divisor
/// changes sign inside `(1,4)^2`, so the zero set is a genuine curve.
pub fn default_measure_triple() -> (SignPattern, [LatticePoint; 3]) {
    (
        SignPattern::new([1, -1, -1]),
        [
            LatticePoint::new(&[3, 1]).unwrap(),
            LatticePoint::new(&[1, 2]).unwrap(),
            LatticePoint::new(&[2, -1]).unwrap(),
        ],
    )
}

pub fn run_divisors(cfg: &ExperimentConfig, out_dir: &std::path::Path) -> Result<DivisorReport> {
    let p = cfg.params()?;
    let d = cfg.dim;
    let seed = cfg.seeds[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summaries = Vec::with_capacity(cfg.n_shapes);
    for _ in 0..cfg.n_shapes {
        let a: Vec<f64> = (0..d).map(|_| 1.0 + 3.0 * rng.gen::<f64>()).collect();
        let shape = TorusShape::new(a).expect("sampled weights lie in (1,4)");
        summaries.push(scan_fit(cfg.divisor_j_max, &shape, &p));
    }
    let isotropic = scan_fit(cfg.divisor_j_max.min(12), &TorusShape::isotropic(d), &p);

    // near-resonant records on the configured shape, for offline inspection
    let shape0 = cfg.shape()?;
    let threshold = cfg.report_threshold * p.kappa().sqrt();
    let mut records = enumerate_triples(cfg.j_max.min(12), &shape0, &p)?;
    records.retain(|r| r.omega_sum.abs() < threshold || r.regime == Regime::EqualSign);
    records.sort_by(|a, b| {
        a.omega_sum
            .abs()
            .partial_cmp(&b.omega_sum.abs())
            .unwrap()
            .then_with(|| format!("{:?}", a.j).cmp(&format!("{:?}", b.j)))
    });
    io::write_csv(
        out_dir,
        "divisor_records",
        "sigma1,sigma2,sigma3,j1,j2,j3,omega_sum,mu1,mu3,regime",
        records.iter().map(|r| {
            format!(
                "{},{},{},\"{:?}\",\"{:?}\",\"{:?}\",{},{},{},{:?}",
                r.sigma.0[0],
                r.sigma.0[1],
                r.sigma.0[2],
                r.j[0],
                r.j[1],
                r.j[2],
                r.omega_sum,
                r.mu1,
                r.mu3,
                r.regime
            )
        }),
    )?;

    // measure estimate on the fixed probe
    let (sigma, triple) = default_measure_triple();
    let grid = cfg.mc_gamma_grid();
    let table = measure_estimate(
        sigma,
        [&triple[0], &triple[1], &triple[2]],
        &grid,
        cfg.mc_samples,
        seed,
    )?;
    io::write_csv(
        out_dir,
        "measure",
        "gamma,fraction",
        table.iter().map(|(g, f)| format!("{g},{f}")),
    )?;
    let measure_slope = loglog_slope(&table)?;

    // dyadic windows of the two-large-one-small bound
    let windows: Vec<(i32, f64)> = [20, 40, 60]
        .iter()
        .map(|&j| (j, window_minimum(j, 2.0, &shape0, &p)))
        .collect();

    io::write_csv(
        out_dir,
        "divisor_fits",
        "a,status,gamma,m,equal_sign_min,mixed_min_abs,triples",
        summaries.iter().chain([&isotropic]).map(|s| {
            let a = s
                .a
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            match (&s.resonance, &s.fit) {
                (Some(r), _) => format!(
                    "\"{a}\",resonant: {r},,,{},{},{}",
                    s.equal_sign_min, s.mixed_min_abs, s.triples_visited
                ),
                (None, Some(f)) => format!(
                    "\"{a}\",fitted,{},{},{},{},{}",
                    f.gamma, f.m_exp, s.equal_sign_min, s.mixed_min_abs, s.triples_visited
                ),
                (None, None) => format!("\"{a}\",empty,,,,,{}", s.triples_visited),
            }
        }),
    )?;

    let fitted = summaries.iter().filter(|s| s.fit.is_some()).count();
    let resonant = summaries.iter().filter(|s| s.resonance.is_some()).count();
    let gammas: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.fit.as_ref().map(|f| f.gamma))
        .collect();
    let equal_sign_floor = summaries
        .iter()
        .map(|s| s.equal_sign_min)
        .fold(f64::INFINITY, f64::min);
    let report = DivisorReport {
        schema: "qhd.divisors.v1".into(),
        shapes: summaries,
        isotropic,
        fitted,
        resonant,
        gamma_min: gammas.iter().copied().fold(f64::INFINITY, f64::min),
        gamma_max: gammas.iter().copied().fold(0.0, f64::max),
        equal_sign_floor,
        measure_slope,
        windows,
    };
    io::write_json(out_dir, "divisors_summary", &report)?;
    Ok(report)
}
