//! Lifespan sweep: how long does an `epsilon`-small solution stay small?
//!
//! Each `(epsilon, seed)` point integrates from random data with
//! `|z_0|_{H^s} = epsilon` and reports the first time `|z(t)|_{H^s}`
//! exceeds `2 epsilon`, censored at the budget `t_max(epsilon)`. The
//! summary fits the log-log slope of exit time against `epsilon`; censored
//! points enter at their budget, so a fully censored sweep certifies the
//! slope of the budget curve as a lower bound on the observed lifespan.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::io;
use crate::integrator::{evolve, prepare_initial, EvolveOptions, Stepper};

#[derive(Debug, Clone, Serialize)]
pub struct LifespanPoint {
    pub epsilon: f64,
    pub seed: u64,
    pub exit_time: f64,
    pub censored: bool,
    pub blow_up: bool,
    pub t_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LifespanResult {
    pub schema: String,
    pub s: f64,
    pub j_max: i32,
    pub grid_n: usize,
    pub dt: f64,
    pub points: Vec<LifespanPoint>,
    /// Least-squares slope of `ln(exit)` vs `ln(epsilon)`.
    pub slope: Option<f64>,
    /// Exit times non-increasing in epsilon (finite-size violations are
    /// flagged here, not fatal).
    pub monotone: bool,
}

pub fn run_lifespan(cfg: &ExperimentConfig, out_dir: &std::path::Path) -> Result<LifespanResult> {
    let shape = cfg.shape()?;
    let p = cfg.params()?;
    let n = cfg.grid();
    let dt = cfg.step_size(&shape, &p);
    let stride = cfg.sample_stride(dt);
    let profile = cfg.profile();

    let mut tasks: Vec<(f64, u64)> = Vec::new();
    for &eps in &cfg.epsilons {
        for &seed in &cfg.seeds {
            tasks.push((eps, seed));
        }
    }
    let mut points: Vec<LifespanPoint> = tasks
        .par_iter()
        .map(|&(eps, seed)| -> Result<LifespanPoint> {
            let psi0 = prepare_initial(eps, profile, seed, &shape, &p, n, cfg.j_max, cfg.s)?;
            let mut stepper = Stepper::new(&shape, &p, n, dt, cfg.s);
            let t_max = cfg.t_max_for(eps);
            let opts = EvolveOptions {
                t_final: t_max,
                sample_every: stride,
                exit_threshold: Some(2.0 * eps),
                blow_up_guard: 0.5 * p.mass().sqrt(),
                snapshot_every: 0,
            };
            let traj = evolve(&mut stepper, &psi0, &opts)?;
            Ok(LifespanPoint {
                epsilon: eps,
                seed,
                exit_time: traj.exit_time.or(traj.blow_up).unwrap_or(t_max),
                censored: traj.exit_time.is_none() && traj.blow_up.is_none(),
                blow_up: traj.blow_up.is_some(),
                t_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.epsilon
            .partial_cmp(&b.epsilon)
            .unwrap()
            .then(a.seed.cmp(&b.seed))
    });

    let slope = fit_slope(&points);
    let monotone = check_monotone(&points);
    let result = LifespanResult {
        schema: "qhd.lifespan.v1".into(),
        s: cfg.s,
        j_max: cfg.j_max,
        grid_n: n,
        dt,
        points,
        slope,
        monotone,
    };
    io::write_csv(
        out_dir,
        "lifespan",
        "epsilon,seed,exit_time,censored,blow_up,t_max",
        result.points.iter().map(|pt| {
            format!(
                "{},{},{},{},{},{}",
                pt.epsilon, pt.seed, pt.exit_time, pt.censored, pt.blow_up, pt.t_max
            )
        }),
    )?;
    io::write_json(out_dir, "lifespan_summary", &result)?;
    Ok(result)
}

fn fit_slope(points: &[LifespanPoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.epsilon.ln(), p.exit_time.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

fn check_monotone(points: &[LifespanPoint]) -> bool {
    // mean exit per epsilon must not increase with epsilon
    let mut by_eps: Vec<(f64, f64, usize)> = Vec::new();
    for p in points {
        match by_eps.iter_mut().find(|(e, _, _)| *e == p.epsilon) {
            Some((_, sum, count)) => {
                *sum += p.exit_time;
                *count += 1;
            }
            None => by_eps.push((p.epsilon, p.exit_time, 1)),
        }
    }
    by_eps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    by_eps
        .windows(2)
        .all(|w| w[0].1 / w[0].2 as f64 >= w[1].1 / w[1].2 as f64 - 1e-12)
}
