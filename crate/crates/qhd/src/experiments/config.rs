//! Experiment configuration: one flat TOML file drives every subcommand.
//!
//! Zero-valued numeric fields mean "derive the default": grid from
//! `4 j_max`, step from the fastest linear phase, the frequency cutoff from
//! `epsilon^{-1/(d-1)}`, and the lifespan budget from
//! `epsilon^{-1 - 1/(2(d-1))}` (between the local-theory horizon and the
//! normal-form one, so a fully censored sweep still certifies a slope).

use serde::{Deserialize, Serialize};

use crate::dispersion::ModelParams;
use crate::error::{Error, Result};
use crate::integrator::{default_dt, default_grid, ModeProfile};
use crate::lattice::TorusShape;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub a: Vec<f64>,
    pub kappa: f64,
    pub mass: f64,
    pub g_coeffs: Vec<f64>,
    pub s: f64,
    pub j_max: i32,
    /// Grid points per axis; 0 derives the power-of-two default `>= 4 j_max`.
    pub grid_n: usize,
    /// Time step; 0 derives `0.1 / omega(corner)`.
    pub dt: f64,
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Lifespan budget; 0 derives `epsilon^{-1-1/(2(d-1))}` per point.
    pub t_max: f64,
    /// Frequency cutoff for the modified energy; 0 derives `epsilon^{-1/(d-1)}`.
    pub n_cutoff: f64,
    /// Steps between monitor samples; 0 derives roughly 0.25 time units.
    pub sample_every: usize,
    /// Spectral decay of random initial data; 0 derives `s + 1`.
    pub profile_exponent: f64,
    pub out_dir: String,
    /// Duration of a plain `simulate` run.
    pub t_final: f64,
    /// Keep spectral snapshots every this many samples (simulate only).
    pub snapshot_every: usize,
    // divisor campaign
    pub divisor_j_max: i32,
    pub n_shapes: usize,
    pub mc_samples: usize,
    pub mc_gammas: Vec<f64>,
    /// Only records with `|Omega|` below this multiple of `sqrt(kappa)`
    /// are materialized in the records CSV.
    pub report_threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            a: vec![1.32, 1.74],
            kappa: 1.0,
            mass: 1.0,
            g_coeffs: vec![1.0],
            s: 6.0,
            j_max: 8,
            grid_n: 0,
            dt: 0.0,
            epsilons: vec![3e-3, 1e-3, 3e-4],
            seeds: vec![1],
            t_max: 0.0,
            n_cutoff: 0.0,
            sample_every: 0,
            profile_exponent: 0.0,
            out_dir: "out".into(),
            t_final: 10.0,
            snapshot_every: 0,
            divisor_j_max: 40,
            n_shapes: 20,
            mc_samples: 100_000,
            mc_gammas: Vec::new(),
            report_threshold: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.len() != self.dim {
            return Err(Error::Config(format!(
                "dim = {} but a has {} entries",
                self.dim,
                self.a.len()
            )));
        }
        if self.j_max < 1 {
            return Err(Error::Config("j_max must be >= 1".into()));
        }
        if self.grid_n != 0 && (self.grid_n as i32) < 4 * self.j_max {
            return Err(Error::Config(format!(
                "grid_n = {} is below the alias-free margin 4 j_max = {}",
                self.grid_n,
                4 * self.j_max
            )));
        }
        if self.epsilons.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("epsilons and seeds must be nonempty".into()));
        }
        Ok(())
    }

    /// Shapes inside the generic window construct strictly; diagnostic
    /// shapes (isotropic and other boundary cases) fall back to the
    /// relaxed constructor so that resonance reporting can run on them.
    pub fn shape(&self) -> Result<TorusShape> {
        TorusShape::new(self.a.clone()).or_else(|_| TorusShape::relaxed(self.a.clone()))
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.kappa, self.mass, self.g_coeffs.clone())
    }

    pub fn grid(&self) -> usize {
        if self.grid_n > 0 {
            self.grid_n
        } else {
            default_grid(self.j_max)
        }
    }

    pub fn step_size(&self, shape: &TorusShape, p: &ModelParams) -> f64 {
        if self.dt > 0.0 {
            self.dt
        } else {
            default_dt(shape, p, self.j_max)
        }
    }

    pub fn sample_stride(&self, dt: f64) -> usize {
        if self.sample_every > 0 {
            self.sample_every
        } else {
            ((0.25 / dt).round() as usize).max(1)
        }
    }

    pub fn profile(&self) -> ModeProfile {
        if self.profile_exponent > 0.0 {
            ModeProfile {
                exponent: self.profile_exponent,
            }
        } else {
            ModeProfile::for_sobolev_index(self.s)
        }
    }

    pub fn cutoff_for(&self, epsilon: f64) -> f64 {
        if self.n_cutoff > 0.0 {
            self.n_cutoff
        } else {
            epsilon.powf(-1.0 / (self.dim as f64 - 1.0))
        }
    }

    pub fn t_max_for(&self, epsilon: f64) -> f64 {
        if self.t_max > 0.0 {
            self.t_max
        } else {
            epsilon.powf(-1.0 - 0.5 / (self.dim as f64 - 1.0))
        }
    }

    pub fn mc_gamma_grid(&self) -> Vec<f64> {
        if !self.mc_gammas.is_empty() {
            return self.mc_gammas.clone();
        }
        (0..=12).map(|k| 10f64.powf(-6.0 + 0.5 * k as f64)).collect()
    }
}
