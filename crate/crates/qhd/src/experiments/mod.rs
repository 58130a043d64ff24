//! Batch experiments driven by one TOML configuration: lifespan sweeps,
//! drift comparisons, divisor campaigns, plain simulations, and the
//! algebraic identity battery. Every run emits CSV tables plus a versioned
//! JSON summary, reproducible byte for byte from config and seed.

pub mod config;
pub mod divisor_campaign;
pub mod drift;
pub mod energy_check;
pub mod io;
pub mod lifespan;
pub mod simulate;

pub use config::ExperimentConfig;
pub use divisor_campaign::{run_divisors, DivisorReport};
pub use drift::{run_drift, DriftReport};
pub use energy_check::{run_energy_check, EnergyCheckReport};
pub use lifespan::{run_lifespan, LifespanResult};
pub use simulate::{run_simulate, SimulateSummary};
