use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("the zero mode is excluded from dynamical indices")]
    ZeroMode,
    #[error("invalid torus shape: {0}")]
    BadShape(String),
    #[error("invalid model parameters: {0}")]
    BadParams(String),
    #[error("momentum condition violated: sum sigma_i j_i != 0")]
    MomentumViolation,
    #[error("asymptotic expansion out of domain: |j|^2_a = {x} <= beta = {beta}")]
    AsymptoticDomain { x: f64, beta: f64 },
    #[error("density not positive: min(m + rho) = {0}")]
    NonpositiveDensity(f64),
    #[error("field modulus vanishes: min |psi| = {0:.3e}")]
    VanishingModulus(f64),
    #[error("branch cut: gauge-aligned field touches the imaginary axis")]
    BranchCut,
    #[error("zero Fourier mode vanishes; gauge angle undefined")]
    VanishingZeroMode,
    #[error("mass exceeded: sum |z_j|^2 = {sum} >= m = {mass}")]
    MassExceeded { sum: f64, mass: f64 },
    #[error("alpha = 0: theta rate undefined")]
    ZeroAlpha,
    #[error("divisor {divisor:.6e} below floor {floor:.1e} at {triple}")]
    ResonantDivisor {
        divisor: f64,
        floor: f64,
        triple: String,
    },
    #[error("resonant shape: {0}")]
    ExactResonance(String),
    #[error("blow-up guard tripped at t = {t} (|z|_Hs = {norm:.3e})")]
    BlowUp { t: f64, norm: f64 },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
