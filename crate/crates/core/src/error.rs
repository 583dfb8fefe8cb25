use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesselError {
    #[error("Riccati-Bessel argument must be positive and finite, got {0}")]
    Domain(f64),
    #[error("n_l overflows at l = {l} for argument {x}; lower the maximum angular momentum")]
    Overflow { l: usize, x: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Bessel(#[from] BesselError),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("wavenumber must be positive and finite, got {0}")]
    InvalidWavenumber(f64),

    /// `k² - q_i` is at or below `κ_min²` in layer `layer` (1-based).
    #[error("layer {layer} is evanescent: k^2 - q = {gap:e} is below the threshold {threshold:e}")]
    EvanescentLayer {
        layer: usize,
        gap: f64,
        threshold: f64,
    },

    #[error("target phase shifts vanish on l = {l_start}..={l_end}; the objective is undefined")]
    DegenerateTarget { l_start: usize, l_end: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every point of the random batch failed to evaluate")]
    EmptySample,

    #[error("ODE integration failed: {0}")]
    Integration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
