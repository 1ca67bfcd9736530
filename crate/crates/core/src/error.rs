use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Precondition violations are reported as errors rather than panics so that
/// batch drivers can classify a bad input without aborting a whole suite.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension n = {0} is not supported (need n >= 3)")]
    Dimension(usize),

    #[error("grid needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("truncation radius must exceed 1, got {0}")]
    RadiusTooSmall(f64),

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("non-finite sample at node {index}")]
    NonFinite { index: usize },

    #[error("integrand is not integrable: {0}")]
    NonIntegrable(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("basis index {0} is not a radial profile; the components 1..=n vanish for radial data by odd symmetry")]
    NonRadialIndex(usize),

    #[error("input violates a hypothesis: {0}")]
    Inadmissible(String),

    #[error("condition K fails for eta = {eta}; largest admissible eta is {eta_star}")]
    ConditionK { eta: f64, eta_star: f64 },

    #[error("Newton iteration failed to converge at t = {t} after halving dt to {dt}")]
    Newton { t: f64, dt: f64 },

    #[error("solution reached extinction near t = {t_estimate} before the horizon")]
    Extinction { t_estimate: f64 },

    #[error("manifold projection did not converge; best distance {distance}")]
    Projection { mu: f64, sigma: f64, distance: f64 },

    #[error("division by a vanishing norm: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
