use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown nonlinearity: {0}")]
    UnknownNonlinearity(String),

    #[error("grid too coarse: {needed} cells needed to resolve s = {s:.4} with 8 nodes per half-wave, grid has {available}")]
    GridTooCoarse { s: f64, needed: usize, available: usize },

    #[error("root bracketing failed on [{lo}, {hi}]: {reason}")]
    BracketFailure { lo: f64, hi: f64, reason: String },

    #[error("asymmetric Robin coefficients unsupported (g'(u(0)) = {left}, g'(u(1)) = {right})")]
    AsymmetricRobin { left: f64, right: f64 },

    #[error("non-hyperbolic at this λ: eigenvalue {mu:e} is within {tol:e} of 0")]
    NonHyperbolic { mu: f64, tol: f64 },

    #[error("non-hyperbolic parameter: λ = {lambda} coincides with bifurcation value {critical}")]
    NonHyperbolicParameter { lambda: f64, critical: f64 },

    #[error("numerical overflow at t = {time}")]
    NumericalOverflow { time: f64 },

    #[error("mode not in growth regime: {0}")]
    NotInGrowthRegime(String),

    #[error("unclassified blow-up direction: distance to φ1 = {d1:.3e}, to φ2 = {d2:.3e}")]
    UnclassifiedBlowup { d1: f64, d2: f64 },

    #[error("point at infinity has no preimage (z = {z:e})")]
    PointAtInfinity { z: f64 },

    #[error("outside chart C_{chart}: projection onto φ{chart} is {projection:e}")]
    OutsideChart { chart: usize, projection: f64 },

    #[error("transient not observed: {0}")]
    TransientNotObserved(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
