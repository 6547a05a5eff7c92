use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a ladder needs at least 2 levels, got {0}")]
    TooFewLevels(usize),

    #[error("expected {expected} entries for {what}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("state norm deviates from 1 by {deviation:e} (tolerance {tolerance:e})")]
    NotNormalized { deviation: f64, tolerance: f64 },

    #[error("invalid polar state: {0}")]
    InvalidPolar(String),

    #[error("energies of levels {i} and {j} coincide; the ladder is degenerate")]
    Degenerate { i: usize, j: usize },

    #[error("invalid level pair ({i}, {j}) for a {n}-level system")]
    InvalidLevelPair { i: usize, j: usize, n: usize },

    #[error("target level {index} is not supported; the target is level {n}")]
    InvalidTarget { index: usize, n: usize },

    #[error("invalid controller parameters: {0}")]
    InvalidParams(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("polar dynamics are singular at level {level} (r = {r:e})")]
    Singular { level: usize, r: f64 },

    #[error("integration failed at t = {t}: single-step norm drift {drift:e} exceeds {limit:e}")]
    IntegrationFailure { t: f64, drift: f64, limit: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),
}
