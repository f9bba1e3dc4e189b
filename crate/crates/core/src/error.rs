use thiserror::Error;

/// Errors produced by the incidence laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scale exponent k = {k} outside [1, {max}]")]
    InvalidScale { k: u32, max: u32 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("construction {construction} undefined at (alpha, beta) = ({alpha}, {beta}): requires {requirement}")]
    RegionViolation {
        construction: &'static str,
        alpha: f64,
        beta: f64,
        requirement: &'static str,
    },

    #[error("objects have mixed radii/widths ({first} vs {other})")]
    MixedRadii { first: f64, other: f64 },

    #[error("size guard exceeded for {what}: {got} > {limit}")]
    SizeGuard {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("ball centered at ({cx}, {cy}) is not on the odd lattice of step {delta}")]
    LatticeViolation { cx: f64, cy: f64, delta: f64 },

    #[error("tube slope {slope} outside [-1, 1]; rotate the configuration first")]
    SlopeOutOfRange { slope: f64 },

    #[error("input set {name} is not a family of disjoint balls")]
    NotDisjoint { name: &'static str },

    #[error("need at least {need} points for a fit, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
