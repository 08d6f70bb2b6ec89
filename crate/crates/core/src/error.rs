use thiserror::Error;

use crate::geometry::DistanceWitness;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {index} = ({x}, {y}, {theta}) lies outside [-1,1]^3")]
    OutsideOmega {
        index: usize,
        x: f64,
        y: f64,
        theta: f64,
    },

    #[error("elements {first} and {second} are identical")]
    DuplicateElement { first: usize, second: usize },

    #[error("minimal distance needs at least two elements, got {0}")]
    TooFewElements(usize),

    #[error("configuration carries no claimed distance")]
    MissingClaim,

    #[error(
        "claim violated: d(X) = {measured} < claimed {claimed} (point {} to line {})",
        witness.index_a,
        witness.index_b
    )]
    ClaimViolated {
        claimed: f64,
        measured: f64,
        witness: DistanceWitness,
    },

    #[error("d(X) = {measured} exceeds the tiling bound {bound} for n = {n}; the verifier is broken")]
    SanityBoundExceeded { n: usize, measured: f64, bound: f64 },

    #[error("delta too large: {0}")]
    DeltaTooLarge(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("retries exhausted after {attempts} attempts: best kept {best_size} of target {target}")]
    RetriesExhausted {
        attempts: usize,
        best_size: usize,
        target: usize,
        best: Box<(crate::geometry::Configuration, crate::report::BuildReport)>,
    },

    #[error("size {size} exceeds the configured cap {cap}")]
    SizeOverflow { size: u128, cap: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
