//! Point-line configurations with large pairwise point-to-line distance.
//!
//! A configuration is a finite set of triples `(x, y, theta)` in
//! `[-1,1]^2 x [-1,1]`, each a point with an incident line of slope `theta`.
//! Its minimal distance `d(X)` is the smallest vertical distance from the
//! point of one element to the line of another. Stacking `n` horizontal lines
//! gives `d = 2/n`; this crate builds configurations that beat that baseline
//! and verifies every claim exactly:
//!
//! * [`random_construct`]: sample points and give each an empty strip;
//! * [`compose`]: self-affine amplification of a base by an inner
//!   configuration, and its iteration;
//! * [`search`]: local search for good small bases;
//! * [`geometry`] and [`grid`]: the metric and exact verifiers;
//! * [`analysis`]: baselines, sanity bounds and gain metrics.

pub mod analysis;
pub mod compose;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod random_construct;
pub mod report;
pub mod rescale;
pub mod search;
pub mod svg;

pub use error::{Error, Result};
pub use geometry::{
    min_distance, min_distance_bruteforce, trivial_configuration, vertical_distance, verify_claim,
    CellLabel, ConfigElement, Configuration, DistanceWitness,
};
pub use grid::min_distance_grid;
pub use report::BuildReport;
pub use rescale::Rescaler;
