//! The configuration space `[-1,1]^2 x [-1,1]` of incident point-line pairs.
//!
//! An element `(x, y, theta)` stands for the point `(x, y)` together with the
//! line of slope `theta` through it. Distances are *vertical*: the distance
//! from the point of one element to the line of another, measured along the
//! y axis. Because slopes are bounded by 1 this is comparable to the
//! Euclidean point-to-line distance up to a constant factor.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::grid;

/// Absolute slack allowed when comparing a measured minimum against a claim.
pub const TOL_ABS: f64 = 1e-12;

/// Relative tolerance for identities that hold exactly in real arithmetic.
pub const TOL_REL: f64 = 1e-12;

/// Absolute rounding floor for values computed from coordinates of magnitude
/// at most 1: a handful of roundings at unit scale.
pub const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Above this size the accelerated verifier is used by [`min_distance`].
const GRID_THRESHOLD: usize = 256;

/// `true` when `measured` agrees with `expected` to relative `TOL_REL`,
/// with an absolute floor of [`ROUNDING_FLOOR`].
pub fn scaled_eq(measured: f64, expected: f64) -> bool {
    (measured - expected).abs() <= TOL_REL * expected.abs() + ROUNDING_FLOOR
}

/// One incident point-line pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigElement {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl ConfigElement {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn in_omega(&self) -> bool {
        [self.x, self.y, self.theta]
            .iter()
            .all(|v| v.is_finite() && v.abs() <= 1.0)
    }

    /// Height of this element's line at abscissa `x`.
    #[inline]
    pub fn line_at(&self, x: f64) -> f64 {
        self.y + self.theta * (x - self.x)
    }

    fn key(&self) -> [u64; 3] {
        // `+ 0.0` folds -0.0 onto 0.0 so equal triples hash equally.
        [
            (self.x + 0.0).to_bits(),
            (self.y + 0.0).to_bits(),
            (self.theta + 0.0).to_bits(),
        ]
    }
}

/// Vertical distance from the point of `a` to the line of `b`.
///
/// Not symmetric: the slope of the second argument is used.
#[inline]
pub fn vertical_distance(a: &ConfigElement, b: &ConfigElement) -> f64 {
    (a.y - b.y - b.theta * (a.x - b.x)).abs()
}

/// Origin of an element produced by the self-affine composition: base index
/// `i`, vertical shift index `j` and index of the inner element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellLabel {
    pub i: usize,
    pub j: i64,
    pub inner: usize,
}

impl CellLabel {
    pub fn same_cell(&self, other: &CellLabel) -> bool {
        self.i == other.i && self.j == other.j
    }
}

/// The ordered pair realising a minimal distance: the point of `index_a`
/// against the line of `index_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceWitness {
    pub index_a: usize,
    pub index_b: usize,
    pub value: f64,
}

impl DistanceWitness {
    /// Lexicographic order on `(value, index_a, index_b)`.
    #[inline]
    pub(crate) fn better_than(&self, other: &DistanceWitness) -> bool {
        self.value < other.value
            || (self.value == other.value
                && (self.index_a, self.index_b) < (other.index_a, other.index_b))
    }

    pub(crate) fn pick(self, other: DistanceWitness) -> DistanceWitness {
        if other.better_than(&self) {
            other
        } else {
            self
        }
    }
}

/// A finite point-line configuration inside the configuration space.
///
/// Elements are validated on construction: all lie in `[-1,1]^3` and no two
/// are equal. The value is immutable afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    elements: Vec<ConfigElement>,
    claimed_delta: Option<f64>,
    provenance: String,
    labels: Option<Vec<CellLabel>>,
}

impl Configuration {
    pub fn new(
        elements: Vec<ConfigElement>,
        claimed_delta: Option<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        for (index, e) in elements.iter().enumerate() {
            if !e.in_omega() {
                return Err(Error::OutsideOmega {
                    index,
                    x: e.x,
                    y: e.y,
                    theta: e.theta,
                });
            }
        }
        let mut seen: HashMap<[u64; 3], usize> = HashMap::with_capacity(elements.len());
        for (index, e) in elements.iter().enumerate() {
            if let Some(&first) = seen.get(&e.key()) {
                return Err(Error::DuplicateElement {
                    first,
                    second: index,
                });
            }
            seen.insert(e.key(), index);
        }
        if let Some(c) = claimed_delta {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "claimed delta must be a nonnegative number, got {c}"
                )));
            }
        }
        Ok(Self {
            elements,
            claimed_delta,
            provenance: provenance.into(),
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<CellLabel>) -> Result<Self> {
        if labels.len() != self.elements.len() {
            return Err(Error::Format(format!(
                "{} labels for {} elements",
                labels.len(),
                self.elements.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn with_claim(mut self, claimed_delta: Option<f64>) -> Self {
        self.claimed_delta = claimed_delta;
        self
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn elements(&self) -> &[ConfigElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn claimed_delta(&self) -> Option<f64> {
        self.claimed_delta
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn labels(&self) -> Option<&[CellLabel]> {
        self.labels.as_deref()
    }
}

/// Exact `d(X)` over all ordered pairs, with the lexicographically smallest
/// witness among ties.
pub fn min_distance_bruteforce(config: &Configuration) -> Result<DistanceWitness> {
    bruteforce_elements(config.elements())
}

pub(crate) fn bruteforce_elements(elements: &[ConfigElement]) -> Result<DistanceWitness> {
    let n = elements.len();
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    let best = (0..n)
        .into_par_iter()
        .map(|a| {
            let pa = &elements[a];
            let mut best = DistanceWitness {
                index_a: a,
                index_b: usize::MAX,
                value: f64::INFINITY,
            };
            for (b, pb) in elements.iter().enumerate() {
                if b == a {
                    continue;
                }
                let value = vertical_distance(pa, pb);
                if value < best.value {
                    best = DistanceWitness {
                        index_a: a,
                        index_b: b,
                        value,
                    };
                }
            }
            best
        })
        .reduce_with(DistanceWitness::pick)
        .expect("n >= 2");
    Ok(best)
}

/// Exact `d(X)`, choosing the grid-accelerated search for larger inputs.
pub fn min_distance(config: &Configuration) -> Result<DistanceWitness> {
    if config.len() > GRID_THRESHOLD {
        grid::min_distance_grid(config, grid::default_cell(config.elements()))
    } else {
        min_distance_bruteforce(config)
    }
}

/// Outcome of checking a configuration against its claimed distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub size: usize,
    pub claimed_delta: Option<f64>,
    pub measured: Option<f64>,
    pub witness: Option<DistanceWitness>,
    /// Fewer than two elements: there is no pair to measure.
    pub degenerate: bool,
    pub sanity_warning: Option<String>,
}

/// Recompute `d(X)` and compare it with the claim, allowing [`TOL_ABS`].
///
/// Configurations with fewer than two elements pass vacuously and are
/// flagged degenerate.
pub fn verify_claim(config: &Configuration) -> Result<ClaimCheck> {
    let n = config.len();
    if n < 2 {
        return Ok(ClaimCheck {
            size: n,
            claimed_delta: config.claimed_delta(),
            measured: None,
            witness: None,
            degenerate: true,
            sanity_warning: None,
        });
    }
    let claimed = config.claimed_delta().ok_or(Error::MissingClaim)?;
    let witness = min_distance(config)?;
    if witness.value < claimed - TOL_ABS {
        return Err(Error::ClaimViolated {
            claimed,
            measured: witness.value,
            witness,
        });
    }
    let bound = analysis::upper_bound_sanity(n);
    let sanity_warning = (witness.value > bound).then(|| {
        format!(
            "d(X) = {} exceeds the tiling bound {} for n = {}",
            witness.value, bound, n
        )
    });
    Ok(ClaimCheck {
        size: n,
        claimed_delta: Some(claimed),
        measured: Some(witness.value),
        witness: Some(witness),
        degenerate: false,
        sanity_warning,
    })
}

/// Hard tripwire: error if a measured distance beats the tiling upper bound.
pub fn check_sanity(n: usize, measured: f64) -> Result<()> {
    if n >= 2 {
        let bound = analysis::upper_bound_sanity(n);
        if measured > bound {
            return Err(Error::SanityBoundExceeded {
                n,
                measured,
                bound,
            });
        }
    }
    Ok(())
}

/// `n` horizontal lines stacked with vertical spacing `2/n`.
///
/// The lines sit at heights `-1 + (2i+1)/n` up to a few ulps. Heights are
/// placed symmetrically about 0 and each gap is the smallest float step whose
/// computed difference is at least `2.0 / n`, so the verified minimal
/// distance is exactly `2.0 / n` in float64.
pub fn trivial_configuration(n: usize) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n == 1 {
        return Configuration::new(
            vec![ConfigElement::new(0.0, 0.0, 0.0)],
            None,
            "trivial(1)",
        );
    }
    let gap = 2.0 / n as f64;
    let mut upper = Vec::with_capacity(n / 2 + 1);
    let mut y = if n.is_multiple_of(2) { gap / 2.0 } else { 0.0 };
    upper.push(y);
    while upper.len() < n.div_ceil(2) {
        y = next_height(y, gap);
        upper.push(y);
    }
    let mut heights: Vec<f64> = upper
        .iter()
        .rev()
        .filter(|&&h| h != 0.0)
        .map(|h| -h)
        .collect();
    heights.extend(upper.iter().copied());
    let elements = heights
        .into_iter()
        .map(|y| ConfigElement::new(0.0, y, 0.0))
        .collect();
    Configuration::new(elements, Some(gap), format!("trivial({n})"))
}

/// Smallest float `t > y` with `t - y >= gap` as computed in float64.
fn next_height(y: f64, gap: f64) -> f64 {
    let mut t = y + gap;
    while t - y < gap {
        t = t.next_up();
    }
    while t.next_down() - y >= gap {
        t = t.next_down();
    }
    t
}
