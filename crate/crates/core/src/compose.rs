//! Self-affine amplification.
//!
//! From a base configuration `X0` with `k` elements and an inner
//! configuration `X`, [`compose`] builds the union of `k (2 floor(1/w) - 1)`
//! rescaled copies of `X`: the base is first halved, `X1 = psi_half(X0)`,
//! then every element `(p_i, theta_i)` of `X1` is replicated at heights
//! `p_i + (0, C j w^2)` for `|j| <= floor(1/w) - 1`, each copy being the
//! image of `X` under the rescaler centred there with slope `theta_i` and
//! scale `w`.
//!
//! Under the guaranteed constants (`C >= 5`, `w <= 1/(4C^2)`,
//! `d(X0) >= 4C^2 w`) the result satisfies `d >= w^2 min(d(X), 1)`. Pairs
//! from different base elements are at distance at least `w`, pairs from the
//! same base element but different shifts at least `w^2`, and pairs inside one
//! copy are at exactly `w^2` times their inner distance. Outside those
//! constants the composition is exploratory and its distance is measured.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{level_table, GainRecord};
use crate::error::{Error, Result};
use crate::geometry::{
    check_sanity, min_distance, scaled_eq, vertical_distance, verify_claim, CellLabel,
    ConfigElement, Configuration, DistanceWitness, TOL_ABS,
};
use crate::report::{BuildReport, CaseSummary, Verification, VerifyMethod};
use crate::rescale::{rescale_configuration, Rescaler};

/// Largest size verified over all ordered pairs.
pub const DEFAULT_VERIFY_CAP: usize = 20_000;
/// Cross-cell ordered pairs drawn by sampled verification.
pub const DEFAULT_SAMPLE_PAIRS: usize = 1_000_000;
pub const DEFAULT_MAX_SIZE: usize = 5_000_000;
/// Largest size for which the case analysis scans every ordered pair.
const CASE_FULL_CAP: usize = 6_000;
const REPORTED_VIOLATIONS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeMode {
    Guaranteed,
    Exploratory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposeParams {
    pub w: f64,
    pub c: f64,
    pub mode: ComposeMode,
    pub verify_cap: usize,
    pub sample_pairs: usize,
    pub sample_seed: u64,
}

impl ComposeParams {
    pub fn new(w: f64, c: f64, mode: ComposeMode) -> Result<Self> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::InvalidParameter(format!("w must lie in (0, 1), got {w}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
        }
        let params = Self {
            w,
            c,
            mode,
            verify_cap: DEFAULT_VERIFY_CAP,
            sample_pairs: DEFAULT_SAMPLE_PAIRS,
            sample_seed: 0,
        };
        if mode == ComposeMode::Guaranteed {
            params.check_guaranteed_constants()?;
        }
        Ok(params)
    }

    /// Largest shift index, `floor(1/w) - 1`.
    pub fn j_max(&self) -> i64 {
        (1.0 / self.w).floor() as i64 - 1
    }

    /// Copies per base element, `2 floor(1/w) - 1`.
    pub fn copies(&self) -> usize {
        (2 * self.j_max() + 1) as usize
    }

    /// Minimal base distance for the guaranteed bound, `4 C^2 w`.
    pub fn base_requirement(&self) -> f64 {
        4.0 * self.c * self.c * self.w
    }

    fn check_guaranteed_constants(&self) -> Result<()> {
        if self.c < 5.0 {
            return Err(Error::Precondition(format!(
                "guaranteed mode needs C >= 5, got C = {}",
                self.c
            )));
        }
        let w_max = 1.0 / (4.0 * self.c * self.c);
        if self.w > w_max {
            return Err(Error::Precondition(format!(
                "guaranteed mode needs w <= 1/(4C²) = {w_max}, got w = {}",
                self.w
            )));
        }
        Ok(())
    }
}

/// `X1 = psi_half(X0)`, inside `[-1/2,1/2] x [-1/4,1/4] x [-1/2,1/2]`.
pub fn make_x1(x0: &Configuration) -> Result<Configuration> {
    let x1 = rescale_configuration(&Rescaler::half(), x0)?;
    debug_assert!(x1
        .elements()
        .iter()
        .all(|e| e.x.abs() <= 0.5 && e.y.abs() <= 0.25 && e.theta.abs() <= 0.5));
    Ok(x1)
}

/// `min(d(X), 1)`, reading the claim of an already verified inner
/// configuration; 1 when `X` has fewer than two elements.
fn inner_scale(inner: &Configuration, cap: usize) -> Result<f64> {
    if inner.len() < 2 {
        return Ok(1.0);
    }
    let d = match inner.claimed_delta() {
        Some(claim) if inner.len() > cap => claim,
        Some(_) => verify_claim(inner)?.claimed_delta.expect("claim present"),
        None if inner.len() > cap => return Err(Error::MissingClaim),
        None => min_distance(inner)?.value,
    };
    Ok(d.min(1.0))
}

/// Build the composed configuration, verify it and run the case analysis.
pub fn compose(
    x0: &Configuration,
    inner: &Configuration,
    params: &ComposeParams,
) -> Result<(Configuration, BuildReport)> {
    if x0.is_empty() || inner.is_empty() {
        return Err(Error::Precondition(
            "base and inner configurations must be nonempty".into(),
        ));
    }
    let guaranteed = params.mode == ComposeMode::Guaranteed;
    if guaranteed {
        params.check_guaranteed_constants()?;
        if x0.len() >= 2 {
            let d0 = min_distance(x0)?.value;
            let need = params.base_requirement();
            if d0 < need {
                return Err(Error::Precondition(format!(
                    "d(X0) = {d0} < 4C²w = {need}"
                )));
            }
        }
    }
    let expected = x0.len() as u128 * params.copies() as u128 * inner.len() as u128;
    if expected > DEFAULT_MAX_SIZE as u128 {
        return Err(Error::SizeOverflow {
            size: expected,
            cap: DEFAULT_MAX_SIZE,
        });
    }
    let inner_d = inner_scale(inner, params.verify_cap)?;

    let x1 = make_x1(x0)?;
    let w = params.w;
    let jm = params.j_max();
    let mut centres = Vec::with_capacity(x1.len() * params.copies());
    for (i, p) in x1.elements().iter().enumerate() {
        for j in -jm..=jm {
            let y = p.y + (params.c * j as f64) * (w * w);
            if guaranteed && (p.x.abs() > 0.5 || y.abs() > 0.5) {
                return Err(Error::Precondition(format!(
                    "shifted centre p_({i},{j}) = ({}, {y}) leaves [-1/2,1/2]²",
                    p.x
                )));
            }
            centres.push((i, j, Rescaler::new(p.x, y, p.theta, w)?));
        }
    }

    let cells: Vec<Vec<(ConfigElement, CellLabel)>> = centres
        .par_iter()
        .map(|&(i, j, r)| {
            inner
                .elements()
                .iter()
                .enumerate()
                .map(|(a, e)| (r.map_element(e), CellLabel { i, j, inner: a }))
                .collect()
        })
        .collect();
    let (elements, labels): (Vec<_>, Vec<_>) = cells.into_iter().flatten().unzip();
    let provenance = format!(
        "compose(w={}, C={}, mode={:?}; base={}; inner={})",
        w,
        params.c,
        params.mode,
        x0.provenance(),
        inner.provenance()
    );
    let composed = Configuration::new(elements, None, provenance.clone())
        .map_err(|err| match err {
            Error::DuplicateElement { first, second } => Error::Precondition(format!(
                "composition is not a disjoint union: elements {first} and {second} coincide"
            )),
            other => other,
        })?
        .with_labels(labels)?;
    assert_eq!(composed.len() as u128, expected, "exact size law");

    let guaranteed_claim = w * w * inner_d;
    let mut report = BuildReport {
        provenance,
        size: composed.len(),
        ..BuildReport::default()
    };

    let verification = if composed.len() <= params.verify_cap {
        let witness = min_distance(&composed)?;
        exact_verification(composed.len(), witness)
    } else {
        let ranges = cell_ranges(composed.labels().expect("labelled"));
        sampled_verification(&composed, &ranges, params.sample_pairs, params.sample_seed)?
    };
    let measured = verification.measured.expect("at least two elements");
    let claim = if guaranteed { guaranteed_claim } else { measured };
    if measured < claim - TOL_ABS {
        return Err(Error::ClaimViolated {
            claimed: claim,
            measured,
            witness: verification.witness.expect("witness"),
        });
    }
    check_sanity(composed.len(), measured)?;

    let cases = if composed.len() <= CASE_FULL_CAP {
        case_bound_check(&composed, params, inner)?
    } else {
        case_bound_check_sampled(&composed, params, inner)?
    };
    if let Ok(d1) = min_distance(&x1) {
        report.notes.push(format!(
            "d(X1) = {}, cross-base margin d(X1) - (4C+4)w = {}",
            d1.value,
            d1.value - (4.0 * params.c + 4.0) * w
        ));
    }
    if !guaranteed && cases.violations > 0 {
        report.notes.push(format!(
            "exploratory constants: {} case-bound violations (not fatal)",
            cases.violations
        ));
    }

    report.success = !(guaranteed && cases.violations > 0);
    report.claimed_delta = Some(claim);
    report.verification = Verification {
        passed: true,
        ..verification
    };
    let mut gain = GainRecord::from_parts(composed.len(), claim);
    gain.witness = report.verification.witness;
    gain.provenance = report.provenance.clone();
    report.gain = Some(gain);
    report.cases = Some(cases);
    Ok((composed.with_claim(Some(claim)), report))
}

fn exact_verification(n: usize, witness: DistanceWitness) -> Verification {
    let n = n as u64;
    Verification {
        method: VerifyMethod::Exact,
        measured: Some(witness.value),
        witness: Some(witness),
        passed: false,
        degenerate: false,
        pairs_checked: n * (n - 1),
        sanity_warning: None,
    }
}

/// Maximal runs of consecutive elements sharing a cell `(i, j)`.
pub fn cell_ranges(labels: &[CellLabel]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=labels.len() {
        if k == labels.len() || !labels[k].same_cell(&labels[start]) {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Minimum over every same-cell ordered pair plus `samples` random ordered
/// pairs from different cells. Not a certificate: cross-cell pairs outside
/// the sample are covered only by the case analysis.
pub fn sampled_verification(
    config: &Configuration,
    cells: &[Range<usize>],
    samples: usize,
    seed: u64,
) -> Result<Verification> {
    let el = config.elements();
    let n = el.len();
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    let within = cells
        .par_iter()
        .filter(|r| r.len() >= 2)
        .map(|r| {
            let mut best: Option<DistanceWitness> = None;
            for a in r.clone() {
                for b in r.clone() {
                    if a == b {
                        continue;
                    }
                    let cand = DistanceWitness {
                        index_a: a,
                        index_b: b,
                        value: vertical_distance(&el[a], &el[b]),
                    };
                    best = Some(match best {
                        Some(cur) => cur.pick(cand),
                        None => cand,
                    });
                }
            }
            (best, (r.len() * (r.len() - 1)) as u64)
        })
        .reduce(
            || (None, 0),
            |(a, ca), (b, cb)| {
                let best = match (a, b) {
                    (Some(a), Some(b)) => Some(a.pick(b)),
                    (a, b) => a.or(b),
                };
                (best, ca + cb)
            },
        );

    let cell_of = cell_index(cells, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = within.0;
    let mut drawn = 0u64;
    let mut tries = 0usize;
    while (drawn as usize) < samples && tries < samples.saturating_mul(4) {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || (cell_of[a].is_some() && cell_of[a] == cell_of[b]) {
            continue;
        }
        drawn += 1;
        let cand = DistanceWitness {
            index_a: a,
            index_b: b,
            value: vertical_distance(&el[a], &el[b]),
        };
        best = Some(match best {
            Some(cur) => cur.pick(cand),
            None => cand,
        });
    }
    let best = best.ok_or_else(|| Error::Precondition("no pair sampled".into()))?;
    Ok(Verification {
        method: VerifyMethod::Sampled,
        measured: Some(best.value),
        witness: Some(best),
        passed: false,
        degenerate: false,
        pairs_checked: within.1 + drawn,
        sanity_warning: None,
    })
}

fn cell_index(cells: &[Range<usize>], n: usize) -> Vec<Option<usize>> {
    let mut out = vec![None; n];
    for (c, r) in cells.iter().enumerate() {
        for k in r.clone() {
            out[k] = Some(c);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCase {
    /// Different base elements: distance at least `w`.
    CrossBase,
    /// Same base element, different shifts: distance at least `w^2`.
    CrossShift,
    /// Same copy: distance exactly `w^2` times the inner distance.
    SameCell,
}

struct CaseTally {
    summary: CaseSummary,
}

impl CaseTally {
    fn new(sampled: bool) -> Self {
        Self {
            summary: CaseSummary {
                sampled,
                ..CaseSummary::default()
            },
        }
    }

    fn merge(mut self, other: CaseTally) -> Self {
        let s = &mut self.summary;
        let o = other.summary;
        s.pairs_checked += o.pairs_checked;
        s.cross_base += o.cross_base;
        s.cross_shift += o.cross_shift;
        s.same_cell += o.same_cell;
        s.violations += o.violations;
        for v in o.first_violations {
            if s.first_violations.len() < REPORTED_VIOLATIONS {
                s.first_violations.push(v);
            }
        }
        self
    }
}

fn check_pair(
    tally: &mut CaseTally,
    x: &Configuration,
    labels: &[CellLabel],
    inner: &Configuration,
    w: f64,
    a: usize,
    b: usize,
) {
    let (la, lb) = (labels[a], labels[b]);
    let d = vertical_distance(&x.elements()[a], &x.elements()[b]);
    let (case, ok, bound) = if la.i != lb.i {
        (PairCase::CrossBase, d >= w - TOL_ABS, w)
    } else if la.j != lb.j {
        (PairCase::CrossShift, d >= w * w - TOL_ABS, w * w)
    } else {
        let expected =
            w * w * vertical_distance(&inner.elements()[la.inner], &inner.elements()[lb.inner]);
        (PairCase::SameCell, scaled_eq(d, expected), expected)
    };
    let s = &mut tally.summary;
    s.pairs_checked += 1;
    match case {
        PairCase::CrossBase => s.cross_base += 1,
        PairCase::CrossShift => s.cross_shift += 1,
        PairCase::SameCell => s.same_cell += 1,
    }
    if !ok {
        s.violations += 1;
        if s.first_violations.len() < REPORTED_VIOLATIONS {
            s.first_violations.push(format!(
                "{case:?}: pair ({a}, {b}) measured {d}, bound {bound}"
            ));
        }
    }
}

fn labels_for(x: &Configuration, inner: &Configuration) -> Result<Vec<CellLabel>> {
    let labels = x
        .labels()
        .ok_or_else(|| Error::Precondition("case analysis needs cell labels".into()))?;
    if labels.iter().any(|l| l.inner >= inner.len()) {
        return Err(Error::Precondition(
            "labels refer to elements outside the inner configuration".into(),
        ));
    }
    Ok(labels.to_vec())
}

/// Check every ordered pair of a composed configuration against the bound
/// for its case. Violations are reported, never fatal.
pub fn case_bound_check(
    x: &Configuration,
    params: &ComposeParams,
    inner: &Configuration,
) -> Result<CaseSummary> {
    let labels = labels_for(x, inner)?;
    let n = x.len();
    let tally = (0..n)
        .into_par_iter()
        .fold(
            || CaseTally::new(false),
            |mut t, a| {
                for b in 0..n {
                    if a != b {
                        check_pair(&mut t, x, &labels, inner, params.w, a, b);
                    }
                }
                t
            },
        )
        .reduce(|| CaseTally::new(false), CaseTally::merge);
    Ok(sorted(tally.summary))
}

/// Case analysis over every same-cell pair and `params.sample_pairs` random
/// cross-cell ordered pairs.
pub fn case_bound_check_sampled(
    x: &Configuration,
    params: &ComposeParams,
    inner: &Configuration,
) -> Result<CaseSummary> {
    let labels = labels_for(x, inner)?;
    let ranges = cell_ranges(&labels);
    let within = ranges
        .par_iter()
        .fold(
            || CaseTally::new(true),
            |mut t, r| {
                for a in r.clone() {
                    for b in r.clone() {
                        if a != b {
                            check_pair(&mut t, x, &labels, inner, params.w, a, b);
                        }
                    }
                }
                t
            },
        )
        .reduce(|| CaseTally::new(true), CaseTally::merge);
    let mut tally = within;
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.sample_seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut drawn = 0usize;
    let mut tries = 0usize;
    while drawn < params.sample_pairs && tries < params.sample_pairs.saturating_mul(4) {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || labels[a].same_cell(&labels[b]) {
            continue;
        }
        drawn += 1;
        check_pair(&mut tally, x, &labels, inner, params.w, a, b);
    }
    Ok(sorted(tally.summary))
}

fn sorted(mut s: CaseSummary) -> CaseSummary {
    // Parallel folds collect violations in scheduling order.
    s.first_violations.sort();
    s
}

/// An m-fold iteration of [`compose`] from a seed configuration.
#[derive(Clone, Debug)]
pub struct RecursionPlan {
    pub depth: usize,
    pub base: Configuration,
    pub inner_seed: Configuration,
    pub params: ComposeParams,
    /// `w^(2m) min(d(seed), 1)`; the claim on the guaranteed path.
    pub expected_delta: f64,
    /// Size after each level.
    pub expected_sizes: Vec<u128>,
    pub max_size: usize,
}

impl RecursionPlan {
    pub fn new(
        depth: usize,
        base: Configuration,
        inner_seed: Configuration,
        params: ComposeParams,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        let factor = base.len() as u128 * params.copies() as u128;
        let mut size = inner_seed.len() as u128;
        let mut expected_sizes = Vec::with_capacity(depth);
        for _ in 0..depth {
            size = size.saturating_mul(factor);
            expected_sizes.push(size);
        }
        let seed_scale = inner_scale(&inner_seed, params.verify_cap)?;
        let expected_delta = (0..depth).fold(seed_scale, |d, _| params.w * params.w * d.min(1.0));
        Ok(Self {
            depth,
            base,
            inner_seed,
            params,
            expected_delta,
            expected_sizes,
            max_size: DEFAULT_MAX_SIZE,
        })
    }

    /// The default seed, a single element at the origin.
    pub fn singleton_seed() -> Configuration {
        Configuration::new(vec![ConfigElement::new(0.0, 0.0, 0.0)], None, "singleton")
            .expect("origin is in the configuration space")
    }
}

/// Fold [`compose`] `depth` times starting from the seed.
pub fn iterate_compose(plan: &RecursionPlan) -> Result<(Configuration, BuildReport)> {
    let last = *plan.expected_sizes.last().expect("depth >= 1");
    if last > plan.max_size as u128 {
        return Err(Error::SizeOverflow {
            size: last,
            cap: plan.max_size,
        });
    }
    let mut current = plan.inner_seed.clone();
    let mut per_level: Vec<BuildReport> = Vec::with_capacity(plan.depth);
    for level in 0..plan.depth {
        let mut params = plan.params.clone();
        params.sample_seed = plan.params.sample_seed.wrapping_add(level as u64);
        let (next, report) = compose(&plan.base, &current, &params)?;
        assert_eq!(next.len() as u128, plan.expected_sizes[level]);
        per_level.push(report);
        current = next;
    }
    let mut report = per_level.last().cloned().expect("depth >= 1");
    report.provenance = format!(
        "iterate(depth={}, w={}, C={}, mode={:?}; base={}; seed={})",
        plan.depth,
        plan.params.w,
        plan.params.c,
        plan.params.mode,
        plan.base.provenance(),
        plan.inner_seed.provenance()
    );
    report.success = per_level.iter().all(|r| r.success);
    report.levels = Some(level_table(&per_level));
    if plan.params.mode == ComposeMode::Guaranteed {
        debug_assert_eq!(report.claimed_delta, Some(plan.expected_delta));
    }
    if let Some(g) = report.gain.as_mut() {
        g.provenance = report.provenance.clone();
    }
    let out = current.with_provenance(report.provenance.clone());
    Ok((out, report))
}
