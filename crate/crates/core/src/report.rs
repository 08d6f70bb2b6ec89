//! Machine-readable build reports.

use serde::{Deserialize, Serialize};

use crate::analysis::{GainRecord, LevelTable};
use crate::geometry::{ClaimCheck, DistanceWitness};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMethod {
    /// Every ordered pair accounted for.
    Exact,
    /// Every same-cell pair plus a random sample of cross-cell pairs.
    Sampled,
    #[default]
    Skipped,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub method: VerifyMethod,
    pub measured: Option<f64>,
    pub witness: Option<DistanceWitness>,
    pub passed: bool,
    pub degenerate: bool,
    pub pairs_checked: u64,
    pub sanity_warning: Option<String>,
}

impl From<ClaimCheck> for Verification {
    fn from(c: ClaimCheck) -> Self {
        let n = c.size as u64;
        Self {
            method: VerifyMethod::Exact,
            measured: c.measured,
            witness: c.witness,
            passed: true,
            degenerate: c.degenerate,
            pairs_checked: n * n.saturating_sub(1),
            sanity_warning: c.sanity_warning,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RandomSummary {
    pub delta: f64,
    pub n_points: usize,
    pub slope_grid: usize,
    pub slope_step: f64,
    pub size_target: usize,
    pub seed: u64,
    /// Points kept by each attempt, in order.
    pub kept_per_attempt: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub pairs_checked: u64,
    pub cross_base: u64,
    pub cross_shift: u64,
    pub same_cell: u64,
    pub violations: u64,
    pub first_violations: Vec<String>,
    pub sampled: bool,
}

/// Sizes, verified distances, gains and provenance of a constructed
/// configuration. Contains no timings, so repeated runs serialize identically.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub provenance: String,
    pub success: bool,
    pub size: usize,
    pub claimed_delta: Option<f64>,
    pub verification: Verification,
    pub gain: Option<GainRecord>,
    pub random: Option<RandomSummary>,
    pub cases: Option<CaseSummary>,
    pub levels: Option<LevelTable>,
    pub notes: Vec<String>,
}

impl BuildReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
