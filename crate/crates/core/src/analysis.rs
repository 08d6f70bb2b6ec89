//! Baselines, sanity bounds and gain metrics.
//!
//! Gain is measured against the stacked-lines baseline of the same size,
//! whose minimal distance is `2/n`: `gain = d(X) / (2/n)`, i.e. `n d(X) / 2`.
//! The empirical exponent `gamma_emp = ln(gain) / ln(1/d)` solves
//! `gain = d^(-gamma)` at this one configuration.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{verify_claim, Configuration, DistanceWitness};
use crate::report::BuildReport;

/// Tiling upper bound on `d(X)` for `n` elements, `4 sqrt(2) / floor(sqrt(n - 1))`.
///
/// The factor 4 covers the side-2 square and the vertical-versus-Euclidean
/// comparison. It is a tripwire for verifier bugs, not a tight bound.
pub fn upper_bound_sanity(n: usize) -> f64 {
    assert!(n >= 2, "sanity bound needs n >= 2");
    let root = ((n - 1) as u64).isqrt();
    4.0 * std::f64::consts::SQRT_2 / root as f64
}

/// Minimal distance of the stacked baseline with `n` lines.
pub fn baseline_delta(n: usize) -> f64 {
    2.0 / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainRecord {
    pub n: usize,
    pub delta: f64,
    pub gain: f64,
    pub gamma_emp: f64,
    pub witness: Option<DistanceWitness>,
    pub provenance: String,
}

impl GainRecord {
    pub fn from_parts(n: usize, delta: f64) -> Self {
        let gain = delta / baseline_delta(n);
        Self {
            n,
            delta,
            gain,
            gamma_emp: empirical_exponent(gain, delta),
            witness: None,
            provenance: String::new(),
        }
    }
}

/// `ln(gain) / ln(1/delta)`; zero when `delta >= 1` or the gain is exactly 1.
pub fn empirical_exponent(gain: f64, delta: f64) -> f64 {
    if delta >= 1.0 || delta <= 0.0 || gain == 1.0 {
        0.0
    } else {
        gain.ln() / (1.0 / delta).ln()
    }
}

/// Gain of a configuration, after exact verification of its claim.
pub fn gain_report(config: &Configuration) -> Result<GainRecord> {
    let check = verify_claim(config)?;
    let (Some(measured), Some(witness)) = (check.measured, check.witness) else {
        return Err(Error::Precondition(format!(
            "gain needs at least two elements, got {}",
            config.len()
        )));
    };
    let mut record = GainRecord::from_parts(config.len(), measured);
    record.witness = Some(witness);
    record.provenance = config.provenance().to_string();
    Ok(record)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    pub n: usize,
    pub delta: f64,
    pub gain: f64,
    pub gamma_emp: f64,
    /// `n_t / n_{t-1}`, absent on the first row.
    pub size_factor: Option<f64>,
    pub delta_factor: Option<f64>,
    pub gain_factor: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelTable {
    pub rows: Vec<LevelRow>,
}

/// Per-level growth table from the reports of successive levels.
///
/// Levels without a distance (fewer than two elements) are skipped.
pub fn level_table(reports: &[BuildReport]) -> LevelTable {
    let mut rows: Vec<LevelRow> = Vec::with_capacity(reports.len());
    for (level, report) in reports.iter().enumerate() {
        let Some(delta) = report.claimed_delta else {
            continue;
        };
        if report.size < 2 {
            continue;
        }
        let g = GainRecord::from_parts(report.size, delta);
        let prev = rows.last();
        rows.push(LevelRow {
            level: level + 1,
            n: report.size,
            delta,
            gain: g.gain,
            gamma_emp: g.gamma_emp,
            size_factor: prev.map(|p| report.size as f64 / p.n as f64),
            delta_factor: prev.map(|p| delta / p.delta),
            gain_factor: prev.map(|p| g.gain / p.gain),
        });
    }
    LevelTable { rows }
}

impl LevelTable {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5} {:>10} {:>14} {:>12} {:>10} {:>10} {:>12}",
            "level", "n", "delta", "gain", "gamma", "n ratio", "gain ratio"
        );
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                out,
                "{:>5} {:>10} {:>14.6e} {:>12.4} {:>10.5} {:>10} {:>12}",
                r.level,
                r.n,
                r.delta,
                r.gain,
                r.gamma_emp,
                opt(r.size_factor),
                opt(r.gain_factor)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::trivial_configuration;

    #[test]
    fn sanity_bound_values() {
        assert_eq!(upper_bound_sanity(2), 4.0 * std::f64::consts::SQRT_2);
        assert!((upper_bound_sanity(101) - 0.565_685_424_949_238).abs() < 1e-12);
        assert!(0.02 <= upper_bound_sanity(100));
    }

    #[test]
    fn trivial_gain_is_one() {
        for n in [2, 3, 4, 10, 49, 100, 103, 1000] {
            let g = gain_report(&trivial_configuration(n).unwrap()).unwrap();
            assert_eq!(g.gain, 1.0, "n = {n}");
            assert_eq!(g.gamma_emp, 0.0);
        }
    }

    #[test]
    fn exponent_from_definition() {
        let delta = 2f64.powi(-24);
        let g = GainRecord::from_parts(1 << 27, delta);
        assert_eq!(g.gain, 4.0);
        let expected = 4f64.ln() / (24.0 * 2f64.ln());
        assert!((g.gamma_emp - expected).abs() < 1e-15);
        assert!((g.gamma_emp - 0.0833).abs() < 1e-4);
    }

    #[test]
    fn singleton_rejected() {
        let s = trivial_configuration(1).unwrap();
        assert!(gain_report(&s).is_err());
    }

    #[test]
    fn table_factors() {
        let mk = |size, d| BuildReport {
            size,
            claimed_delta: Some(d),
            ..BuildReport::default()
        };
        let t = level_table(&[mk(45, 0.25), mk(2025, 0.25 / 64.0)]);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].size_factor, None);
        assert_eq!(t.rows[1].size_factor, Some(45.0));
        assert_eq!(t.rows[1].delta_factor, Some(1.0 / 64.0));
        assert!(t.to_text().lines().count() == 3);

        let single = level_table(&[mk(10, 0.2)]);
        let g = GainRecord::from_parts(10, 0.2);
        assert_eq!(single.rows[0].gain, g.gain);
        assert_eq!(single.rows[0].gamma_emp, g.gamma_emp);
    }
}
