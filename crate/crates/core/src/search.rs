//! Local search for small configurations with large minimal distance.
//!
//! Random-restart coordinate ascent: perturb one coordinate of one element by
//! a step from a geometrically decaying schedule, clamp to `[-1,1]`, and keep
//! the move iff `d(X)` does not decrease. Restart 0 starts from the stacked
//! baseline, so the result is never worse than `2/k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{trivial_configuration, vertical_distance, ConfigElement, Configuration};

const STEP_START: f64 = 0.5;
const STEP_END: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub steps_per_restart: usize,
}

impl SearchBudget {
    pub const NONE: SearchBudget = SearchBudget {
        restarts: 1,
        steps_per_restart: 0,
    };
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub config: Configuration,
    pub delta: f64,
    pub restart: usize,
    /// `false` when the budget ran out below `delta_target`.
    pub met_target: bool,
}

fn min_dist(el: &[ConfigElement]) -> f64 {
    let mut best = f64::INFINITY;
    for (a, pa) in el.iter().enumerate() {
        for (b, pb) in el.iter().enumerate() {
            if a != b {
                best = best.min(vertical_distance(pa, pb));
            }
        }
    }
    best
}

fn ascend(mut el: Vec<ConfigElement>, steps: usize, rng: &mut ChaCha8Rng) -> (Vec<ConfigElement>, f64) {
    let mut d = min_dist(&el);
    let k = el.len();
    for t in 0..steps {
        let frac = t as f64 / steps.max(1) as f64;
        let step = STEP_START * (STEP_END / STEP_START).powf(frac);
        let idx = rng.gen_range(0..k);
        let coord = rng.gen_range(0..3);
        let delta = rng.gen_range(-step..=step);
        let old = el[idx];
        let slot = match coord {
            0 => &mut el[idx].x,
            1 => &mut el[idx].y,
            _ => &mut el[idx].theta,
        };
        *slot = (*slot + delta).clamp(-1.0, 1.0);
        let nd = min_dist(&el);
        if nd >= d {
            d = nd;
        } else {
            el[idx] = old;
        }
    }
    (el, d)
}

/// Search for `k_target` elements maximizing `d(X)`.
///
/// Restarts run in parallel with per-restart streams of `seed`; the winner
/// is the largest distance, ties going to the lowest restart index.
pub fn search_base(
    k_target: usize,
    delta_target: f64,
    budget: SearchBudget,
    seed: u64,
) -> Result<SearchOutcome> {
    if k_target < 2 {
        return Err(Error::InvalidParameter(format!(
            "k_target must be at least 2, got {k_target}"
        )));
    }
    // No pair in the configuration space is further apart than 4.
    if delta_target > 4.0 {
        return Err(Error::Precondition(format!(
            "delta_target = {delta_target} > 4 is out of reach"
        )));
    }
    let restarts = budget.restarts.max(1);
    let stacked: Vec<ConfigElement> = trivial_configuration(k_target)?.elements().to_vec();
    let results: Vec<(Vec<ConfigElement>, f64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let start = if r == 0 {
                stacked.clone()
            } else {
                (0..k_target)
                    .map(|_| {
                        ConfigElement::new(
                            rng.gen_range(-1.0..=1.0),
                            rng.gen_range(-1.0..=1.0),
                            rng.gen_range(-1.0..=1.0),
                        )
                    })
                    .collect()
            };
            ascend(start, budget.steps_per_restart, &mut rng)
        })
        .collect();
    let (restart, (elements, delta)) = results
        .into_iter()
        .enumerate()
        .fold(None::<(usize, (Vec<ConfigElement>, f64))>, |best, cand| match best {
            Some(b) if b.1 .1 >= cand.1 .1 => Some(b),
            _ => Some(cand),
        })
        .expect("at least one restart");
    let provenance = format!("search(k={k_target}, seed={seed}, restart={restart})");
    let config = Configuration::new(elements, Some(delta), provenance)?;
    Ok(SearchOutcome {
        config,
        delta,
        restart,
        met_target: delta >= delta_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::min_distance_bruteforce;

    #[test]
    fn zero_budget_returns_stacked_seed() {
        let out = search_base(5, 0.1, SearchBudget::NONE, 1).unwrap();
        assert_eq!(
            out.config.elements(),
            trivial_configuration(5).unwrap().elements()
        );
        assert_eq!(out.delta, 0.4);
        assert!(out.met_target);
    }

    #[test]
    fn never_below_baseline() {
        let budget = SearchBudget {
            restarts: 4,
            steps_per_restart: 2_000,
        };
        for k in [3, 6, 10] {
            let out = search_base(k, 0.0, budget, 7).unwrap();
            assert!(out.delta >= 2.0 / k as f64);
            assert_eq!(min_distance_bruteforce(&out.config).unwrap().value, out.delta);
        }
    }

    #[test]
    fn two_elements_approach_four() {
        let budget = SearchBudget {
            restarts: 8,
            steps_per_restart: 20_000,
        };
        let out = search_base(2, 3.9, budget, 3).unwrap();
        assert!(out.delta >= 3.9, "{}", out.delta);
        assert!(out.delta <= 4.0);
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(search_base(1, 0.1, SearchBudget::NONE, 0).is_err());
        assert!(matches!(
            search_base(3, 4.5, SearchBudget::NONE, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn deterministic() {
        let budget = SearchBudget {
            restarts: 3,
            steps_per_restart: 500,
        };
        let a = search_base(4, 1.0, budget, 9).unwrap();
        let b = search_base(4, 1.0, budget, 9).unwrap();
        assert_eq!(a.config, b.config);
    }
}
