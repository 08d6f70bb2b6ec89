//! Uniform-grid accelerated exact minimal distance.
//!
//! Points are bucketed into square cells. For the line of each element only
//! the cells its current candidate band can reach are visited: within a grid
//! column the band is the line's height range over the column's actual point
//! abscissae, widened by the best distance found so far plus a safety
//! margin. Every candidate pair is scored with [`vertical_distance`], so the
//! result is bit-identical to the brute-force scan.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    bruteforce_elements, vertical_distance, ConfigElement, Configuration, DistanceWitness,
};

/// Widening of every band. Coordinates are bounded by 1, so rounding in the
/// band endpoints is many orders of magnitude below this.
const MARGIN: f64 = 1e-9;

const SMALL_INPUT: usize = 32;
const LINES_PER_TASK: usize = 128;

/// A cell size giving roughly one point per cell over the bounding box.
pub fn default_cell(elements: &[ConfigElement]) -> f64 {
    let (xmin, xmax, ymin, ymax) = bounds(elements);
    let extent = (xmax - xmin).max(ymax - ymin).max(1e-6);
    extent / (elements.len().max(1) as f64).sqrt()
}

fn bounds(elements: &[ConfigElement]) -> (f64, f64, f64, f64) {
    elements.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), e| (a.min(e.x), b.max(e.x), c.min(e.y), d.max(e.y)),
    )
}

struct Grid {
    xmin: f64,
    ymin: f64,
    cell: f64,
    ncols: usize,
    nrows: usize,
    /// CSR layout: `starts[c * nrows + r]..starts[c * nrows + r + 1]` in `slots`.
    starts: Vec<usize>,
    slots: Vec<usize>,
    /// `(min x, max x)` of the points in each nonempty column.
    columns: Vec<(usize, f64, f64)>,
    ymax: f64,
}

impl Grid {
    fn build(elements: &[ConfigElement], cell: f64) -> Option<Grid> {
        let (xmin, xmax, ymin, ymax) = bounds(elements);
        let ncols = ((xmax - xmin) / cell).floor() as usize + 1;
        let nrows = ((ymax - ymin) / cell).floor() as usize + 1;
        let limit = 16 * elements.len() + 4096;
        if ncols.checked_mul(nrows).is_none_or(|c| c > limit) {
            return None;
        }
        let mut grid = Grid {
            xmin,
            ymin,
            cell,
            ncols,
            nrows,
            starts: vec![0; ncols * nrows + 1],
            slots: vec![0; elements.len()],
            columns: Vec::new(),
            ymax,
        };
        let ids: Vec<usize> = elements
            .iter()
            .map(|e| grid.col(e.x) * nrows + grid.row(e.y))
            .collect();
        for &id in &ids {
            grid.starts[id + 1] += 1;
        }
        for k in 0..ncols * nrows {
            grid.starts[k + 1] += grid.starts[k];
        }
        let mut fill = grid.starts.clone();
        for (index, &id) in ids.iter().enumerate() {
            grid.slots[fill[id]] = index;
            fill[id] += 1;
        }
        let mut spans = vec![(f64::INFINITY, f64::NEG_INFINITY); ncols];
        for (e, &id) in elements.iter().zip(&ids) {
            let span = &mut spans[id / nrows];
            span.0 = span.0.min(e.x);
            span.1 = span.1.max(e.x);
        }
        grid.columns = spans
            .into_iter()
            .enumerate()
            .filter(|(_, (lo, hi))| lo <= hi)
            .map(|(c, (lo, hi))| (c, lo, hi))
            .collect();
        Some(grid)
    }

    #[inline]
    fn col(&self, x: f64) -> usize {
        (((x - self.xmin) / self.cell).floor() as usize).min(self.ncols - 1)
    }

    #[inline]
    fn row(&self, y: f64) -> usize {
        (((y - self.ymin) / self.cell).floor() as usize).min(self.nrows - 1)
    }

    #[inline]
    fn cell_slots(&self, c: usize, r: usize) -> &[usize] {
        let k = c * self.nrows + r;
        &self.slots[self.starts[k]..self.starts[k + 1]]
    }

    /// Best pair with the line of `b`, pruning against `best`.
    fn scan_line(
        &self,
        elements: &[ConfigElement],
        b: usize,
        mut best: DistanceWitness,
    ) -> DistanceWitness {
        let line = &elements[b];
        for &(c, cx_lo, cx_hi) in &self.columns {
            let (h1, h2) = (line.line_at(cx_lo), line.line_at(cx_hi));
            let reach = best.value + MARGIN;
            let lo = h1.min(h2) - reach;
            let hi = h1.max(h2) + reach;
            if hi < self.ymin || lo > self.ymax {
                continue;
            }
            let r_lo = self.row(lo.max(self.ymin));
            let r_hi = self.row(hi.min(self.ymax));
            for r in r_lo..=r_hi {
                for &a in self.cell_slots(c, r) {
                    if a == b {
                        continue;
                    }
                    let cand = DistanceWitness {
                        index_a: a,
                        index_b: b,
                        value: vertical_distance(&elements[a], line),
                    };
                    if cand.better_than(&best) {
                        best = cand;
                    }
                }
            }
        }
        best
    }
}

/// Exact `d(X)` using a uniform grid with square cells of side `cell`.
///
/// Falls back to the exhaustive scan for tiny inputs and when the requested
/// cell size would need an unreasonable number of cells.
pub fn min_distance_grid(config: &Configuration, cell: f64) -> Result<DistanceWitness> {
    let elements = config.elements();
    let n = elements.len();
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    if !(cell.is_finite() && cell > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid cell must be positive, got {cell}"
        )));
    }
    if n <= SMALL_INPUT {
        return bruteforce_elements(elements);
    }
    let Some(grid) = Grid::build(elements, cell) else {
        return bruteforce_elements(elements);
    };

    // Upper bound from consecutive pairs; every window is at least as wide
    // as the final minimum, so ties at the minimum are always visited.
    let seed = (0..n - 1)
        .flat_map(|i| [(i, i + 1), (i + 1, i)])
        .map(|(a, b)| DistanceWitness {
            index_a: a,
            index_b: b,
            value: vertical_distance(&elements[a], &elements[b]),
        })
        .reduce(DistanceWitness::pick)
        .expect("n >= 2");

    let lines: Vec<usize> = (0..n).collect();
    let best = lines
        .par_chunks(LINES_PER_TASK)
        .map(|chunk| {
            chunk
                .iter()
                .fold(seed, |best, &b| grid.scan_line(elements, b, best))
        })
        .reduce_with(DistanceWitness::pick)
        .expect("n >= 2");
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{min_distance_bruteforce, trivial_configuration};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_config(n: usize, seed: u64) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elements = (0..n)
            .map(|_| {
                ConfigElement::new(
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-1.0..=1.0),
                )
            })
            .collect();
        Configuration::new(elements, None, "random").unwrap()
    }

    #[test]
    fn trivial_hundred() {
        let t = trivial_configuration(100).unwrap();
        let w = min_distance_grid(&t, default_cell(t.elements())).unwrap();
        assert_eq!(w.value, 0.02);
    }

    #[test]
    fn matches_bruteforce_on_random_inputs() {
        for (seed, n) in [(1, 40), (2, 300), (3, 900), (4, 1500)] {
            let x = random_config(n, seed);
            let brute = min_distance_bruteforce(&x).unwrap();
            for cell in [default_cell(x.elements()), 0.01, 0.3, 5.0] {
                let fast = min_distance_grid(&x, cell).unwrap();
                assert_eq!(fast.value, brute.value);
                assert_eq!((fast.index_a, fast.index_b), (brute.index_a, brute.index_b));
            }
        }
    }

    #[test]
    fn repeated_runs_agree() {
        let x = random_config(700, 9);
        let a = min_distance_grid(&x, 0.05).unwrap();
        let b = min_distance_grid(&x, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_cell_falls_back() {
        let x = random_config(100, 5);
        let w = min_distance_grid(&x, 1e-9).unwrap();
        assert_eq!(w, min_distance_bruteforce(&x).unwrap());
    }

    #[test]
    fn rejects_bad_cell() {
        let x = random_config(10, 5);
        assert!(min_distance_grid(&x, 0.0).is_err());
        assert!(min_distance_grid(&x, f64::NAN).is_err());
    }

    #[test]
    fn clustered_single_column() {
        // All points on x = 0: one grid column, distances purely vertical.
        let elements = (0..500)
            .map(|i| ConfigElement::new(0.0, -0.9 + i as f64 * 0.0036, 0.0))
            .collect();
        let x = Configuration::new(elements, None, "col").unwrap();
        assert_eq!(
            min_distance_grid(&x, default_cell(x.elements())).unwrap(),
            min_distance_bruteforce(&x).unwrap()
        );
    }
}
