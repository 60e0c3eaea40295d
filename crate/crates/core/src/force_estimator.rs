//! Binned running average of local mean force samples.

use crate::error::Result;
use crate::field::VectorField2;
use crate::grid::{BinIndex, Grid2};
use crate::reaction_coordinate::LocalMeanForceSample;

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedForceAccumulator {
    grid: Grid2,
    sum_f: Vec<[f64; 2]>,
    count: Vec<u64>,
    outside: u64,
}

impl BinnedForceAccumulator {
    pub fn new(grid: Grid2) -> Self {
        BinnedForceAccumulator {
            sum_f: vec![[0.0; 2]; grid.n_cells()],
            count: vec![0; grid.n_cells()],
            outside: 0,
            grid,
        }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    /// Adds one sample. Returns `false` (and only tallies the miss) when `z`
    /// lies outside the grid.
    pub fn deposit(&mut self, z: [f64; 2], f: [f64; 2]) -> bool {
        match self.grid.bin_index(z) {
            BinIndex::Inside(i, j) => {
                let c = self.grid.cell(i, j);
                self.sum_f[c][0] += f[0];
                self.sum_f[c][1] += f[1];
                self.count[c] += 1;
                true
            }
            BinIndex::Outside => {
                self.outside += 1;
                false
            }
        }
    }

    /// Deposits samples in the given order.
    pub fn deposit_all<'a>(&mut self, samples: impl IntoIterator<Item = &'a LocalMeanForceSample>) {
        for s in samples {
            self.deposit(s.z, s.f);
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.count
    }

    pub fn sums(&self) -> &[[f64; 2]] {
        &self.sum_f
    }

    /// Number of samples that fell outside the grid.
    pub fn outside(&self) -> u64 {
        self.outside
    }

    pub fn total_count(&self) -> u64 {
        self.count.iter().sum()
    }

    /// Per-bin mean force; unvisited bins hold zero and are marked invalid
    /// through the attached counts.
    pub fn mean_force_field(&self) -> Result<VectorField2> {
        let values = self
            .sum_f
            .iter()
            .zip(&self.count)
            .map(|(s, &n)| {
                if n == 0 {
                    [0.0, 0.0]
                } else {
                    let n = n as f64;
                    [s[0] / n, s[1] / n]
                }
            })
            .collect();
        VectorField2::new(self.grid, values)?.with_counts(self.count.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2 {
        Grid2::bounded(-0.2, 1.2, 50).unwrap()
    }

    #[test]
    fn single_deposit_is_the_mean() {
        let mut acc = BinnedForceAccumulator::new(grid());
        assert!(acc.deposit([0.5, 0.5], [1.5, -2.0]));
        let f = acc.mean_force_field().unwrap();
        let (i, j) = grid().bin_index([0.5, 0.5]).inside().unwrap();
        assert_eq!(f.get(i, j), [1.5, -2.0]);
    }

    #[test]
    fn two_deposits_average() {
        let mut acc = BinnedForceAccumulator::new(grid());
        acc.deposit([0.1, 0.1], [1.0, 0.0]);
        acc.deposit([0.1, 0.1], [3.0, 0.0]);
        let f = acc.mean_force_field().unwrap();
        let (i, j) = grid().bin_index([0.1, 0.1]).inside().unwrap();
        assert_eq!(f.get(i, j), [2.0, 0.0]);
    }

    #[test]
    fn outside_deposit_changes_nothing() {
        let mut acc = BinnedForceAccumulator::new(grid());
        assert!(!acc.deposit([1.25, 0.5], [1.0, 1.0]));
        assert_eq!(acc.total_count(), 0);
        assert_eq!(acc.outside(), 1);
        assert!(acc.mean_force_field().unwrap().values().iter().all(|v| *v == [0.0, 0.0]));
    }

    #[test]
    fn empty_accumulator_is_zero_and_invalid() {
        let acc = BinnedForceAccumulator::new(grid());
        let f = acc.mean_force_field().unwrap();
        assert_eq!(f.sum_squares(), 0.0);
        assert!(f.validity_mask().iter().all(|v| !v));
    }
}
