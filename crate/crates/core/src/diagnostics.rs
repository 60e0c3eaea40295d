//! Comparison statistics: spread of estimated fields over independent
//! realizations, relative gradient error, occupancy marginals and
//! transition counts between metastable states.

use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::grid::{BinIndex, Grid2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationVariance {
    pub components: [f64; 2],
}

impl RealizationVariance {
    pub fn total(&self) -> f64 {
        self.components[0] + self.components[1]
    }
}

/// Spread of `K` realizations of a binned field, per component:
///
/// ```text
/// mean_bins( mean_k F_k^2 ) - mean_bins( (mean_k F_k)^2 )
/// ```
pub fn realization_variance(fields: &[VectorField2]) -> Result<RealizationVariance> {
    if fields.len() < 2 {
        return Err(Error::domain(format!(
            "realization variance needs at least 2 fields (got {})",
            fields.len()
        )));
    }
    let grid = fields[0].grid();
    for f in &fields[1..] {
        grid.same_as(f.grid())?;
    }
    let k = fields.len() as f64;
    let n = grid.n_cells();
    let mut second = [0.0; 2];
    let mut mean_sq = [0.0; 2];
    for cell in 0..n {
        for c in 0..2 {
            let mut s = 0.0;
            let mut s2 = 0.0;
            for f in fields {
                let v = f.values()[cell][c];
                s += v;
                s2 += v * v;
            }
            second[c] += s2 / k;
            mean_sq[c] += (s / k) * (s / k);
        }
    }
    let components = [0, 1].map(|c| ((second[c] - mean_sq[c]) / n as f64).max(0.0));
    Ok(RealizationVariance { components })
}

/// `sqrt( sum |est - ref|^2 / sum |ref|^2 )` over the bins where `mask` is set.
pub fn l2_gradient_error(est: &VectorField2, reference: &VectorField2, mask: &[bool]) -> Result<f64> {
    est.grid().same_as(reference.grid())?;
    if mask.len() != est.values().len() {
        return Err(Error::GridMismatch(format!(
            "mask has {} entries for {} bins",
            mask.len(),
            est.values().len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut any = false;
    for ((e, r), &m) in est.values().iter().zip(reference.values()).zip(mask) {
        if m {
            any = true;
            num += (e[0] - r[0]).powi(2) + (e[1] - r[1]).powi(2);
            den += r[0] * r[0] + r[1] * r[1];
        }
    }
    if !any {
        return Err(Error::domain("error mask selects no bins"));
    }
    if den == 0.0 {
        return Err(Error::domain("reference field vanishes on the masked bins"));
    }
    Ok((num / den).sqrt())
}

/// Per-bin occupancy of the reaction-coordinate values `zs`; values outside
/// the grid are skipped.
pub fn occupancy(grid: &Grid2, zs: impl IntoIterator<Item = [f64; 2]>) -> Vec<u64> {
    let mut counts = vec![0u64; grid.n_cells()];
    for z in zs {
        if let BinIndex::Inside(i, j) = grid.bin_index(z) {
            counts[grid.cell(i, j)] += 1;
        }
    }
    counts
}

/// Normalized marginals of a 2D occupancy histogram: the first sums over
/// `j` (distribution of the first coordinate), the second over `i`.
pub fn marginal_histograms(grid: &Grid2, counts: &[u64]) -> Result<[Vec<f64>; 2]> {
    if counts.len() != grid.n_cells() {
        return Err(Error::GridMismatch(format!(
            "expected {} counts, got {}",
            grid.n_cells(),
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::domain("marginals need at least one sample"));
    }
    let n = grid.n_bins();
    let mut first = vec![0.0; n];
    let mut second = vec![0.0; n];
    for (cell, &c) in counts.iter().enumerate() {
        let (i, j) = grid.cell_coords(cell);
        first[i] += c as f64;
        second[j] += c as f64;
    }
    let t = total as f64;
    first.iter_mut().chain(second.iter_mut()).for_each(|v| *v /= t);
    Ok([first, second])
}

/// `max_i |p_i - 1/n|`.
pub fn sup_distance_to_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    p.iter().map(|v| (v - u).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Low,
    High,
}

/// Two-threshold transition counter: a transition is a move from below
/// `low` to above `high` or back. Excursions between the thresholds do not
/// count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCounter {
    low: f64,
    high: f64,
    side: Option<Side>,
    count: u64,
}

impl TransitionCounter {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low < high) {
            return Err(Error::domain(format!("transition thresholds must satisfy low < high ({low}, {high})")));
        }
        Ok(TransitionCounter {
            low,
            high,
            side: None,
            count: 0,
        })
    }

    pub fn observe(&mut self, x: f64) {
        let now = if x < self.low {
            Some(Side::Low)
        } else if x > self.high {
            Some(Side::High)
        } else {
            None
        };
        if let Some(s) = now {
            if self.side.is_some_and(|prev| prev != s) {
                self.count += 1;
            }
            self.side = Some(s);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

pub fn transition_count(series: &[f64], low: f64, high: f64) -> Result<u64> {
    let mut counter = TransitionCounter::new(low, high)?;
    series.iter().for_each(|&x| counter.observe(x));
    Ok(counter.count())
}

/// Default thresholds on a bond length: a quarter and three quarters of the
/// way from the compact to the stretched minimum.
pub fn default_bond_thresholds(d1: f64, omega: f64) -> (f64, f64) {
    (d1 + 0.5 * omega, d1 + 1.5 * omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2 {
        Grid2::bounded(0.0, 1.0, 2).unwrap()
    }

    #[test]
    fn identical_realizations_have_no_spread() {
        let f = VectorField2::from_fn(grid(), |z| [z[0], z[1] * 3.0]);
        let v = realization_variance(&[f.clone(), f.clone(), f]).unwrap();
        assert_eq!(v.total(), 0.0);
    }

    #[test]
    fn single_bin_two_values() {
        let g = grid();
        let mut a = VectorField2::zeros(g);
        let mut b = VectorField2::zeros(g);
        a.values_mut()[0] = [0.0, 0.0];
        b.values_mut()[0] = [2.0, 0.0];
        let v = realization_variance(&[a, b]).unwrap();
        // (1/2)(0 + 4) - 1 = 1 in the one bin, spread over 4 bins
        assert!((v.components[0] - 0.25).abs() < 1e-15);
        assert_eq!(v.components[1], 0.0);
    }

    #[test]
    fn error_metric_normalization() {
        let g = grid();
        let r = VectorField2::from_fn(g, |z| [1.0 + z[0], -z[1]]);
        let mask = vec![true; 4];
        assert_eq!(l2_gradient_error(&r, &r, &mask).unwrap(), 0.0);
        assert!((l2_gradient_error(&VectorField2::zeros(g), &r, &mask).unwrap() - 1.0).abs() < 1e-15);
        let scaled = r.linear_combination(1.1, &r, 0.0).unwrap();
        assert!((l2_gradient_error(&scaled, &r, &mask).unwrap() - 0.1).abs() < 1e-12);
        assert!(l2_gradient_error(&r, &r, &[false; 4]).is_err());
    }

    #[test]
    fn marginals_of_a_point_mass() {
        let g = Grid2::bounded(0.0, 1.0, 4).unwrap();
        let counts = occupancy(&g, vec![[0.6, 0.1]; 5]);
        let [m1, m2] = marginal_histograms(&g, &counts).unwrap();
        assert_eq!(m1, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(m2, vec![1.0, 0.0, 0.0, 0.0]);
        assert!((sup_distance_to_uniform(&m1) - 0.75).abs() < 1e-15);
        assert!(marginal_histograms(&g, &[0; 16]).is_err());
    }

    #[test]
    fn uniform_occupancy_has_flat_marginals() {
        let g = Grid2::bounded(0.0, 1.0, 4).unwrap();
        let [m1, m2] = marginal_histograms(&g, &[3; 16]).unwrap();
        assert!(m1.iter().chain(&m2).all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn hysteresis_counting() {
        let d1 = 2f64.powf(1.0 / 6.0);
        let (low, high) = default_bond_thresholds(d1, 2.0);
        assert_eq!(transition_count(&[3.0; 10], low, high).unwrap(), 0);
        assert_eq!(transition_count(&[d1, d1 + 4.0, d1], low, high).unwrap(), 2);
        let chatter: Vec<f64> = (0..50).map(|k| if k % 2 == 0 { low + 0.01 } else { high - 0.01 }).collect();
        assert_eq!(transition_count(&chatter, low, high).unwrap(), 0);
        assert!(TransitionCounter::new(2.0, 1.0).is_err());
    }
}
