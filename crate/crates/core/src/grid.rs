//! Uniform binning of the two-dimensional reaction-coordinate domain.
//!
//! Bins are addressed by `(i, j)` with `i` running along the first
//! coordinate. Flat bin indices are row-major in `j`: `j * n_bins + i`.
//! Nodes sit on bin corners; a bounded grid has `(n_bins + 1)^2` of them and a
//! periodic grid `n_bins^2` (the last row and column wrap onto the first).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    xi_min: f64,
    xi_max: f64,
    n_bins: usize,
    periodic: bool,
}

/// Location of a reaction-coordinate value relative to the binned domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinIndex {
    Inside(usize, usize),
    Outside,
}

impl BinIndex {
    pub fn inside(self) -> Option<(usize, usize)> {
        match self {
            BinIndex::Inside(i, j) => Some((i, j)),
            BinIndex::Outside => None,
        }
    }
}

impl Grid2 {
    pub fn new(xi_min: f64, xi_max: f64, n_bins: usize, periodic: bool) -> Result<Self> {
        if !(xi_min.is_finite() && xi_max.is_finite()) {
            return Err(Error::domain("grid bounds must be finite"));
        }
        if xi_max <= xi_min {
            return Err(Error::domain(format!(
                "grid upper bound {xi_max} must exceed lower bound {xi_min}"
            )));
        }
        if n_bins < 2 {
            return Err(Error::domain(format!(
                "grid needs at least 2 bins per axis (got {n_bins})"
            )));
        }
        Ok(Grid2 {
            xi_min,
            xi_max,
            n_bins,
            periodic,
        })
    }

    /// Bounded grid on `[xi_min, xi_max]^2`.
    pub fn bounded(xi_min: f64, xi_max: f64, n_bins: usize) -> Result<Self> {
        Self::new(xi_min, xi_max, n_bins, false)
    }

    /// Periodic grid on the torus `[xi_min, xi_max)^2`.
    pub fn periodic(xi_min: f64, xi_max: f64, n_bins: usize) -> Result<Self> {
        Self::new(xi_min, xi_max, n_bins, true)
    }

    pub fn xi_min(&self) -> f64 {
        self.xi_min
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn bin_width(&self) -> f64 {
        (self.xi_max - self.xi_min) / self.n_bins as f64
    }

    pub fn length(&self) -> f64 {
        self.xi_max - self.xi_min
    }

    /// Total number of bins (`n_bins^2`).
    pub fn n_cells(&self) -> usize {
        self.n_bins * self.n_bins
    }

    /// Number of nodes along one axis.
    pub fn nodes_per_axis(&self) -> usize {
        if self.periodic {
            self.n_bins
        } else {
            self.n_bins + 1
        }
    }

    pub fn n_nodes(&self) -> usize {
        let m = self.nodes_per_axis();
        m * m
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.n_bins + i
    }

    #[inline]
    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.n_bins, cell / self.n_bins)
    }

    /// Flat node index; on a periodic grid indices wrap.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        let m = self.nodes_per_axis();
        if self.periodic {
            (j % m) * m + (i % m)
        } else {
            j * m + i
        }
    }

    #[inline]
    pub fn node_coords(&self, node: usize) -> (usize, usize) {
        let m = self.nodes_per_axis();
        (node % m, node / m)
    }

    /// Position of node `(i, j)`.
    pub fn node_position(&self, i: usize, j: usize) -> [f64; 2] {
        let d = self.bin_width();
        [self.xi_min + i as f64 * d, self.xi_min + j as f64 * d]
    }

    pub fn bin_center(&self, i: usize, j: usize) -> [f64; 2] {
        let d = self.bin_width();
        [
            self.xi_min + (i as f64 + 0.5) * d,
            self.xi_min + (j as f64 + 0.5) * d,
        ]
    }

    /// The four corner nodes of bin `(i, j)`, ordered `(0,0), (1,0), (0,1), (1,1)`.
    #[inline]
    pub fn cell_nodes(&self, i: usize, j: usize) -> [usize; 4] {
        [
            self.node(i, j),
            self.node(i + 1, j),
            self.node(i, j + 1),
            self.node(i + 1, j + 1),
        ]
    }

    fn wrap_value(&self, x: f64) -> f64 {
        let l = self.length();
        let y = (x - self.xi_min).rem_euclid(l);
        self.xi_min + y
    }

    fn axis_index(&self, x: f64) -> Option<usize> {
        let d = self.bin_width();
        if self.periodic {
            let k = ((self.wrap_value(x) - self.xi_min) / d).floor() as usize;
            // rem_euclid can round up to exactly the period
            Some(k.min(self.n_bins - 1))
        } else {
            let k = ((x - self.xi_min) / d).floor();
            if k < 0.0 || k >= self.n_bins as f64 {
                None
            } else {
                Some(k as usize)
            }
        }
    }

    /// Bin containing `z`, or [`BinIndex::Outside`] when a component leaves the
    /// bounded domain. Periodic grids never report outside.
    pub fn bin_index(&self, z: [f64; 2]) -> BinIndex {
        match (self.axis_index(z[0]), self.axis_index(z[1])) {
            (Some(i), Some(j)) => BinIndex::Inside(i, j),
            _ => BinIndex::Outside,
        }
    }

    /// Bin containing `z`, clamped onto the boundary bins for points outside.
    pub fn clamped_bin(&self, z: [f64; 2]) -> (usize, usize) {
        let clamp = |x: f64| -> usize {
            if self.periodic {
                return self.axis_index(x).unwrap_or(0);
            }
            let k = ((x - self.xi_min) / self.bin_width()).floor();
            if k.is_nan() || k < 0.0 {
                0
            } else {
                (k as usize).min(self.n_bins - 1)
            }
        };
        (clamp(z[0]), clamp(z[1]))
    }

    pub fn same_as(&self, other: &Grid2) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_grid() -> Grid2 {
        Grid2::bounded(-0.2, 1.2, 50).unwrap()
    }

    #[test]
    fn bin_width_matches_bounds() {
        let g = paper_grid();
        assert!((g.bin_width() - 0.028).abs() < 1e-12);
        assert!((g.bin_width() * 50.0 - 1.4).abs() < 1e-12);
    }

    #[test]
    fn lower_corner_is_first_bin() {
        let g = paper_grid();
        assert_eq!(g.bin_index([-0.2, -0.2]), BinIndex::Inside(0, 0));
    }

    #[test]
    fn beyond_upper_bound_is_outside() {
        let g = paper_grid();
        assert_eq!(g.bin_index([1.25, 0.5]), BinIndex::Outside);
        assert_eq!(g.bin_index([0.5, -0.21]), BinIndex::Outside);
        assert_eq!(g.bin_index([1.2, 0.5]), BinIndex::Outside);
    }

    #[test]
    fn floor_arithmetic() {
        let g = paper_grid();
        let d = g.bin_width();
        assert_eq!(
            g.bin_index([-0.2 + 1.5 * d, -0.2 + 0.5 * d]),
            BinIndex::Inside(1, 0)
        );
    }

    #[test]
    fn periodic_grid_wraps() {
        let g = Grid2::periodic(0.0, 1.0, 10).unwrap();
        assert_eq!(g.bin_index([1.05, -0.05]), BinIndex::Inside(0, 9));
        assert_eq!(g.node(10, 3), g.node(0, 3));
        assert_eq!(g.n_nodes(), 100);
    }

    #[test]
    fn clamping_keeps_boundary_bins() {
        let g = paper_grid();
        assert_eq!(g.clamped_bin([-5.0, 7.0]), (0, 49));
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid2::bounded(1.0, 1.0, 10).is_err());
        assert!(Grid2::bounded(0.0, 1.0, 1).is_err());
    }
}
