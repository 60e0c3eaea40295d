//! Discrete fields over the reaction-coordinate grid.
//!
//! * [`ScalarField`]: nodal values of a bilinear (Q1) function, e.g. a free
//!   energy estimate. Kept in the zero-mean gauge by the projection code.
//! * [`VectorField2`]: one vector per bin, e.g. the binned mean force.
//! * [`QuadratureField`]: a vector field sampled at the 2x2 Gauss points of
//!   every bin. Binned fields embed as constants; gradients of Q1 functions
//!   embed exactly. All L2 inner products between such fields are computed
//!   exactly by the 2x2 rule.
//! * [`WeightField`]: a positive per-bin probability density.

use crate::error::{Error, Result};
use crate::grid::Grid2;

/// Gauss points of the two-point rule on `[0, 1]`.
pub const GAUSS_POINTS: [f64; 2] = [
    0.5 - 0.288_675_134_594_812_9,
    0.5 + 0.288_675_134_594_812_9,
];

/// Reference coordinates of quadrature point `k` (`k = a + 2 b`).
#[inline]
pub fn gauss_point(k: usize) -> (f64, f64) {
    (GAUSS_POINTS[k % 2], GAUSS_POINTS[k / 2])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "expected {} nodal values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid2) -> Self {
        ScalarField {
            values: vec![0.0; grid.n_nodes()],
            grid,
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid2, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let m = grid.nodes_per_axis();
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..m {
            for i in 0..m {
                values.push(f(grid.node_position(i, j)));
            }
        }
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node(i, j)]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Shifts the field to zero nodal mean.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.values.iter_mut().for_each(|v| *v -= m);
    }

    pub fn max_abs_difference(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    grid: Grid2,
    values: Vec<[f64; 2]>,
    counts: Option<Vec<u64>>,
}

impl VectorField2 {
    pub fn new(grid: Grid2, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "expected {} bin values, got {}",
                grid.n_cells(),
                values.len()
            )));
        }
        Ok(VectorField2 {
            grid,
            values,
            counts: None,
        })
    }

    pub fn zeros(grid: Grid2) -> Self {
        VectorField2 {
            values: vec![[0.0; 2]; grid.n_cells()],
            grid,
            counts: None,
        }
    }

    /// Samples `f` at every bin center.
    pub fn from_fn(grid: Grid2, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> Self {
        let n = grid.n_bins();
        let mut values = Vec::with_capacity(grid.n_cells());
        for j in 0..n {
            for i in 0..n {
                values.push(f(grid.bin_center(i, j)));
            }
        }
        VectorField2 {
            grid,
            values,
            counts: None,
        }
    }

    /// Attaches per-bin sample counts; bins with a zero count become invalid.
    pub fn with_counts(mut self, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != self.values.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} counts, got {}",
                self.values.len(),
                counts.len()
            )));
        }
        self.counts = Some(counts);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        self.values[self.grid.cell(i, j)]
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn is_valid(&self, cell: usize) -> bool {
        self.counts.as_ref().is_none_or(|c| c[cell] > 0)
    }

    pub fn validity_mask(&self) -> Vec<bool> {
        (0..self.values.len()).map(|c| self.is_valid(c)).collect()
    }

    /// Sum of squared vector norms over all bins.
    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum()
    }

    pub fn max_abs_difference(&self, other: &VectorField2) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max)
    }

    /// `a * self + b * other`, dropping the counts.
    pub fn linear_combination(&self, a: f64, other: &VectorField2, b: f64) -> Result<VectorField2> {
        self.grid.same_as(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| [a * x[0] + b * y[0], a * x[1] + b * y[1]])
            .collect();
        VectorField2::new(self.grid, values)
    }
}

/// Positive per-bin density, normalized so that its integral over the
/// domain is one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    grid: Grid2,
    values: Vec<f64>,
}

impl WeightField {
    /// Normalizes `values`; every value must be strictly positive.
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "expected {} weights, got {}",
                grid.n_cells(),
                values.len()
            )));
        }
        if let Some((k, w)) = values.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::domain(format!("weight of bin {k} must be positive (got {w})")));
        }
        let area = grid.bin_width() * grid.bin_width();
        let total: f64 = values.iter().sum::<f64>() * area;
        Ok(WeightField {
            values: values.into_iter().map(|w| w / total).collect(),
            grid,
        })
    }

    pub fn uniform(grid: Grid2) -> Self {
        let v = 1.0 / (grid.length() * grid.length());
        WeightField {
            values: vec![v; grid.n_cells()],
            grid,
        }
    }

    /// Density estimate from per-bin occupancy counts, floored at `floor`
    /// before normalization so that every weight stays positive.
    pub fn from_occupancy(grid: Grid2, counts: &[u64], floor: f64) -> Result<Self> {
        if counts.len() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "expected {} counts, got {}",
                grid.n_cells(),
                counts.len()
            )));
        }
        if !(floor > 0.0) {
            return Err(Error::domain("weight floor must be positive"));
        }
        let total: u64 = counts.iter().sum();
        let area = grid.bin_width() * grid.bin_width();
        let values = if total == 0 {
            vec![1.0; counts.len()]
        } else {
            counts
                .iter()
                .map(|&c| (c as f64 / (total as f64 * area)).max(floor))
                .collect()
        };
        WeightField::new(grid, values)
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Vector field sampled at the four Gauss points of every bin.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureField {
    grid: Grid2,
    values: Vec<[[f64; 2]; 4]>,
}

impl QuadratureField {
    pub fn new(grid: Grid2, values: Vec<[[f64; 2]; 4]>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "expected {} cells, got {}",
                grid.n_cells(),
                values.len()
            )));
        }
        Ok(QuadratureField { grid, values })
    }

    /// Samples `f` at the physical Gauss points.
    pub fn from_fn(grid: Grid2, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> Self {
        let n = grid.n_bins();
        let d = grid.bin_width();
        let mut values = Vec::with_capacity(grid.n_cells());
        for j in 0..n {
            for i in 0..n {
                let origin = grid.node_position(i, j);
                let mut cell = [[0.0; 2]; 4];
                for (k, v) in cell.iter_mut().enumerate() {
                    let (s, t) = gauss_point(k);
                    *v = f([origin[0] + s * d, origin[1] + t * d]);
                }
                values.push(cell);
            }
        }
        QuadratureField { grid, values }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[[[f64; 2]; 4]] {
        &self.values
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &QuadratureField, b: f64) -> Result<QuadratureField> {
        self.grid.same_as(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| {
                let mut c = [[0.0; 2]; 4];
                for k in 0..4 {
                    c[k] = [a * x[k][0] + b * y[k][0], a * x[k][1] + b * y[k][1]];
                }
                c
            })
            .collect();
        QuadratureField::new(self.grid, values)
    }

    /// `int phi u.v` over the domain (`phi = 1` when no weight is given).
    pub fn inner_product(&self, other: &QuadratureField, weight: Option<&WeightField>) -> Result<f64> {
        self.grid.same_as(&other.grid)?;
        if let Some(w) = weight {
            self.grid.same_as(w.grid())?;
        }
        let quarter_area = 0.25 * self.grid.bin_width() * self.grid.bin_width();
        let mut total = 0.0;
        for (cell, (x, y)) in self.values.iter().zip(&other.values).enumerate() {
            let phi = weight.map_or(1.0, |w| w.values()[cell]);
            let s: f64 = (0..4).map(|k| x[k][0] * y[k][0] + x[k][1] * y[k][1]).sum();
            total += phi * s;
        }
        Ok(total * quarter_area)
    }

    pub fn norm_squared(&self, weight: Option<&WeightField>) -> Result<f64> {
        self.inner_product(self, weight)
    }
}

impl From<&VectorField2> for QuadratureField {
    fn from(field: &VectorField2) -> Self {
        QuadratureField {
            grid: *field.grid(),
            values: field.values().iter().map(|v| [*v; 4]).collect(),
        }
    }
}
