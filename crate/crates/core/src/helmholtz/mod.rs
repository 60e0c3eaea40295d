//! Helmholtz projection of binned vector fields onto gradients.
//!
//! The projection of `F` is `grad A`, where `A` is the Q1 finite-element
//! solution of the (optionally weighted) weak Poisson problem
//!
//! ```text
//! int phi grad A . grad v = int phi F . grad v    for every Q1 test function v
//! ```
//!
//! on a bounded grid (natural Neumann boundary) or on the torus. The
//! constant kernel is removed by fixing the zero-mean gauge on the nodal
//! values.

pub mod fem;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{QuadratureField, ScalarField, VectorField2, WeightField};
use crate::grid::Grid2;
use crate::linalg::{self, BandedCholesky, CgOptions, CsrMatrix};

/// Largest relative residual accepted from any solve.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Banded Cholesky on bounded grids, conjugate gradient on the torus
    /// (whose wrap-around couplings make the band as wide as the matrix).
    #[default]
    Auto,
    Direct,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub solver: SolverKind,
    /// Relative residual at which the conjugate gradient stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            solver: SolverKind::Auto,
            tolerance: 1e-12,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub potential: ScalarField,
    pub iterations: usize,
    /// Relative residual of the linear system.
    pub residual: f64,
}

/// Squared norms of the orthogonal splitting `F = grad A + (F - grad A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub field: f64,
    pub gradient: f64,
    pub remainder: f64,
}

impl Decomposition {
    /// `|field - gradient - remainder| / field`.
    pub fn pythagoras_defect(&self) -> f64 {
        if self.field == 0.0 {
            (self.gradient + self.remainder).abs()
        } else {
            (self.field - self.gradient - self.remainder).abs() / self.field
        }
    }
}

/// Reusable projector for one grid. The unweighted stiffness matrix (and
/// its factorization, when the direct solver is selected) is built once.
#[derive(Debug, Clone)]
pub struct Projector {
    grid: Grid2,
    options: ProjectionOptions,
    stiffness: CsrMatrix,
    factor: Option<BandedCholesky>,
}

fn uses_direct(grid: &Grid2, solver: SolverKind) -> bool {
    match solver {
        SolverKind::Auto => !grid.is_periodic(),
        SolverKind::Direct => true,
        SolverKind::Cg => false,
    }
}

/// Factorization of `K + e_0 e_0^T`, which is nonsingular when the kernel of
/// `K` is the constant vector. For a zero-mean right-hand side its solution
/// solves the original singular system.
fn pinned_factor(k: &CsrMatrix) -> Result<BandedCholesky> {
    let mut pinned = k.clone();
    pinned.add_to_diagonal(0, 1.0)?;
    BandedCholesky::factor(&pinned)
}

impl Projector {
    pub fn new(grid: Grid2, options: ProjectionOptions) -> Result<Self> {
        if !(options.tolerance > 0.0) {
            return Err(Error::domain("projection tolerance must be positive"));
        }
        let stiffness = fem::assemble_stiffness(&grid, None);
        let factor = if uses_direct(&grid, options.solver) {
            Some(pinned_factor(&stiffness)?)
        } else {
            None
        };
        Ok(Projector {
            grid,
            options,
            stiffness,
            factor,
        })
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn options(&self) -> &ProjectionOptions {
        &self.options
    }

    /// Unweighted projection of a binned field. Bins without samples enter
    /// with whatever value they hold (zero for an estimator field).
    pub fn project(&self, f: &VectorField2) -> Result<Projection> {
        self.project_quadrature(&QuadratureField::from(f), None, None)
    }

    /// Weighted projection of a binned field, warm-started from `initial`
    /// when the iterative solver is used.
    pub fn project_weighted(
        &self,
        f: &VectorField2,
        phi: &WeightField,
        initial: Option<&ScalarField>,
    ) -> Result<Projection> {
        self.project_quadrature(&QuadratureField::from(f), Some(phi), initial)
    }

    pub fn project_quadrature(
        &self,
        f: &QuadratureField,
        phi: Option<&WeightField>,
        initial: Option<&ScalarField>,
    ) -> Result<Projection> {
        self.grid.same_as(f.grid())?;
        if let Some(w) = phi {
            self.grid.same_as(w.grid())?;
        }
        if let Some(x0) = initial {
            self.grid.same_as(x0.grid())?;
        }
        let weights = phi.map(|w| w.values());
        let mut b = fem::assemble_load(f, weights);
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("vector field has non-finite entries"));
        }
        // Removes the (round-off sized) incompatible part of the load.
        linalg::remove_mean(&mut b);

        let weighted;
        let stiffness = match weights {
            Some(w) => {
                weighted = fem::assemble_stiffness(&self.grid, Some(w));
                &weighted
            }
            None => &self.stiffness,
        };

        let b_norm = linalg::norm(&b);
        if b_norm == 0.0 {
            return Ok(Projection {
                potential: ScalarField::zeros(self.grid),
                iterations: 0,
                residual: 0.0,
            });
        }

        let (mut x, iterations) = if uses_direct(&self.grid, self.options.solver) {
            let x = match (&self.factor, weights) {
                (Some(factor), None) => factor.solve(&b),
                _ => pinned_factor(stiffness)?.solve(&b),
            };
            (x, 0)
        } else {
            let mut x = initial.map_or_else(|| vec![0.0; b.len()], |a| a.values().to_vec());
            let report = linalg::conjugate_gradient(
                stiffness,
                &b,
                &mut x,
                CgOptions {
                    tolerance: self.options.tolerance,
                    max_iterations: self.options.max_iterations,
                    zero_mean: true,
                },
            )?;
            (x, report.iterations)
        };
        linalg::remove_mean(&mut x);

        let mut r = vec![0.0; x.len()];
        stiffness.mul_vec(&x, &mut r);
        let residual = r
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
            / b_norm;
        if !(residual <= RESIDUAL_LIMIT.max(self.options.tolerance)) {
            return Err(Error::Solver {
                iterations,
                residual,
            });
        }
        Ok(Projection {
            potential: ScalarField::new(self.grid, x)?,
            iterations,
            residual,
        })
    }
}

/// Unweighted projection on a bounded grid with natural boundary conditions.
pub fn project_neumann(f: &VectorField2, options: ProjectionOptions) -> Result<ScalarField> {
    if f.grid().is_periodic() {
        return Err(Error::domain("Neumann projection needs a bounded grid"));
    }
    Ok(Projector::new(*f.grid(), options)?.project(f)?.potential)
}

/// Weighted projection on the torus.
pub fn project_periodic_weighted(
    f: &VectorField2,
    phi: &WeightField,
    options: ProjectionOptions,
) -> Result<ScalarField> {
    if !f.grid().is_periodic() {
        return Err(Error::domain("periodic projection needs a periodic grid"));
    }
    Ok(Projector::new(*f.grid(), options)?
        .project_weighted(f, phi, None)?
        .potential)
}

/// One-dimensional periodic projection: subtracts the grid average.
pub fn project_1d(f: &[f64]) -> Vec<f64> {
    if f.is_empty() {
        return Vec::new();
    }
    let m = linalg::mean(f);
    f.iter().map(|v| v - m).collect()
}

/// Gradient of the Q1 field at the bin centers.
pub fn gradient_at_bins(a: &ScalarField) -> VectorField2 {
    VectorField2::new(*a.grid(), fem::gradient_at_centers(a)).expect("one value per bin")
}

/// Gradient of the Q1 field at the Gauss points of every bin.
pub fn gradient_at_quadrature(a: &ScalarField) -> QuadratureField {
    QuadratureField::new(*a.grid(), fem::gradient_at_gauss_points(a)).expect("one value per bin")
}

/// Squared (weighted) L2 norms of `F`, `grad A` and `F - grad A`.
pub fn decomposition(
    f: &QuadratureField,
    a: &ScalarField,
    phi: Option<&WeightField>,
) -> Result<Decomposition> {
    let g = gradient_at_quadrature(a);
    let r = f.linear_combination(1.0, &g, -1.0)?;
    Ok(Decomposition {
        field: f.norm_squared(phi)?,
        gradient: g.norm_squared(phi)?,
        remainder: r.norm_squared(phi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bounded(n: usize) -> Grid2 {
        Grid2::bounded(-0.2, 1.2, n).unwrap()
    }

    #[test]
    fn constant_field_gives_linear_potential() {
        let g = bounded(12);
        let f = VectorField2::from_fn(g, |_| [0.7, -1.3]);
        let a = project_neumann(&f, ProjectionOptions::default()).unwrap();
        let mut expected = ScalarField::from_fn(g, |p| 0.7 * p[0] - 1.3 * p[1]);
        expected.remove_mean();
        assert!(a.max_abs_difference(&expected) < 1e-10);
        assert!(a.mean().abs() < 1e-12);
    }

    #[test]
    fn direct_and_cg_agree_on_bounded_grid() {
        let g = bounded(10);
        let f = VectorField2::from_fn(g, |p| [(3.0 * p[0]).sin() * p[1], p[0] * p[0] - p[1]]);
        let direct = Projector::new(g, ProjectionOptions::default())
            .unwrap()
            .project(&f)
            .unwrap();
        let cg = Projector::new(
            g,
            ProjectionOptions {
                solver: SolverKind::Cg,
                ..Default::default()
            },
        )
        .unwrap()
        .project(&f)
        .unwrap();
        assert!(direct.potential.max_abs_difference(&cg.potential) < 1e-10);
        assert!(cg.iterations > 0);
    }

    #[test]
    fn periodic_gradient_is_recovered() {
        let g = Grid2::periodic(0.0, 1.0, 16).unwrap();
        let mut target = ScalarField::from_fn(g, |p| (2.0 * PI * p[0]).sin() + (2.0 * PI * p[1]).cos() * 0.5);
        target.remove_mean();
        let grad = gradient_at_quadrature(&target);
        let a = Projector::new(g, ProjectionOptions::default())
            .unwrap()
            .project_quadrature(&grad, None, None)
            .unwrap()
            .potential;
        assert!(a.max_abs_difference(&target) < 1e-9);
    }

    #[test]
    fn uniform_weight_matches_unweighted() {
        let g = Grid2::periodic(0.0, 1.0, 10).unwrap();
        let f = VectorField2::from_fn(g, |p| [(2.0 * PI * p[1]).cos(), (2.0 * PI * p[0]).sin() + p[0]]);
        let phi = WeightField::uniform(g);
        let weighted = project_periodic_weighted(&f, &phi, ProjectionOptions::default()).unwrap();
        let plain = Projector::new(g, ProjectionOptions::default())
            .unwrap()
            .project(&f)
            .unwrap()
            .potential;
        assert!(weighted.max_abs_difference(&plain) < 1e-10);
    }

    #[test]
    fn zero_field_projects_to_zero() {
        let g = bounded(5);
        let a = project_neumann(&VectorField2::zeros(g), ProjectionOptions::default()).unwrap();
        assert!(a.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_kind_is_checked() {
        let g = Grid2::periodic(0.0, 1.0, 4).unwrap();
        assert!(project_neumann(&VectorField2::zeros(g), ProjectionOptions::default()).is_err());
        let b = bounded(4);
        let phi = WeightField::uniform(b);
        assert!(project_periodic_weighted(&VectorField2::zeros(b), &phi, ProjectionOptions::default()).is_err());
    }

    #[test]
    fn one_dimensional_projection() {
        assert_eq!(project_1d(&[5.0; 4]), vec![0.0; 4]);
        let s: Vec<f64> = (0..8).map(|k| (2.0 * PI * k as f64 / 8.0).sin()).collect();
        let shifted: Vec<f64> = s.iter().map(|v| v + 3.0).collect();
        for (u, v) in project_1d(&shifted).iter().zip(&s) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn bin_gradients_of_cosine_are_second_order() {
        let mut errs = Vec::new();
        for n in [20usize, 40] {
            let g = Grid2::bounded(0.0, 1.0, n).unwrap();
            let a = ScalarField::from_fn(g, |p| (2.0 * PI * p[0]).cos());
            let grad = gradient_at_bins(&a);
            let mut e: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let c = g.bin_center(i, j);
                    let exact = -2.0 * PI * (2.0 * PI * c[0]).sin();
                    e = e.max((grad.get(i, j)[0] - exact).abs());
                }
            }
            errs.push(e);
        }
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
