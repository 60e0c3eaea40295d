//! Reference computations that share no code path with the sampler or the
//! sparse projection: quadrature free energies of the toy systems and a
//! dense solve of the projection problem.

use crate::error::{Error, Result};
use crate::field::{QuadratureField, ScalarField, VectorField2, WeightField, GAUSS_POINTS};
use crate::grid::Grid2;
use crate::toy::{ToyKind, ToySystem};

/// Default number of quadrature points per integrated dimension.
pub const DEFAULT_QUADRATURE_POINTS: usize = 256;

/// Largest node count accepted by [`dense_projection_solve`].
pub const DENSE_NODE_LIMIT: usize = 3721;

/// Free energy and mean force at one reaction-coordinate value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub free_energy: f64,
    pub mean_force: [f64; 2],
}

/// `A(z) = -1/beta ln int exp(-beta V(z, y)) dy` and its gradient, the
/// conditional average of `d_z V`, by the periodic trapezoidal rule with
/// `points` nodes in every integrated dimension.
pub fn reference_point(toy: &ToySystem, z: [f64; 2], beta: f64, points: usize) -> Result<ReferencePoint> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain("the reference free energy needs a finite positive beta"));
    }
    match toy.kind {
        ToyKind::ToyA => Ok(ReferencePoint {
            free_energy: toy.energy(&z),
            mean_force: toy.coordinate_potential_gradient(z),
        }),
        ToyKind::ToyB => {
            if points < 2 {
                return Err(Error::domain("quadrature needs at least two points"));
            }
            let mut x = [z[0], z[1], 0.0];
            let mut grad = [0.0; 3];
            let mut exponents = Vec::with_capacity(points);
            let mut forces = Vec::with_capacity(points);
            for q in 0..points {
                x[2] = q as f64 / points as f64;
                let v = toy.energy_and_gradient(&x, &mut grad);
                exponents.push(-beta * v);
                forces.push([grad[0], grad[1]]);
            }
            let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            let mut weighted = [0.0; 2];
            for (e, f) in exponents.iter().zip(&forces) {
                let w = (e - max).exp();
                total += w;
                weighted[0] += w * f[0];
                weighted[1] += w * f[1];
            }
            let log_mean = max + (total / points as f64).ln();
            Ok(ReferencePoint {
                free_energy: -log_mean / beta,
                mean_force: [weighted[0] / total, weighted[1] / total],
            })
        }
    }
}

/// Nodal reference free energy in the zero-mean gauge.
pub fn reference_free_energy(toy: &ToySystem, grid: &Grid2, beta: f64, points: usize) -> Result<ScalarField> {
    let m = grid.nodes_per_axis();
    let mut values = Vec::with_capacity(grid.n_nodes());
    for j in 0..m {
        for i in 0..m {
            values.push(reference_point(toy, grid.node_position(i, j), beta, points)?.free_energy);
        }
    }
    let mut a = ScalarField::new(*grid, values)?;
    a.remove_mean();
    Ok(a)
}

/// Reference mean force at the bin centers.
pub fn reference_mean_force(toy: &ToySystem, grid: &Grid2, beta: f64, points: usize) -> Result<VectorField2> {
    let n = grid.n_bins();
    let mut values = Vec::with_capacity(grid.n_cells());
    for j in 0..n {
        for i in 0..n {
            values.push(reference_point(toy, grid.bin_center(i, j), beta, points)?.mean_force);
        }
    }
    VectorField2::new(*grid, values)
}

/// Solves the (weighted) projection problem by dense assembly of the
/// bordered system `[[K, 1], [1^T, 0]] [A; lambda] = [b; 0]` and Gaussian
/// elimination with partial pivoting.
pub fn dense_projection_solve(f: &QuadratureField, phi: Option<&WeightField>) -> Result<ScalarField> {
    let grid = *f.grid();
    if let Some(w) = phi {
        grid.same_as(w.grid())?;
    }
    let n_nodes = grid.n_nodes();
    if n_nodes > DENSE_NODE_LIMIT {
        return Err(Error::domain(format!(
            "dense projection is limited to {DENSE_NODE_LIMIT} nodes (got {n_nodes})"
        )));
    }
    let dim = n_nodes + 1;
    let mut a = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    let d = grid.bin_width();
    let nb = grid.n_bins();

    // bilinear basis on the reference square, corners (0,0) (1,0) (0,1) (1,1)
    let basis_gradient = |corner: usize, s: f64, t: f64| -> [f64; 2] {
        let (cx, cy) = ((corner & 1) as f64, (corner >> 1) as f64);
        let wx = if cx == 0.0 { 1.0 - s } else { s };
        let wy = if cy == 0.0 { 1.0 - t } else { t };
        let sx = 2.0 * cx - 1.0;
        let sy = 2.0 * cy - 1.0;
        [sx * wy / d, wx * sy / d]
    };

    for cj in 0..nb {
        for ci in 0..nb {
            let cell = cj * nb + ci;
            let weight = phi.map_or(1.0, |w| w.values()[cell]);
            let nodes = [
                grid.node(ci, cj),
                grid.node(ci + 1, cj),
                grid.node(ci, cj + 1),
                grid.node(ci + 1, cj + 1),
            ];
            for (qy, &t) in GAUSS_POINTS.iter().enumerate() {
                for (qx, &s) in GAUSS_POINTS.iter().enumerate() {
                    let jw = 0.25 * d * d * weight;
                    let fv = f.values()[cell][qx + 2 * qy];
                    let grads: Vec<[f64; 2]> = (0..4).map(|c| basis_gradient(c, s, t)).collect();
                    for p in 0..4 {
                        rhs[nodes[p]] += jw * (fv[0] * grads[p][0] + fv[1] * grads[p][1]);
                        for q in 0..4 {
                            a[nodes[p] * dim + nodes[q]] +=
                                jw * (grads[p][0] * grads[q][0] + grads[p][1] * grads[q][1]);
                        }
                    }
                }
            }
        }
    }
    for k in 0..n_nodes {
        a[k * dim + n_nodes] = 1.0;
        a[n_nodes * dim + k] = 1.0;
    }

    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..dim {
        let (pivot_row, pivot) = (col..dim)
            .map(|r| (r, a[r * dim + col].abs()))
            .fold((col, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
        if pivot <= 1e-13 * scale {
            return Err(Error::Singular(format!(
                "dense projection system has a negligible pivot in column {col}"
            )));
        }
        if pivot_row != col {
            for k in 0..dim {
                a.swap(col * dim + k, pivot_row * dim + k);
            }
            rhs.swap(col, pivot_row);
        }
        let diag = a[col * dim + col];
        let (upper, lower) = a.split_at_mut((col + 1) * dim);
        let pivot_row_values = &upper[col * dim..(col + 1) * dim];
        for r in (col + 1)..dim {
            let row = &mut lower[(r - col - 1) * dim..(r - col) * dim];
            let m = row[col] / diag;
            if m == 0.0 {
                continue;
            }
            for k in col..dim {
                row[k] -= m * pivot_row_values[k];
            }
            rhs[r] -= m * rhs[col];
        }
    }
    let mut x = vec![0.0; dim];
    for r in (0..dim).rev() {
        let s: f64 = ((r + 1)..dim).map(|k| a[r * dim + k] * x[k]).sum();
        x[r] = (rhs[r] - s) / a[r * dim + r];
    }
    x.truncate(n_nodes);
    let mut out = ScalarField::new(grid, x)?;
    // the constraint already fixes the gauge; this only removes round-off
    out.remove_mean();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::ToyParams;

    #[test]
    fn identity_toy_free_energy_is_the_potential() {
        let toy = ToySystem::new(ToyKind::ToyA, ToyParams::default());
        let grid = Grid2::periodic(0.0, 1.0, 8).unwrap();
        let a = reference_free_energy(&toy, &grid, 1.0, 16).unwrap();
        let mut v = ScalarField::from_fn(grid, |z| toy.coordinate_potential(z));
        v.remove_mean();
        assert!(a.max_abs_difference(&v) < 1e-12);
    }

    #[test]
    fn uncoupled_orthogonal_coordinate_factors_out() {
        let params = ToyParams { c: 0.0, ..ToyParams::default() };
        let toy = ToySystem::new(ToyKind::ToyB, params);
        let grid = Grid2::periodic(0.0, 1.0, 6).unwrap();
        let a = reference_free_energy(&toy, &grid, 1.0, 256).unwrap();
        let mut u = ScalarField::from_fn(grid, |z| toy.coordinate_potential(z));
        u.remove_mean();
        assert!(a.max_abs_difference(&u) < 1e-12);
        let f = reference_mean_force(&toy, &grid, 1.0, 256).unwrap();
        let g = VectorField2::from_fn(grid, |z| toy.coordinate_potential_gradient(z));
        assert!(f.max_abs_difference(&g) < 1e-10);
    }

    #[test]
    fn large_beta_does_not_overflow() {
        let toy = ToySystem::new(ToyKind::ToyB, ToyParams::default());
        let p = reference_point(&toy, [0.1, 0.2], 500.0, 256).unwrap();
        assert!(p.free_energy.is_finite());
        assert!(p.mean_force.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn dense_solve_of_constant_field_is_linear() {
        let grid = Grid2::bounded(0.0, 1.0, 6).unwrap();
        let f = QuadratureField::from(&VectorField2::from_fn(grid, |_| [1.0, 2.0]));
        let a = dense_projection_solve(&f, None).unwrap();
        let mut exact = ScalarField::from_fn(grid, |p| p[0] + 2.0 * p[1]);
        exact.remove_mean();
        assert!(a.max_abs_difference(&exact) < 1e-12);
    }

    #[test]
    fn dense_solve_rejects_large_grids() {
        let grid = Grid2::bounded(0.0, 1.0, 70).unwrap();
        let f = QuadratureField::from(&VectorField2::zeros(grid));
        assert!(dense_projection_solve(&f, None).is_err());
    }
}
