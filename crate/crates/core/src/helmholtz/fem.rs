//! Bilinear (Q1) finite elements on the uniform square grid.
//!
//! Local node order inside an element is `(0,0), (1,0), (0,1), (1,1)`,
//! matching [`Grid2::cell_nodes`].

use crate::field::{gauss_point, QuadratureField, ScalarField};
use crate::grid::Grid2;
use crate::linalg::CsrMatrix;

/// Element stiffness `int grad N_a . grad N_b` of a square Q1 element. It is
/// independent of the element size in two dimensions.
pub const ELEMENT_STIFFNESS: [[f64; 4]; 4] = [
    [4.0 / 6.0, -1.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0],
    [-1.0 / 6.0, 4.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0],
    [-1.0 / 6.0, -2.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0],
    [-2.0 / 6.0, -1.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0],
];

/// Value of local shape function `a` at reference point `(s, t)`.
#[inline]
pub fn shape_value(a: usize, s: f64, t: f64) -> f64 {
    let fx = if a.is_multiple_of(2) { 1.0 - s } else { s };
    let fy = if a / 2 == 0 { 1.0 - t } else { t };
    fx * fy
}

/// Physical gradient of local shape function `a` at reference point
/// `(s, t)` on an element of width `delta`.
#[inline]
pub fn shape_gradient(a: usize, s: f64, t: f64, delta: f64) -> [f64; 2] {
    let (fx, dfx) = if a.is_multiple_of(2) { (1.0 - s, -1.0) } else { (s, 1.0) };
    let (fy, dfy) = if a / 2 == 0 { (1.0 - t, -1.0) } else { (t, 1.0) };
    [dfx * fy / delta, fx * dfy / delta]
}

/// Global stiffness matrix `int phi grad N_p . grad N_q`, with `phi` constant
/// per bin (`None` means `phi = 1`).
pub fn assemble_stiffness(grid: &Grid2, weights: Option<&[f64]>) -> CsrMatrix {
    let n = grid.n_bins();
    let mut triplets = Vec::with_capacity(16 * grid.n_cells());
    for j in 0..n {
        for i in 0..n {
            let phi = weights.map_or(1.0, |w| w[grid.cell(i, j)]);
            let nodes = grid.cell_nodes(i, j);
            for a in 0..4 {
                for b in 0..4 {
                    triplets.push((nodes[a], nodes[b], phi * ELEMENT_STIFFNESS[a][b]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(grid.n_nodes(), triplets)
}

/// Load vector `int phi F . grad N_p`, integrated with the 2x2 Gauss rule.
pub fn assemble_load(field: &QuadratureField, weights: Option<&[f64]>) -> Vec<f64> {
    let grid = field.grid();
    let n = grid.n_bins();
    let d = grid.bin_width();
    let quarter_area = 0.25 * d * d;
    let mut b = vec![0.0; grid.n_nodes()];
    for j in 0..n {
        for i in 0..n {
            let cell = grid.cell(i, j);
            let phi = weights.map_or(1.0, |w| w[cell]);
            let values = &field.values()[cell];
            let nodes = grid.cell_nodes(i, j);
            for (k, f) in values.iter().enumerate() {
                let (s, t) = gauss_point(k);
                for a in 0..4 {
                    let g = shape_gradient(a, s, t, d);
                    b[nodes[a]] += phi * quarter_area * (f[0] * g[0] + f[1] * g[1]);
                }
            }
        }
    }
    b
}

/// Gradient of the Q1 interpolant at every bin center.
pub fn gradient_at_centers(a: &ScalarField) -> Vec<[f64; 2]> {
    let grid = a.grid();
    let n = grid.n_bins();
    let d = grid.bin_width();
    let v = a.values();
    let mut out = Vec::with_capacity(grid.n_cells());
    for j in 0..n {
        for i in 0..n {
            let [n00, n10, n01, n11] = grid.cell_nodes(i, j);
            out.push([
                (v[n10] + v[n11] - v[n00] - v[n01]) / (2.0 * d),
                (v[n01] + v[n11] - v[n00] - v[n10]) / (2.0 * d),
            ]);
        }
    }
    out
}

/// Gradient of the Q1 interpolant at the Gauss points of every bin.
pub fn gradient_at_gauss_points(a: &ScalarField) -> Vec<[[f64; 2]; 4]> {
    let grid = a.grid();
    let n = grid.n_bins();
    let d = grid.bin_width();
    let v = a.values();
    let mut out = Vec::with_capacity(grid.n_cells());
    for j in 0..n {
        for i in 0..n {
            let nodes = grid.cell_nodes(i, j);
            let mut cell = [[0.0; 2]; 4];
            for (k, c) in cell.iter_mut().enumerate() {
                let (s, t) = gauss_point(k);
                for a in 0..4 {
                    let g = shape_gradient(a, s, t, d);
                    c[0] += v[nodes[a]] * g[0];
                    c[1] += v[nodes[a]] * g[1];
                }
            }
            out.push(cell);
        }
    }
    out
}
