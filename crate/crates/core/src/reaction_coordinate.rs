//! Reaction coordinates, their gradients and the local mean force.
//!
//! The local mean force of a two-dimensional coordinate is
//!
//! ```text
//! f_i = sum_j Ginv_ij grad(xi_j) . grad(V) - kT div( sum_j Ginv_ij grad(xi_j) )
//! G_ij = grad(xi_i) . grad(xi_j)
//! ```
//!
//! Its conditional expectation given `xi = z` is the gradient of the free
//! energy at `z`.
//!
//! The trimer coordinate shares particle 1 between both bonds, so `G` is not
//! diagonal; the full inverse and the divergence of `Ginv grad(xi)` are used.

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{norm, separation, COINCIDENCE_THRESHOLD};

/// Below this `|det G|` the coordinate is treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReactionCoordinate {
    /// `xi(x) = (x_0, x_1)` on a flat coordinate vector.
    IdentityFirstTwo,
    /// Normalized bond lengths `(|q0 - q1| - d0) / (2 omega)` and
    /// `(|q1 - q2| - d0) / (2 omega)` of the trimer.
    TrimerBondLengths { d0: f64, omega: f64, box_length: f64 },
}

/// A reaction-coordinate value paired with the local mean force there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMeanForceSample {
    pub z: [f64; 2],
    pub f: [f64; 2],
}

/// Sparse gradient over flat configuration coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseGradient {
    entries: ArrayVec<(usize, f64), 4>,
}

impl SparseGradient {
    fn push(&mut self, index: usize, value: f64) {
        self.entries.push((index, value));
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dot(&self, other: &SparseGradient) -> f64 {
        let mut s = 0.0;
        for &(i, a) in &self.entries {
            for &(j, b) in &other.entries {
                if i == j {
                    s += a * b;
                }
            }
        }
        s
    }

    pub fn dot_dense(&self, v: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, a)| a * v[i]).sum()
    }

    /// `out += scale * self`
    pub fn add_scaled_to(&self, scale: f64, out: &mut [f64]) {
        for &(i, a) in &self.entries {
            out[i] += scale * a;
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        self.add_scaled_to(1.0, &mut v);
        v
    }
}

/// Everything the sampler needs from the coordinate at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateEvaluation {
    pub z: [f64; 2],
    pub gradients: [SparseGradient; 2],
}

/// Geometry of the trimer bonds, shared by the gradient and divergence code.
struct BondGeometry {
    /// Unit vector from q1 to q0.
    u: [f64; 2],
    /// Unit vector from q1 to q2.
    v: [f64; 2],
    r01: f64,
    r12: f64,
    cos: f64,
}

impl BondGeometry {
    fn new(coords: &[f64], box_length: f64) -> Result<Self> {
        let q = |k: usize| [coords[2 * k], coords[2 * k + 1]];
        let a = separation(q(1), q(0), box_length);
        let b = separation(q(1), q(2), box_length);
        let r01 = norm(a);
        let r12 = norm(b);
        if r01 < COINCIDENCE_THRESHOLD {
            return Err(Error::CoincidentParticles { i: 0, j: 1, distance: r01 });
        }
        if r12 < COINCIDENCE_THRESHOLD {
            return Err(Error::CoincidentParticles { i: 1, j: 2, distance: r12 });
        }
        let u = [a[0] / r01, a[1] / r01];
        let v = [b[0] / r12, b[1] / r12];
        Ok(BondGeometry {
            u,
            v,
            r01,
            r12,
            cos: u[0] * v[0] + u[1] * v[1],
        })
    }
}

fn inverse_2x2(g: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(det.abs() >= DEGENERACY_THRESHOLD) {
        return Err(Error::DegenerateCoordinate { det });
    }
    Ok([
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ])
}

impl ReactionCoordinate {
    pub fn trimer(d0: f64, omega: f64, box_length: f64) -> Self {
        ReactionCoordinate::TrimerBondLengths { d0, omega, box_length }
    }

    /// Minimum number of flat coordinates the variant reads.
    pub fn min_coordinates(&self) -> usize {
        match self {
            ReactionCoordinate::IdentityFirstTwo => 2,
            ReactionCoordinate::TrimerBondLengths { .. } => 6,
        }
    }

    pub fn xi(&self, coords: &[f64]) -> [f64; 2] {
        match *self {
            ReactionCoordinate::IdentityFirstTwo => [coords[0], coords[1]],
            ReactionCoordinate::TrimerBondLengths { d0, omega, box_length } => {
                let q = |k: usize| [coords[2 * k], coords[2 * k + 1]];
                let r01 = norm(separation(q(0), q(1), box_length));
                let r12 = norm(separation(q(1), q(2), box_length));
                [(r01 - d0) / (2.0 * omega), (r12 - d0) / (2.0 * omega)]
            }
        }
    }

    /// `xi` together with both gradients.
    pub fn evaluate(&self, coords: &[f64]) -> Result<CoordinateEvaluation> {
        match *self {
            ReactionCoordinate::IdentityFirstTwo => {
                let mut g0 = SparseGradient::default();
                let mut g1 = SparseGradient::default();
                g0.push(0, 1.0);
                g1.push(1, 1.0);
                Ok(CoordinateEvaluation {
                    z: [coords[0], coords[1]],
                    gradients: [g0, g1],
                })
            }
            ReactionCoordinate::TrimerBondLengths { d0, omega, box_length } => {
                let geo = BondGeometry::new(coords, box_length)?;
                let s = 2.0 * omega;
                let mut g0 = SparseGradient::default();
                let mut g1 = SparseGradient::default();
                // xi_1 grows with q0 moving away from q1 along u
                g0.push(0, geo.u[0] / s);
                g0.push(1, geo.u[1] / s);
                g0.push(2, -geo.u[0] / s);
                g0.push(3, -geo.u[1] / s);
                g1.push(2, -geo.v[0] / s);
                g1.push(3, -geo.v[1] / s);
                g1.push(4, geo.v[0] / s);
                g1.push(5, geo.v[1] / s);
                Ok(CoordinateEvaluation {
                    z: [(geo.r01 - d0) / s, (geo.r12 - d0) / s],
                    gradients: [g0, g1],
                })
            }
        }
    }

    pub fn grad_xi(&self, coords: &[f64]) -> Result<[SparseGradient; 2]> {
        Ok(self.evaluate(coords)?.gradients)
    }

    /// The Gram matrix `G_ij = grad(xi_i) . grad(xi_j)`.
    pub fn gram(&self, coords: &[f64]) -> Result<[[f64; 2]; 2]> {
        let [g0, g1] = self.grad_xi(coords)?;
        let off = g0.dot(&g1);
        Ok([[g0.dot(&g0), off], [off, g1.dot(&g1)]])
    }

    /// Local mean force at `coords`, given `grad_v = dV/dx` at the same point
    /// and the inverse temperature.
    pub fn local_mean_force(&self, coords: &[f64], grad_v: &[f64], beta: f64) -> Result<[f64; 2]> {
        let eval = self.evaluate(coords)?;
        self.local_mean_force_with(&eval, coords, grad_v, beta)
    }

    /// Same as [`local_mean_force`](Self::local_mean_force) reusing an
    /// existing coordinate evaluation.
    pub fn local_mean_force_with(
        &self,
        eval: &CoordinateEvaluation,
        coords: &[f64],
        grad_v: &[f64],
        beta: f64,
    ) -> Result<[f64; 2]> {
        match *self {
            ReactionCoordinate::IdentityFirstTwo => Ok([grad_v[0], grad_v[1]]),
            ReactionCoordinate::TrimerBondLengths { omega, box_length, .. } => {
                let [g0, g1] = &eval.gradients;
                let off = g0.dot(g1);
                let gram = [[g0.dot(g0), off], [off, g1.dot(g1)]];
                let ginv = inverse_2x2(gram)?;
                let proj = [g0.dot_dense(grad_v), g1.dot_dense(grad_v)];
                let kt = 1.0 / beta;
                let div = if kt == 0.0 {
                    [0.0, 0.0]
                } else {
                    trimer_divergence(&BondGeometry::new(coords, box_length)?, omega)
                };
                Ok([
                    ginv[0][0] * proj[0] + ginv[0][1] * proj[1] - kt * div[0],
                    ginv[1][0] * proj[0] + ginv[1][1] * proj[1] - kt * div[1],
                ])
            }
        }
    }
}

/// `div(sum_j Ginv_ij grad(xi_j))` for both `i`, in closed form.
///
/// With `s = 2 omega` and `c` the cosine of the bond angle,
/// `Ginv = s^2 / (4 - c^2) [[2, -c], [-c, 2]]`, `Lap(xi_1) = 2 / (s r01)`,
/// `Lap(xi_2) = 2 / (s r12)`, `grad(c).grad(xi_1) = (1 - c^2) / (s r12)` and
/// `grad(c).grad(xi_2) = (1 - c^2) / (s r01)`.
fn trimer_divergence(geo: &BondGeometry, omega: f64) -> [f64; 2] {
    let s = 2.0 * omega;
    let c = geo.cos;
    let den = 4.0 - c * c;
    let s2 = s * s;
    let ginv_diag = s2 * 2.0 / den;
    let ginv_off = -s2 * c / den;
    let dginv_diag = s2 * 4.0 * c / (den * den);
    let dginv_off = -s2 * (4.0 + c * c) / (den * den);

    let lap = [2.0 / (s * geo.r01), 2.0 / (s * geo.r12)];
    let dc_dot = [(1.0 - c * c) / (s * geo.r12), (1.0 - c * c) / (s * geo.r01)];

    [
        dginv_diag * dc_dot[0] + ginv_diag * lap[0] + dginv_off * dc_dot[1] + ginv_off * lap[1],
        dginv_off * dc_dot[0] + ginv_off * lap[0] + dginv_diag * dc_dot[1] + ginv_diag * lap[1],
    ]
}
