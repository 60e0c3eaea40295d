//! Low-dimensional toy systems on the unit torus, sampled with the identity
//! reaction coordinate `xi(x) = (x_1, x_2)`.
//!
//! ```text
//! U(x1, x2)     = (h/2) (cos 4 pi x1 + cos 4 pi x2) + kappa cos 2 pi (x1 - x2)
//! toy_a:  V(x)  = U(x1, x2)
//! toy_b:  V(x)  = U(x1, x2) + a cos 2 pi x3 + c cos(2 pi x1) sin(2 pi x3)
//! ```
//!
//! `U` has four wells near `(1/4, 1/4)`, `(1/4, 3/4)`, `(3/4, 1/4)` and
//! `(3/4, 3/4)` separated by barriers of height about `h`. In toy_b the
//! free energy differs from `U` because the orthogonal coordinate `x3` is
//! coupled to `x1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyKind {
    ToyA,
    ToyB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    pub h: f64,
    pub kappa: f64,
    pub a: f64,
    pub c: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        ToyParams {
            h: 3.0,
            kappa: 0.5,
            a: 1.0,
            c: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToySystem {
    pub kind: ToyKind,
    pub params: ToyParams,
}

impl ToySystem {
    pub fn new(kind: ToyKind, params: ToyParams) -> Self {
        ToySystem { kind, params }
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            ToyKind::ToyA => 2,
            ToyKind::ToyB => 3,
        }
    }

    /// The part of the potential that depends on the reaction coordinate only.
    pub fn coordinate_potential(&self, z: [f64; 2]) -> f64 {
        let p = &self.params;
        0.5 * p.h * ((FOUR_PI * z[0]).cos() + (FOUR_PI * z[1]).cos()) + p.kappa * (TWO_PI * (z[0] - z[1])).cos()
    }

    pub fn coordinate_potential_gradient(&self, z: [f64; 2]) -> [f64; 2] {
        let p = &self.params;
        let coupling = -TWO_PI * p.kappa * (TWO_PI * (z[0] - z[1])).sin();
        [
            -0.5 * p.h * FOUR_PI * (FOUR_PI * z[0]).sin() + coupling,
            -0.5 * p.h * FOUR_PI * (FOUR_PI * z[1]).sin() - coupling,
        ]
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let mut u = self.coordinate_potential([x[0], x[1]]);
        if self.kind == ToyKind::ToyB {
            let p = &self.params;
            let s3 = (TWO_PI * x[2]).sin();
            u += p.a * (TWO_PI * x[2]).cos() + p.c * (TWO_PI * x[0]).cos() * s3;
        }
        u
    }

    /// Energy; `grad` receives `dV/dx`.
    pub fn energy_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let g = self.coordinate_potential_gradient([x[0], x[1]]);
        grad[0] = g[0];
        grad[1] = g[1];
        let mut u = self.coordinate_potential([x[0], x[1]]);
        if self.kind == ToyKind::ToyB {
            let p = &self.params;
            let (s3, c3) = (TWO_PI * x[2]).sin_cos();
            let (s1, c1) = (TWO_PI * x[0]).sin_cos();
            u += p.a * c3 + p.c * c1 * s3;
            grad[0] -= TWO_PI * p.c * s1 * s3;
            grad[2] = TWO_PI * (-p.a * s3 + p.c * c1 * c3);
        }
        u
    }

    /// Wraps every coordinate onto `[0, 1)`.
    pub fn wrap(&self, x: &mut [f64]) {
        for v in x.iter_mut() {
            *v = v.rem_euclid(1.0);
            if *v >= 1.0 {
                *v = 0.0;
            }
        }
    }

    /// Starting point in the `(1/4, 1/4)` well.
    pub fn initial_state(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dimension()];
        x[0] = 0.25;
        x[1] = 0.25;
        x
    }
}
