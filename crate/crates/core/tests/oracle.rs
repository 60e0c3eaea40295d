use std::f64::consts::PI;

use pabf::grid::Grid2;
use pabf::oracle;
use pabf::toy::{ToyKind, ToyParams, ToySystem};
use proptest::prelude::*;

/// Modified Bessel function I0 by its power series.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn toy_b() -> ToySystem {
    ToySystem::new(ToyKind::ToyB, ToyParams::default())
}

/// Closed form for toy_b: integrating out the hidden angle gives a Bessel
/// function of the combined cosine and sine amplitudes.
fn toy_b_free_energy(z: [f64; 2], beta: f64) -> f64 {
    let p = ToyParams::default();
    let toy = toy_b();
    let b = p.c * (2.0 * PI * z[0]).cos();
    toy.coordinate_potential(z) - bessel_i0(beta * (p.a * p.a + b * b).sqrt()).ln() / beta
}

#[test]
fn toy_b_matches_the_bessel_closed_form() {
    for beta in [0.5, 1.0, 2.0] {
        for k in 0..25 {
            let z = [0.04 * k as f64, 0.37 + 0.03 * k as f64];
            let got = oracle::reference_point(&toy_b(), z, beta, 256).unwrap();
            let want = toy_b_free_energy(z, beta);
            assert!((got.free_energy - want).abs() < 1e-12, "beta {beta} z {z:?}");
        }
    }
}

#[test]
fn quadrature_is_converged() {
    let grid = Grid2::periodic(0.0, 1.0, 16).unwrap();
    let coarse = oracle::reference_mean_force(&toy_b(), &grid, 1.0, 256).unwrap();
    let fine = oracle::reference_mean_force(&toy_b(), &grid, 1.0, 1024).unwrap();
    assert!(coarse.max_abs_difference(&fine) < 1e-8);
    let a = oracle::reference_free_energy(&toy_b(), &grid, 1.0, 256).unwrap();
    let b = oracle::reference_free_energy(&toy_b(), &grid, 1.0, 1024).unwrap();
    assert!(a.max_abs_difference(&b) < 1e-8);
}

#[test]
fn mean_force_is_the_gradient_of_the_free_energy() {
    let h = 1e-5;
    for kind in [ToyKind::ToyA, ToyKind::ToyB] {
        let toy = ToySystem::new(kind, ToyParams::default());
        let a = |z: [f64; 2]| oracle::reference_point(&toy, z, 1.0, 256).unwrap().free_energy;
        for k in 0..40 {
            let z = [(0.113 * k as f64) % 1.0, (0.271 * k as f64 + 0.05) % 1.0];
            let f = oracle::reference_point(&toy, z, 1.0, 256).unwrap().mean_force;
            let fd = [
                (a([z[0] + h, z[1]]) - a([z[0] - h, z[1]])) / (2.0 * h),
                (a([z[0], z[1] + h]) - a([z[0], z[1] - h])) / (2.0 * h),
            ];
            assert!((f[0] - fd[0]).abs() < 1e-6 && (f[1] - fd[1]).abs() < 1e-6, "{kind:?} {z:?}");
        }
    }
}

#[test]
fn free_energy_has_zero_mean_gauge() {
    let grid = Grid2::periodic(0.0, 1.0, 20).unwrap();
    let a = oracle::reference_free_energy(&toy_b(), &grid, 1.0, 256).unwrap();
    assert!(a.mean().abs() < 1e-13);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(oracle::reference_point(&toy_b(), [0.1, 0.2], 0.0, 256).is_err());
    assert!(oracle::reference_point(&toy_b(), [0.1, 0.2], 1.0, 1).is_err());
    let big = Grid2::bounded(0.0, 1.0, 70).unwrap();
    let f = pabf::field::QuadratureField::from_fn(big, |_| [0.0, 0.0]);
    assert!(oracle::dense_projection_solve(&f, None).is_err());
}

proptest! {
    #[test]
    fn free_energy_is_periodic(x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let toy = toy_b();
        let a0 = oracle::reference_point(&toy, [x, y], 1.0, 128).unwrap();
        let a1 = oracle::reference_point(&toy, [x + 1.0, y - 1.0], 1.0, 128).unwrap();
        prop_assert!((a0.free_energy - a1.free_energy).abs() < 1e-10);
    }
}
