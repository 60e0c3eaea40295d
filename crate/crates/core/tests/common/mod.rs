#![allow(dead_code)]

use pabf::potentials::{self, PairPotentialParams};
use pabf::reaction_coordinate::ReactionCoordinate;
use rand::Rng;

pub const BOX: f64 = 15.0;

/// Random trimer-plus-solvent configuration with every pair at least
/// `min_distance` apart (minimum image).
pub fn random_configuration<R: Rng>(rng: &mut R, n: usize, box_length: f64, min_distance: f64) -> Vec<[f64; 2]> {
    let p = PairPotentialParams::default();
    loop {
        let q1 = [rng.random_range(0.0..box_length), rng.random_range(0.0..box_length)];
        let bond = |rng: &mut R| {
            let r = rng.random_range(0.9..p.d0() + 2.5 * p.omega);
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            [q1[0] + r * a.cos(), q1[1] + r * a.sin()]
        };
        let q0 = bond(rng);
        let q2 = bond(rng);
        let mut q = vec![q0, q1, q2];
        let cos = potentials::trimer_cos_angle(&q, box_length).unwrap();
        if cos.abs() > 0.98 || norm(potentials::separation(q0, q2, box_length)) < min_distance {
            continue;
        }
        let mut attempts = 0;
        while q.len() < n && attempts < 100_000 {
            attempts += 1;
            let c = [rng.random_range(0.0..box_length), rng.random_range(0.0..box_length)];
            if q
                .iter()
                .all(|o| norm(potentials::separation(c, *o, box_length)) >= min_distance)
            {
                q.push(c);
            }
        }
        if q.len() == n {
            return q;
        }
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Central-difference gradient of `f` at `x`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + h;
            let fp = f(&y);
            y[k] = x[k] - h;
            let fm = f(&y);
            y[k] = x[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

pub fn energy_of(flat: &[f64], n: usize, box_length: f64) -> f64 {
    let q: Vec<[f64; 2]> = (0..n).map(|k| [flat[2 * k], flat[2 * k + 1]]).collect();
    let mut g = vec![[0.0; 2]; n];
    potentials::energy_and_gradient(&q, box_length, &PairPotentialParams::default(), &mut g).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inv2(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
}

/// `u_i = sum_j Ginv_ij grad xi_j` built from finite-difference gradients.
fn weighted_gradients(rc: &ReactionCoordinate, x: &[f64], h: f64) -> [Vec<f64>; 2] {
    let g0 = fd_gradient(|y| rc.xi(y)[0], x, h);
    let g1 = fd_gradient(|y| rc.xi(y)[1], x, h);
    let gram = [[dot(&g0, &g0), dot(&g0, &g1)], [dot(&g1, &g0), dot(&g1, &g1)]];
    let gi = inv2(gram);
    let u = |i: usize| -> Vec<f64> {
        g0.iter()
            .zip(&g1)
            .map(|(a, b)| gi[i][0] * a + gi[i][1] * b)
            .collect()
    };
    [u(0), u(1)]
}

/// The local mean force assembled entirely from finite differences of `xi`
/// and of the energy, including the divergence term (nested differences).
pub fn numeric_local_mean_force(
    rc: &ReactionCoordinate,
    energy: impl Fn(&[f64]) -> f64,
    x: &[f64],
    beta: f64,
) -> [f64; 2] {
    let inner = 1e-5;
    let outer = 1e-4;
    let grad_v = fd_gradient(&energy, x, 1e-6);
    let u = weighted_gradients(rc, x, inner);
    let mut div = [0.0; 2];
    let mut y = x.to_vec();
    for k in 0..x.len() {
        y[k] = x[k] + outer;
        let up = weighted_gradients(rc, &y, inner);
        y[k] = x[k] - outer;
        let um = weighted_gradients(rc, &y, inner);
        y[k] = x[k];
        for i in 0..2 {
            div[i] += (up[i][k] - um[i][k]) / (2.0 * outer);
        }
    }
    [0, 1].map(|i| dot(&u[i], &grad_v) - div[i] / beta)
}

/// Largest componentwise difference relative to the largest reference entry.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}
