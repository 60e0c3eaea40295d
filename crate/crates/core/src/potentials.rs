//! Interaction potentials of the trimer-in-solvent system.
//!
//! Particles 0, 1 and 2 form the trimer. Solvent particles interact with
//! everything through the purely repulsive WCA potential; the two trimer
//! bonds use a double well, the end-to-end pair a Lennard-Jones term and the
//! bond angle a harmonic-in-cosine term. The trimer particles do not feel WCA
//! among themselves.
//!
//! All distances use the minimum-image convention in a periodic square box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this are treated as coincident particles.
pub const COINCIDENCE_THRESHOLD: f64 = 1e-12;

/// Parameters of every interaction term of the trimer system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPotentialParams {
    /// WCA length scale.
    pub sigma: f64,
    /// WCA energy scale.
    pub epsilon: f64,
    /// Lennard-Jones length scale of the end-to-end pair.
    pub sigma_prime: f64,
    /// Lennard-Jones energy scale of the end-to-end pair.
    pub epsilon_prime: f64,
    /// Compact-state bond length of the double well.
    pub d1: f64,
    /// Half the separation between the two wells.
    pub omega: f64,
    /// Barrier height of the double well.
    pub h: f64,
    /// Angular stiffness.
    pub k_theta: f64,
    /// Cosine of the equilibrium bond angle.
    pub cos_theta0: f64,
}

impl Default for PairPotentialParams {
    fn default() -> Self {
        let d = 2f64.powf(1.0 / 6.0);
        PairPotentialParams {
            sigma: 1.0,
            epsilon: 1.0,
            sigma_prime: 1.0,
            epsilon_prime: 0.1,
            d1: d,
            omega: 2.0,
            h: 2.0,
            k_theta: 1.0,
            cos_theta0: 1.0 / 3.0,
        }
    }
}

impl PairPotentialParams {
    /// WCA cutoff, the position of the Lennard-Jones minimum.
    pub fn d0(&self) -> f64 {
        2f64.powf(1.0 / 6.0) * self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma", self.sigma),
            ("epsilon", self.epsilon),
            ("omega", self.omega),
            ("h", self.h),
            ("k_theta", self.k_theta),
            ("sigma_prime", self.sigma_prime),
            ("d1", self.d1),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive (got {value})")));
            }
        }
        if !(self.epsilon_prime >= 0.0) {
            return Err(Error::domain(format!(
                "epsilon_prime must be non-negative (got {})",
                self.epsilon_prime
            )));
        }
        if !(-1.0..=1.0).contains(&self.cos_theta0) {
            return Err(Error::domain(format!(
                "cos_theta0 must lie in [-1, 1] (got {})",
                self.cos_theta0
            )));
        }
        Ok(())
    }
}

/// Positions of `N >= 3` particles in a periodic square box of side `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfiguration {
    positions: Vec<[f64; 2]>,
    box_length: f64,
}

impl ParticleConfiguration {
    /// Builds a configuration, wrapping every coordinate into `[0, L)`.
    pub fn new(mut positions: Vec<[f64; 2]>, box_length: f64) -> Result<Self> {
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::domain(format!("box length must be positive (got {box_length})")));
        }
        if positions.len() < 3 {
            return Err(Error::domain(format!(
                "a configuration needs at least the 3 trimer particles (got {})",
                positions.len()
            )));
        }
        for p in positions.iter_mut() {
            for x in p.iter_mut() {
                if !x.is_finite() {
                    return Err(Error::domain("non-finite particle coordinate"));
                }
                *x = wrap_coordinate(*x, box_length);
            }
        }
        Ok(ParticleConfiguration {
            positions,
            box_length,
        })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Flattened coordinates `x0, y0, x1, y1, ...`.
    pub fn coordinates(&self) -> &[f64] {
        self.positions.as_flattened()
    }

    /// Moves every particle by `shift`, wrapping back into the box.
    pub fn translate(&mut self, shift: [f64; 2]) {
        for p in self.positions.iter_mut() {
            p[0] = wrap_coordinate(p[0] + shift[0], self.box_length);
            p[1] = wrap_coordinate(p[1] + shift[1], self.box_length);
        }
    }

    pub fn into_positions(self) -> Vec<[f64; 2]> {
        self.positions
    }
}

#[inline]
pub fn wrap_coordinate(x: f64, box_length: f64) -> f64 {
    let y = x.rem_euclid(box_length);
    // rem_euclid may return exactly `box_length` for tiny negative inputs
    if y >= box_length {
        0.0
    } else {
        y
    }
}

#[inline]
pub fn minimum_image(delta: [f64; 2], box_length: f64) -> [f64; 2] {
    [
        delta[0] - box_length * (delta[0] / box_length).round(),
        delta[1] - box_length * (delta[1] / box_length).round(),
    ]
}

/// Minimum-image separation vector `b - a`.
#[inline]
pub fn separation(a: [f64; 2], b: [f64; 2], box_length: f64) -> [f64; 2] {
    minimum_image([b[0] - a[0], b[1] - a[1]], box_length)
}

fn check_distance(d: f64) -> Result<()> {
    if !(d > 0.0) {
        return Err(Error::domain(format!("pair distance must be positive (got {d})")));
    }
    Ok(())
}

/// WCA energy and its derivative with respect to the distance.
#[inline]
fn wca_terms(d: f64, p: &PairPotentialParams) -> (f64, f64) {
    if d > p.d0() {
        return (0.0, 0.0);
    }
    let s6 = (p.sigma / d).powi(6);
    let s12 = s6 * s6;
    (
        p.epsilon + 4.0 * p.epsilon * (s12 - s6),
        -24.0 * p.epsilon * (2.0 * s12 - s6) / d,
    )
}

#[inline]
fn double_well_terms(d: f64, p: &PairPotentialParams) -> (f64, f64) {
    let y = (d - p.d1 - p.omega) / p.omega;
    let b = 1.0 - y * y;
    (p.h * b * b, -4.0 * p.h * b * y / p.omega)
}

#[inline]
fn lj_terms(d: f64, p: &PairPotentialParams) -> (f64, f64) {
    let s6 = (p.sigma_prime / d).powi(6);
    let s12 = s6 * s6;
    (
        4.0 * p.epsilon_prime * (s12 - s6),
        -24.0 * p.epsilon_prime * (2.0 * s12 - s6) / d,
    )
}

pub fn wca_energy(d: f64, p: &PairPotentialParams) -> Result<f64> {
    check_distance(d)?;
    Ok(wca_terms(d, p).0)
}

/// `dV_WCA/dd`.
pub fn wca_derivative(d: f64, p: &PairPotentialParams) -> Result<f64> {
    check_distance(d)?;
    Ok(wca_terms(d, p).1)
}

pub fn double_well_energy(d: f64, p: &PairPotentialParams) -> Result<f64> {
    check_distance(d)?;
    Ok(double_well_terms(d, p).0)
}

pub fn double_well_derivative(d: f64, p: &PairPotentialParams) -> Result<f64> {
    check_distance(d)?;
    Ok(double_well_terms(d, p).1)
}

pub fn lj_energy(d: f64, p: &PairPotentialParams) -> Result<f64> {
    check_distance(d)?;
    Ok(lj_terms(d, p).0)
}

pub fn lj_derivative(d: f64, p: &PairPotentialParams) -> Result<f64> {
    check_distance(d)?;
    Ok(lj_terms(d, p).1)
}

pub fn angle_energy(cos_theta: f64, p: &PairPotentialParams) -> Result<f64> {
    if !(-1.0..=1.0).contains(&cos_theta) {
        return Err(Error::domain(format!(
            "cosine of the bond angle must lie in [-1, 1] (got {cos_theta})"
        )));
    }
    let dc = cos_theta - p.cos_theta0;
    Ok(0.5 * p.k_theta * dc * dc)
}

/// Cosine of the angle between `q1->q0` and `q1->q2`.
pub fn trimer_cos_angle(positions: &[[f64; 2]], box_length: f64) -> Result<f64> {
    let a = separation(positions[1], positions[0], box_length);
    let b = separation(positions[1], positions[2], box_length);
    let ra = norm(a);
    let rb = norm(b);
    if ra < COINCIDENCE_THRESHOLD {
        return Err(Error::CoincidentParticles { i: 0, j: 1, distance: ra });
    }
    if rb < COINCIDENCE_THRESHOLD {
        return Err(Error::CoincidentParticles { i: 1, j: 2, distance: rb });
    }
    Ok(((a[0] * b[0] + a[1] * b[1]) / (ra * rb)).clamp(-1.0, 1.0))
}

#[inline]
pub(crate) fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Adds a central pair force: `dv_dd` is the derivative of the pair energy
/// with respect to the distance, `delta = q_j - q_i`.
#[inline]
fn add_pair_gradient(grad: &mut [[f64; 2]], i: usize, j: usize, delta: [f64; 2], d: f64, dv_dd: f64) {
    let s = dv_dd / d;
    grad[i][0] -= s * delta[0];
    grad[i][1] -= s * delta[1];
    grad[j][0] += s * delta[0];
    grad[j][1] += s * delta[1];
}

/// Total potential energy; `grad` receives `dV/dq` per particle.
///
/// This is the hot path of the sampler and shares every term with
/// [`total_energy`] and [`total_forces`].
pub fn energy_and_gradient(
    positions: &[[f64; 2]],
    box_length: f64,
    p: &PairPotentialParams,
    grad: &mut [[f64; 2]],
) -> Result<f64> {
    let n = positions.len();
    debug_assert_eq!(grad.len(), n);
    if n < 3 {
        return Err(Error::domain("the trimer needs three particles"));
    }
    grad.iter_mut().for_each(|g| *g = [0.0, 0.0]);

    let d0 = p.d0();
    let d0_sq = d0 * d0;
    let coincident_sq = COINCIDENCE_THRESHOLD * COINCIDENCE_THRESHOLD;
    let mut energy = 0.0;

    // WCA: solvent-solvent and solvent-trimer pairs
    for i in 0..n {
        let qi = positions[i];
        for j in (i + 1).max(3)..n {
            let delta = separation(qi, positions[j], box_length);
            let d_sq = delta[0] * delta[0] + delta[1] * delta[1];
            if d_sq >= d0_sq {
                continue;
            }
            if d_sq < coincident_sq {
                return Err(Error::CoincidentParticles { i, j, distance: d_sq.sqrt() });
            }
            let d = d_sq.sqrt();
            let (e, de) = wca_terms(d, p);
            energy += e;
            add_pair_gradient(grad, i, j, delta, d, de);
        }
    }

    // bonds, end-to-end LJ
    type Terms = fn(f64, &PairPotentialParams) -> (f64, f64);
    let bonded: [(usize, usize, Terms); 3] = [
        (0, 1, double_well_terms),
        (1, 2, double_well_terms),
        (0, 2, lj_terms),
    ];
    for (i, j, term) in bonded {
        let delta = separation(positions[i], positions[j], box_length);
        let d = norm(delta);
        if d < COINCIDENCE_THRESHOLD {
            return Err(Error::CoincidentParticles { i, j, distance: d });
        }
        let (e, de) = term(d, p);
        energy += e;
        add_pair_gradient(grad, i, j, delta, d, de);
    }

    // angle at q1
    let a = separation(positions[1], positions[0], box_length);
    let b = separation(positions[1], positions[2], box_length);
    let ra = norm(a);
    let rb = norm(b);
    let c = (a[0] * b[0] + a[1] * b[1]) / (ra * rb);
    let dc = c - p.cos_theta0;
    energy += 0.5 * p.k_theta * dc * dc;
    let g = p.k_theta * dc;
    let dc_da = [
        b[0] / (ra * rb) - c * a[0] / (ra * ra),
        b[1] / (ra * rb) - c * a[1] / (ra * ra),
    ];
    let dc_db = [
        a[0] / (ra * rb) - c * b[0] / (rb * rb),
        a[1] / (ra * rb) - c * b[1] / (rb * rb),
    ];
    for k in 0..2 {
        grad[0][k] += g * dc_da[k];
        grad[2][k] += g * dc_db[k];
        grad[1][k] -= g * (dc_da[k] + dc_db[k]);
    }

    Ok(energy)
}

pub fn total_energy(config: &ParticleConfiguration, p: &PairPotentialParams) -> Result<f64> {
    let mut grad = vec![[0.0; 2]; config.len()];
    energy_and_gradient(config.positions(), config.box_length(), p, &mut grad)
}

/// Forces `-dV/dq` on every particle.
pub fn total_forces(config: &ParticleConfiguration, p: &PairPotentialParams) -> Result<Vec<[f64; 2]>> {
    let mut grad = vec![[0.0; 2]; config.len()];
    energy_and_gradient(config.positions(), config.box_length(), p, &mut grad)?;
    Ok(grad.into_iter().map(|g| [-g[0], -g[1]]).collect())
}
