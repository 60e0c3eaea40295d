//! The physical models the sampler can drive, behind a flat coordinate
//! vector: `[x_0, y_0, x_1, y_1, ...]` for particles, `[x_1, ..., x_n]` for
//! toys.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::potentials::{self, separation, PairPotentialParams};
use crate::reaction_coordinate::ReactionCoordinate;
use crate::toy::ToySystem;

/// Closest approach allowed between freshly placed particles.
const PLACEMENT_CLEARANCE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimerModel {
    pub params: PairPotentialParams,
    pub n_particles: usize,
    pub box_length: f64,
}

impl TrimerModel {
    pub fn new(params: PairPotentialParams, n_particles: usize, box_length: f64) -> Result<Self> {
        params.validate()?;
        if n_particles < 3 {
            return Err(Error::domain(format!("the trimer system needs N >= 3 (got {n_particles})")));
        }
        // the longest interaction is a fully stretched bond
        let reach = params.d1 + 2.0 * params.omega + params.omega;
        if !(box_length > 2.0 * reach) {
            return Err(Error::domain(format!(
                "box length {box_length} is too small for the minimum-image convention (needs > {})",
                2.0 * reach
            )));
        }
        Ok(TrimerModel {
            params,
            n_particles,
            box_length,
        })
    }

    pub fn reaction_coordinate(&self) -> ReactionCoordinate {
        ReactionCoordinate::trimer(self.params.d0(), self.params.omega, self.box_length)
    }

    /// Compact trimer at the equilibrium angle in the middle of the box,
    /// solvent on a randomly perturbed square lattice.
    pub fn initial_configuration<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<[f64; 2]>> {
        let l = self.box_length;
        let d0 = self.params.d0();
        let c = self.params.cos_theta0;
        let s = (1.0 - c * c).sqrt();
        let q1 = [0.5 * l, 0.5 * l];
        let mut positions = vec![[q1[0] + d0, q1[1]], q1, [q1[0] + d0 * c, q1[1] + d0 * s]];

        let n_solvent = self.n_particles - 3;
        if n_solvent == 0 {
            return Ok(positions);
        }
        let per_axis = ((1.5 * n_solvent as f64 + 9.0).sqrt().ceil() as usize).max(2);
        let spacing = l / per_axis as f64;
        let mut sites: Vec<[f64; 2]> = (0..per_axis * per_axis)
            .map(|k| {
                [
                    ((k % per_axis) as f64 + 0.5) * spacing,
                    ((k / per_axis) as f64 + 0.5) * spacing,
                ]
            })
            .collect();
        sites.shuffle(rng);
        let jitter = 0.25 * (spacing - PLACEMENT_CLEARANCE).max(0.0);
        let clear = |p: [f64; 2], placed: &[[f64; 2]]| {
            placed
                .iter()
                .all(|q| potentials::norm(separation(p, *q, l)) >= PLACEMENT_CLEARANCE.max(d0))
        };
        for site in sites {
            if positions.len() == self.n_particles {
                break;
            }
            for _ in 0..8 {
                let p = [
                    potentials::wrap_coordinate(site[0] + rng.random_range(-jitter..=jitter), l),
                    potentials::wrap_coordinate(site[1] + rng.random_range(-jitter..=jitter), l),
                ];
                if clear(p, &positions) {
                    positions.push(p);
                    break;
                }
            }
        }
        if positions.len() < self.n_particles {
            return Err(Error::domain(format!(
                "could not place {} particles in a box of side {l}",
                self.n_particles
            )));
        }
        Ok(positions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Trimer(TrimerModel),
    Toy(ToySystem),
}

impl Model {
    /// Length of the flat coordinate vector.
    pub fn dimension(&self) -> usize {
        match self {
            Model::Trimer(t) => 2 * t.n_particles,
            Model::Toy(t) => t.dimension(),
        }
    }

    pub fn reaction_coordinate(&self) -> ReactionCoordinate {
        match self {
            Model::Trimer(t) => t.reaction_coordinate(),
            Model::Toy(_) => ReactionCoordinate::IdentityFirstTwo,
        }
    }

    /// Energy; `grad` receives `dV/dx` over the flat coordinates.
    pub fn energy_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        match self {
            Model::Trimer(t) => {
                let (q, _) = x.as_chunks::<2>();
                let (g, _) = grad.as_chunks_mut::<2>();
                potentials::energy_and_gradient(q, t.box_length, &t.params, g)
            }
            Model::Toy(t) => Ok(t.energy_and_gradient(x, grad)),
        }
    }

    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        let mut grad = vec![0.0; x.len()];
        self.energy_and_gradient(x, &mut grad)
    }

    /// Wraps the coordinates back into the periodic cell.
    pub fn wrap(&self, x: &mut [f64]) {
        match self {
            Model::Trimer(t) => x
                .iter_mut()
                .for_each(|v| *v = potentials::wrap_coordinate(*v, t.box_length)),
            Model::Toy(t) => t.wrap(x),
        }
    }

    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            Model::Trimer(t) => Ok(t.initial_configuration(rng)?.into_flattened()),
            Model::Toy(t) => Ok(t.initial_state()),
        }
    }

    /// The two trimer bond lengths `|q0 q1|` and `|q1 q2|`.
    pub fn bond_lengths(&self, x: &[f64]) -> Option<[f64; 2]> {
        match self {
            Model::Trimer(t) => {
                let q = |k: usize| [x[2 * k], x[2 * k + 1]];
                Some([
                    potentials::norm(separation(q(0), q(1), t.box_length)),
                    potentials::norm(separation(q(1), q(2), t.box_length)),
                ])
            }
            Model::Toy(_) => None,
        }
    }
}
