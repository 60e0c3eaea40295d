//! Euler-Maruyama integration of the (biased) overdamped Langevin dynamics
//!
//! ```text
//! dX = -grad V dt + sum_i (B_i(xi) - d_i W(xi)) grad xi_i dt + sqrt(2 dt / beta) G
//! ```
//!
//! for an ensemble of independent replicas. `B` is the current biasing
//! force, read per bin, and `W` the quadratic wall outside a bounded grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::grid::Grid2;
use crate::reaction_coordinate::LocalMeanForceSample;
use crate::system::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    /// Plain overdamped Langevin dynamics.
    None,
    /// Bias with the binned mean force estimate.
    #[default]
    Abf,
    /// Bias with the gradient of its Helmholtz projection.
    Pabf,
}

impl std::fmt::Display for BiasMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BiasMode::None => "none",
            BiasMode::Abf => "abf",
            BiasMode::Pabf => "pabf",
        })
    }
}

impl std::str::FromStr for BiasMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(BiasMode::None),
            "abf" => Ok(BiasMode::Abf),
            "pabf" => Ok(BiasMode::Pabf),
            other => Err(Error::config(format!("unknown mode `{other}` (expected none, abf or pabf)"))),
        }
    }
}

/// `W(z) = sum_i (z_i - xi_max)^2 [z_i >= xi_max] + (z_i - xi_min)^2 [z_i <= xi_min]`.
pub fn confining_energy(z: [f64; 2], xi_min: f64, xi_max: f64) -> f64 {
    z.iter()
        .map(|&x| {
            if x >= xi_max {
                (x - xi_max).powi(2)
            } else if x <= xi_min {
                (x - xi_min).powi(2)
            } else {
                0.0
            }
        })
        .sum()
}

pub fn confining_gradient(z: [f64; 2], xi_min: f64, xi_max: f64) -> [f64; 2] {
    z.map(|x| {
        if x >= xi_max {
            2.0 * (x - xi_max)
        } else if x <= xi_min {
            2.0 * (x - xi_min)
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub beta: f64,
    pub dt: f64,
}

/// What the replicas feel besides `-grad V`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bias<'a> {
    /// Per-bin biasing force; points outside the grid use the nearest
    /// boundary bin.
    pub field: Option<&'a VectorField2>,
    /// Bounded grid whose edges define the confining wall.
    pub wall: Option<&'a Grid2>,
}

#[derive(Debug, Clone)]
struct Replica {
    state: Vec<f64>,
    grad: Vec<f64>,
    rng: ChaCha8Rng,
}

/// Independent copies of the system, each with its own random stream
/// (`seed`, stream = replica index).
#[derive(Debug, Clone)]
pub struct ReplicaEnsemble {
    replicas: Vec<Replica>,
    steps: u64,
}

fn replica_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

impl ReplicaEnsemble {
    /// Draws every initial state from its replica's stream.
    pub fn new(model: &Model, n_replicas: usize, seed: u64) -> Result<Self> {
        if n_replicas == 0 {
            return Err(Error::domain("the ensemble needs at least one replica"));
        }
        let replicas = (0..n_replicas)
            .map(|r| {
                let mut rng = replica_rng(seed, r);
                let state = model.initial_state(&mut rng)?;
                Ok(Replica {
                    grad: vec![0.0; state.len()],
                    state,
                    rng,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReplicaEnsemble { replicas, steps: 0 })
    }

    /// Ensemble started from the given states.
    pub fn from_states(states: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::domain("the ensemble needs at least one replica"));
        }
        let replicas = states
            .into_iter()
            .enumerate()
            .map(|(r, state)| Replica {
                grad: vec![0.0; state.len()],
                state,
                rng: replica_rng(seed, r),
            })
            .collect();
        Ok(ReplicaEnsemble { replicas, steps: 0 })
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn state(&self, replica: usize) -> &[f64] {
        &self.replicas[replica].state
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.replicas.iter().map(|r| r.state.as_slice())
    }

    /// Advances every replica by one step and returns, in replica order, the
    /// reaction coordinate and local mean force at the pre-step positions.
    pub fn step(&mut self, model: &Model, bias: Bias<'_>, params: StepParams) -> Result<Vec<LocalMeanForceSample>> {
        if !(params.dt > 0.0) {
            return Err(Error::domain(format!("time step must be positive (got {})", params.dt)));
        }
        let rc = model.reaction_coordinate();
        let noise = (2.0 * params.dt / params.beta).sqrt();
        let time = (self.steps + 1) as f64 * params.dt;
        let samples = self
            .replicas
            .par_iter_mut()
            .enumerate()
            .map(|(index, replica)| -> Result<LocalMeanForceSample> {
                let Replica { state, grad, rng } = replica;
                model
                    .energy_and_gradient(state, grad)
                    .map_err(|e| e.context(format!("replica {index}")))?;
                let eval = rc.evaluate(state).map_err(|e| e.context(format!("replica {index}")))?;
                let f = rc
                    .local_mean_force_with(&eval, state, grad, params.beta)
                    .map_err(|e| e.context(format!("replica {index}")))?;
                let z = eval.z;

                let mut push = [0.0; 2];
                if let Some(field) = bias.field {
                    let (i, j) = field.grid().clamped_bin(z);
                    push = field.get(i, j);
                }
                if let Some(grid) = bias.wall.filter(|g| !g.is_periodic()) {
                    let w = confining_gradient(z, grid.xi_min(), grid.xi_max());
                    push[0] -= w[0];
                    push[1] -= w[1];
                }
                let dt = params.dt;
                for (k, x) in state.iter_mut().enumerate() {
                    *x -= grad[k] * dt;
                }
                for (g, &p) in eval.gradients.iter().zip(&push) {
                    if p != 0.0 {
                        g.add_scaled_to(p * dt, state);
                    }
                }
                if noise > 0.0 {
                    for x in state.iter_mut() {
                        let g: f64 = StandardNormal.sample(rng);
                        *x += noise * g;
                    }
                }
                if state.iter().any(|x| !x.is_finite()) {
                    return Err(Error::UnstableStep { replica: index, time });
                }
                model.wrap(state);
                Ok(LocalMeanForceSample { z, f })
            })
            .collect::<Result<Vec<_>>>()?;
        self.steps += 1;
        Ok(samples)
    }
}
