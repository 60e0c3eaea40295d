//! The ABF / PABF loop: integrate all replicas, deposit local mean force
//! samples, and periodically refresh the biasing force.

use crate::config::RunConfig;
use crate::diagnostics::{self, TransitionCounter};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField2, WeightField};
use crate::force_estimator::BinnedForceAccumulator;
use crate::grid::Grid2;
use crate::helmholtz::{self, Projection, Projector};
use crate::langevin::{Bias, BiasMode, ReplicaEnsemble, StepParams};
use crate::system::Model;

#[derive(Debug, Clone)]
pub struct Simulation {
    config: RunConfig,
    model: Model,
    grid: Grid2,
    ensemble: ReplicaEnsemble,
    accumulator: BinnedForceAccumulator,
    projector: Projector,
    bias: VectorField2,
    potential: Option<ScalarField>,
    transitions: Vec<[TransitionCounter; 2]>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let model = config.model()?;
        let grid = config.grid()?;
        let ensemble = ReplicaEnsemble::new(&model, config.physics.replicas, config.seed)?;
        let projector = Projector::new(grid, config.projection_options())?;
        let transitions = match &config.trimer {
            Some(t) => {
                let (low, high) = diagnostics::default_bond_thresholds(t.potential.d1, t.potential.omega);
                let counter = TransitionCounter::new(low, high)?;
                vec![[counter; 2]; config.physics.replicas]
            }
            None => Vec::new(),
        };
        Ok(Simulation {
            accumulator: BinnedForceAccumulator::new(grid),
            bias: VectorField2::zeros(grid),
            potential: None,
            config,
            model,
            grid,
            ensemble,
            projector,
            transitions,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn ensemble(&self) -> &ReplicaEnsemble {
        &self.ensemble
    }

    pub fn accumulator(&self) -> &BinnedForceAccumulator {
        &self.accumulator
    }

    pub fn steps(&self) -> u64 {
        self.ensemble.steps()
    }

    pub fn time(&self) -> f64 {
        self.steps() as f64 * self.config.physics.dt
    }

    /// The biasing force currently applied (zero in mode `none`).
    pub fn bias(&self) -> &VectorField2 {
        &self.bias
    }

    /// Free-energy estimate behind the current PABF bias.
    pub fn free_energy(&self) -> Option<&ScalarField> {
        self.potential.as_ref()
    }

    /// Advances every replica by one time step.
    pub fn step(&mut self) -> Result<()> {
        let params = StepParams {
            beta: self.config.physics.beta,
            dt: self.config.physics.dt,
        };
        let bias = match self.config.mode {
            BiasMode::None => Bias::default(),
            BiasMode::Abf | BiasMode::Pabf => Bias {
                field: Some(&self.bias),
                wall: Some(&self.grid),
            },
        };
        let samples = self
            .ensemble
            .step(&self.model, bias, params)
            .map_err(|e| e.context(format!("step {}", self.steps() + 1)))?;
        self.accumulator.deposit_all(&samples);

        if let Some(t) = &self.config.trimer {
            let d0 = t.potential.d0();
            let s = 2.0 * t.potential.omega;
            for (counters, sample) in self.transitions.iter_mut().zip(&samples) {
                counters[0].observe(d0 + s * sample.z[0]);
                counters[1].observe(d0 + s * sample.z[1]);
            }
        }

        if self.config.mode != BiasMode::None && self.steps().is_multiple_of(self.config.projection.stride) {
            self.refresh_bias()
                .map_err(|e| e.context(format!("bias refresh at t = {}", self.time())))?;
        }
        Ok(())
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    fn refresh_bias(&mut self) -> Result<()> {
        let f = self.accumulator.mean_force_field()?;
        match self.config.mode {
            BiasMode::None => {}
            BiasMode::Abf => self.bias = f,
            BiasMode::Pabf => {
                let projection = self.project_with_warm_start(&f)?;
                self.bias = helmholtz::gradient_at_bins(&projection.potential);
                self.potential = Some(projection.potential);
            }
        }
        Ok(())
    }

    fn project_with_warm_start(&self, f: &VectorField2) -> Result<Projection> {
        if self.config.projection.weighted {
            let phi = self.occupancy_weight()?;
            self.projector.project_weighted(f, &phi, self.potential.as_ref())
        } else {
            self.projector.project(f)
        }
    }

    /// Reaction-coordinate value of every replica.
    pub fn coordinates(&self) -> Vec<[f64; 2]> {
        let rc = self.model.reaction_coordinate();
        self.ensemble.states().map(|x| rc.xi(x)).collect()
    }

    /// Instantaneous per-bin occupancy of the replicas.
    pub fn occupancy(&self) -> Vec<u64> {
        diagnostics::occupancy(&self.grid, self.coordinates())
    }

    /// Weight for the weighted projection: the floored occupancy density.
    pub fn occupancy_weight(&self) -> Result<WeightField> {
        WeightField::from_occupancy(self.grid, &self.occupancy(), self.config.projection.weight_floor)
    }

    /// Current binned mean force estimate.
    pub fn mean_force(&self) -> Result<VectorField2> {
        self.accumulator.mean_force_field()
    }

    /// Projection of the current mean force estimate, with the configured
    /// weighting. Valid in every mode.
    pub fn projection(&self) -> Result<Projection> {
        self.project_with_warm_start(&self.mean_force()?)
    }

    /// Transitions per replica so far, averaged over replicas, for the bonds
    /// `q0 q1` and `q1 q2` (zero for toys).
    pub fn mean_transitions(&self) -> [f64; 2] {
        if self.transitions.is_empty() {
            return [0.0; 2];
        }
        let n = self.transitions.len() as f64;
        let mut total = [0.0; 2];
        for c in &self.transitions {
            total[0] += c[0].count() as f64;
            total[1] += c[1].count() as f64;
        }
        [total[0] / n, total[1] / n]
    }

    /// Bond lengths of one replica (trimer only).
    pub fn bond_lengths(&self, replica: usize) -> Option<[f64; 2]> {
        if replica >= self.ensemble.len() {
            return None;
        }
        self.model.bond_lengths(self.ensemble.state(replica))
    }

    /// Runs to the configured end time, calling `observe` at `t = 0`, at
    /// every diagnostics interval and at the end.
    pub fn run_observed(&mut self, mut observe: impl FnMut(&Simulation) -> Result<()>) -> Result<()> {
        let total = self.config.total_steps();
        let stride = self.config.diagnostics_stride();
        if self.steps() > total {
            return Err(Error::domain("simulation is already past its end time"));
        }
        if self.steps().is_multiple_of(stride) {
            observe(self)?;
        }
        while self.steps() < total {
            let next = ((self.steps() / stride + 1) * stride).min(total);
            self.advance(next - self.steps())?;
            observe(self)?;
        }
        Ok(())
    }
}
