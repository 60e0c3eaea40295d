//! Run configuration.
//!
//! Files are TOML. Every key is optional; missing values are filled with
//! defaults that depend on the selected system, and the fully resolved
//! configuration is what a run echoes next to its outputs. Unknown keys are
//! rejected.
//!
//! ```toml
//! system = "trimer"        # trimer | toy_a | toy_b
//! mode = "pabf"            # none | abf | pabf
//! seed = 1
//!
//! [physics]
//! beta = 1.0
//! dt = 2.5e-4
//! total_time = 20.0
//! replicas = 100
//!
//! [trimer]
//! particles = 100
//! box_length = 15.0
//!
//! [grid]
//! xi_min = -0.2
//! xi_max = 1.2
//! n_bins = 50
//! periodic = false
//!
//! [projection]
//! stride = 10
//! weighted = false
//!
//! [diagnostics]
//! interval = 0.5
//!
//! [output]
//! directory = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::helmholtz::{ProjectionOptions, SolverKind};
use crate::langevin::BiasMode;
use crate::potentials::PairPotentialParams;
use crate::system::{Model, TrimerModel};
use crate::toy::{ToyKind, ToyParams, ToySystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Trimer,
    ToyA,
    ToyB,
}

impl SystemKind {
    fn toy_kind(self) -> Option<ToyKind> {
        match self {
            SystemKind::Trimer => None,
            SystemKind::ToyA => Some(ToyKind::ToyA),
            SystemKind::ToyB => Some(ToyKind::ToyB),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Option<SystemKind>,
    mode: Option<BiasMode>,
    seed: Option<u64>,
    #[serde(default)]
    physics: RawPhysics,
    #[serde(default)]
    trimer: RawTrimer,
    #[serde(default)]
    toy: RawToy,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    projection: RawProjection,
    #[serde(default)]
    diagnostics: RawDiagnostics,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    beta: Option<f64>,
    dt: Option<f64>,
    total_time: Option<f64>,
    replicas: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrimer {
    particles: Option<usize>,
    box_length: Option<f64>,
    sigma: Option<f64>,
    epsilon: Option<f64>,
    sigma_prime: Option<f64>,
    epsilon_prime: Option<f64>,
    d1: Option<f64>,
    omega: Option<f64>,
    h: Option<f64>,
    k_theta: Option<f64>,
    cos_theta0: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToy {
    h: Option<f64>,
    kappa: Option<f64>,
    a: Option<f64>,
    c: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    xi_min: Option<f64>,
    xi_max: Option<f64>,
    n_bins: Option<usize>,
    periodic: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProjection {
    stride: Option<u64>,
    weighted: Option<bool>,
    solver: Option<SolverKind>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    weight_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagnostics {
    interval: Option<f64>,
    distance_interval: Option<f64>,
    reference: Option<PathBuf>,
    marginals: Option<bool>,
    quadrature_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub beta: f64,
    pub dt: f64,
    pub total_time: f64,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimerConfig {
    pub particles: usize,
    pub box_length: f64,
    #[serde(flatten)]
    pub potential: PairPotentialParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_bins: usize,
    pub periodic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    /// Steps between refreshes of the biasing force.
    pub stride: u64,
    /// Weight the projection with the instantaneous occupancy density.
    pub weighted: bool,
    pub solver: SolverKind,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Floor applied to the occupancy density before normalization.
    pub weight_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Time between diagnostics rows.
    pub interval: f64,
    /// Time between entries of the bond-length series (trimer only).
    pub distance_interval: f64,
    /// Optional reference mean-force field (CSV) for the error column.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    /// Write one occupancy-marginal file per diagnostics time.
    pub marginals: bool,
    /// Quadrature points for the toy reference free energy.
    pub quadrature_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemKind,
    pub mode: BiasMode,
    pub seed: u64,
    pub physics: PhysicsConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trimer: Option<TrimerConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToyParams>,
    pub grid: GridConfig,
    pub projection: ProjectionConfig,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && !v.is_nan() {
        Ok(v)
    } else {
        Err(Error::config(format!("`{name}` must be positive (got {v})")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(format!("`{name}` must be finite and non-negative (got {v})")))
    }
}

impl RunConfig {
    /// Parses and resolves a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::config(e.message().to_string()))?;
        resolve(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Defaults of the given system with no file at all.
    pub fn defaults(system: SystemKind) -> Self {
        resolve(RawConfig {
            system: Some(system),
            ..Default::default()
        })
        .expect("defaults are valid")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn grid(&self) -> Result<Grid2> {
        Grid2::new(self.grid.xi_min, self.grid.xi_max, self.grid.n_bins, self.grid.periodic)
    }

    pub fn model(&self) -> Result<Model> {
        match (self.system.toy_kind(), &self.trimer, &self.toy) {
            (None, Some(t), _) => Ok(Model::Trimer(TrimerModel::new(t.potential, t.particles, t.box_length)?)),
            (Some(kind), _, Some(p)) => Ok(Model::Toy(ToySystem::new(kind, *p))),
            _ => Err(Error::config("system parameters are missing")),
        }
    }

    pub fn projection_options(&self) -> ProjectionOptions {
        ProjectionOptions {
            solver: self.projection.solver,
            tolerance: self.projection.tolerance,
            max_iterations: self.projection.max_iterations,
        }
    }

    /// Number of integration steps covering `total_time`.
    pub fn total_steps(&self) -> u64 {
        (self.physics.total_time / self.physics.dt).round() as u64
    }

    /// Steps between diagnostics rows (at least one).
    pub fn diagnostics_stride(&self) -> u64 {
        ((self.diagnostics.interval / self.physics.dt).round() as u64).max(1)
    }

    pub fn distance_stride(&self) -> u64 {
        ((self.diagnostics.distance_interval / self.physics.dt).round() as u64).max(1)
    }

    /// Checks value ranges and mode/system combinations.
    pub fn validate(&self) -> Result<()> {
        positive("physics.beta", self.physics.beta)?;
        if !self.physics.dt.is_finite() {
            return Err(Error::config("`physics.dt` must be finite"));
        }
        positive("physics.dt", self.physics.dt)?;
        non_negative("physics.total_time", self.physics.total_time)?;
        if self.physics.replicas == 0 {
            return Err(Error::config("`physics.replicas` must be at least 1"));
        }
        self.grid().map_err(|e| Error::config(format!("grid: {e}")))?;
        if self.projection.stride == 0 {
            return Err(Error::config("`projection.stride` must be at least 1"));
        }
        positive("projection.tolerance", self.projection.tolerance)?;
        positive("projection.weight_floor", self.projection.weight_floor)?;
        if self.projection.max_iterations == 0 {
            return Err(Error::config("`projection.max_iterations` must be at least 1"));
        }
        positive("diagnostics.interval", self.diagnostics.interval)?;
        positive("diagnostics.distance_interval", self.diagnostics.distance_interval)?;
        if self.diagnostics.quadrature_points < 2 {
            return Err(Error::config("`diagnostics.quadrature_points` must be at least 2"));
        }
        match self.system {
            SystemKind::Trimer => {
                if self.grid.periodic {
                    return Err(Error::config("the trimer bond-length coordinate needs a bounded grid"));
                }
            }
            SystemKind::ToyA | SystemKind::ToyB => {
                if !self.grid.periodic || self.grid.xi_min != 0.0 || self.grid.xi_max != 1.0 {
                    return Err(Error::config("toy systems live on the unit torus: use a periodic grid on [0, 1)"));
                }
                if self.physics.beta.is_infinite() {
                    return Err(Error::config("toy systems need a finite beta for the reference free energy"));
                }
            }
        }
        self.model().map_err(|e| Error::config(e.to_string()))?;
        Ok(())
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let system = raw.system.ok_or_else(|| Error::config("missing key `system`"))?;
    let is_trimer = system == SystemKind::Trimer;
    if is_trimer && raw.toy.h.or(raw.toy.kappa).or(raw.toy.a).or(raw.toy.c).is_some() {
        return Err(Error::config("section [toy] does not apply to the trimer system"));
    }
    let t = &raw.trimer;
    if !is_trimer
        && (t.particles.is_some()
            || t.box_length.is_some()
            || t.sigma.or(t.epsilon).or(t.sigma_prime).or(t.epsilon_prime).is_some()
            || t.d1.or(t.omega).or(t.h).or(t.k_theta).or(t.cos_theta0).is_some())
    {
        return Err(Error::config("section [trimer] does not apply to toy systems"));
    }

    let physics = PhysicsConfig {
        beta: raw.physics.beta.unwrap_or(1.0),
        dt: raw.physics.dt.unwrap_or(if is_trimer { 2.5e-4 } else { 1e-3 }),
        total_time: raw.physics.total_time.unwrap_or(if is_trimer { 20.0 } else { 10.0 }),
        replicas: raw.physics.replicas.unwrap_or(if is_trimer { 100 } else { 32 }),
    };

    let (trimer, toy) = if is_trimer {
        let d = PairPotentialParams::default();
        let potential = PairPotentialParams {
            sigma: t.sigma.unwrap_or(d.sigma),
            epsilon: t.epsilon.unwrap_or(d.epsilon),
            sigma_prime: t.sigma_prime.unwrap_or(d.sigma_prime),
            epsilon_prime: t.epsilon_prime.unwrap_or(d.epsilon_prime),
            d1: t.d1.unwrap_or(d.d1),
            omega: t.omega.unwrap_or(d.omega),
            h: t.h.unwrap_or(d.h),
            k_theta: t.k_theta.unwrap_or(d.k_theta),
            cos_theta0: t.cos_theta0.unwrap_or(d.cos_theta0),
        };
        let trimer = TrimerConfig {
            particles: t.particles.unwrap_or(100),
            box_length: t.box_length.unwrap_or(15.0),
            potential,
        };
        (Some(trimer), None)
    } else {
        let d = ToyParams::default();
        let toy = ToyParams {
            h: raw.toy.h.unwrap_or(d.h),
            kappa: raw.toy.kappa.unwrap_or(d.kappa),
            a: raw.toy.a.unwrap_or(d.a),
            c: raw.toy.c.unwrap_or(d.c),
        };
        (None, Some(toy))
    };

    let grid = if is_trimer {
        GridConfig {
            xi_min: raw.grid.xi_min.unwrap_or(-0.2),
            xi_max: raw.grid.xi_max.unwrap_or(1.2),
            n_bins: raw.grid.n_bins.unwrap_or(50),
            periodic: raw.grid.periodic.unwrap_or(false),
        }
    } else {
        GridConfig {
            xi_min: raw.grid.xi_min.unwrap_or(0.0),
            xi_max: raw.grid.xi_max.unwrap_or(1.0),
            n_bins: raw.grid.n_bins.unwrap_or(32),
            periodic: raw.grid.periodic.unwrap_or(true),
        }
    };

    let defaults = ProjectionOptions::default();
    let projection = ProjectionConfig {
        stride: raw.projection.stride.unwrap_or(10),
        weighted: raw.projection.weighted.unwrap_or(false),
        solver: raw.projection.solver.unwrap_or(defaults.solver),
        tolerance: raw.projection.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: raw.projection.max_iterations.unwrap_or(defaults.max_iterations),
        weight_floor: raw.projection.weight_floor.unwrap_or(1e-6),
    };

    let diagnostics = DiagnosticsConfig {
        interval: raw.diagnostics.interval.unwrap_or(0.5),
        distance_interval: raw.diagnostics.distance_interval.unwrap_or(0.01),
        reference: raw.diagnostics.reference,
        marginals: raw.diagnostics.marginals.unwrap_or(false),
        quadrature_points: raw.diagnostics.quadrature_points.unwrap_or(crate::oracle::DEFAULT_QUADRATURE_POINTS),
    };

    let config = RunConfig {
        system,
        mode: raw.mode.unwrap_or(BiasMode::Pabf),
        seed: raw.seed.unwrap_or(1),
        physics,
        trimer,
        toy,
        grid,
        projection,
        diagnostics,
        output: OutputConfig {
            directory: raw.output.directory.unwrap_or_else(|| PathBuf::from("out")),
        },
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimer_defaults() {
        let c = RunConfig::from_toml_str("system = \"trimer\"").unwrap();
        assert_eq!(c.physics.replicas, 100);
        assert_eq!(c.physics.dt, 2.5e-4);
        let t = c.trimer.as_ref().unwrap();
        assert_eq!(t.particles, 100);
        assert_eq!(t.box_length, 15.0);
        let g = c.grid().unwrap();
        assert_eq!(g.n_bins(), 50);
        assert!((g.bin_width() - 0.028).abs() < 1e-12);
        assert_eq!(c.total_steps(), 80_000);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_toml_str("system = \"toy_a\"\n[physics]\nbetta = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("betta"), "{err}");
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::from_toml_str("system = \"toy_b\"\nmode = \"abf\"\nseed = 7\n[toy]\nc = 1.5\n").unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        assert!(RunConfig::from_toml_str("system = \"trimer\"\n[grid]\nperiodic = true\n").is_err());
        assert!(RunConfig::from_toml_str("system = \"toy_a\"\n[grid]\nperiodic = false\n").is_err());
        assert!(RunConfig::from_toml_str("system = \"toy_a\"\n[trimer]\nparticles = 40\n").is_err());
        assert!(RunConfig::from_toml_str("system = \"toy_a\"\n[physics]\ndt = -1.0\n").is_err());
        assert!(RunConfig::from_toml_str("mode = \"abf\"").is_err());
    }
}
