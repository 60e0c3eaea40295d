//! Drivers behind the command-line front end: a single run writing its
//! artifacts, and the multi-realization comparison of biasing modes.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::helmholtz;
use crate::io::{self, CsvWriter, DiagnosticsRow};
use crate::langevin::BiasMode;
use crate::oracle;
use crate::simulation::Simulation;
use crate::system::Model;

/// Reference mean force for the error columns: quadrature for the toys, the
/// configured file (if any) for the trimer.
pub fn reference_field(config: &RunConfig) -> Result<Option<VectorField2>> {
    let grid = config.grid()?;
    match config.model()? {
        Model::Toy(toy) => Ok(Some(oracle::reference_mean_force(
            &toy,
            &grid,
            config.physics.beta,
            config.diagnostics.quadrature_points,
        )?)),
        Model::Trimer(_) => match &config.diagnostics.reference {
            Some(path) => {
                let field = io::read_vector_field(path)?;
                grid.same_as(field.grid())
                    .map_err(|e| e.context(format!("reference {}", path.display())))?;
                Ok(Some(field))
            }
            None => Ok(None),
        },
    }
}

/// Fields and row recorded at one diagnostics time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub row: DiagnosticsRow,
    pub mean_force: VectorField2,
    pub gradient: VectorField2,
}

pub fn snapshot(sim: &Simulation, reference: Option<&VectorField2>) -> Result<Snapshot> {
    let mean_force = sim.mean_force()?;
    let mask = mean_force.validity_mask();
    let visited_bins = mask.iter().filter(|v| **v).count();
    let projection = sim.projection()?;
    let gradient = helmholtz::gradient_at_bins(&projection.potential);
    let (error_force, error_gradient) = match reference {
        Some(r) if visited_bins > 0 => (
            Some(diagnostics::l2_gradient_error(&mean_force, r, &mask)?),
            Some(diagnostics::l2_gradient_error(&gradient, r, &mask)?),
        ),
        _ => (None, None),
    };
    let marginal_distance = match diagnostics::marginal_histograms(sim.grid(), &sim.occupancy()) {
        Ok([m1, m2]) => [
            diagnostics::sup_distance_to_uniform(&m1),
            diagnostics::sup_distance_to_uniform(&m2),
        ],
        Err(_) => [f64::NAN; 2],
    };
    Ok(Snapshot {
        row: DiagnosticsRow {
            time: sim.time(),
            steps: sim.steps(),
            visited_bins,
            error_force,
            error_gradient,
            marginal_distance,
            transitions: sim.mean_transitions(),
        },
        mean_force,
        gradient,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub time: f64,
    pub wall_seconds: f64,
    pub final_row: DiagnosticsRow,
}

/// Runs the configured simulation and writes into `out`:
///
/// * `config.toml`: the resolved configuration,
/// * `diagnostics.csv`: one [`DiagnosticsRow`] per diagnostics time,
/// * `distances.csv`: bond lengths of replica 0 (trimer only),
/// * `marginals_NNNNN.csv`: occupancy marginals, when enabled,
/// * `mean_force.csv`, `projected_force.csv`, `free_energy.csv`: final fields.
pub fn execute(config: &RunConfig, out: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    fs::create_dir_all(out)?;
    let mut echoed = config.clone();
    echoed.output.directory = out.to_path_buf();
    fs::write(out.join("config.toml"), echoed.to_toml_string())?;

    let reference = reference_field(config)?;
    let mut sim = Simulation::new(config.clone())?;
    let total = config.total_steps();
    let diag_stride = config.diagnostics_stride();
    let dist_stride = config.distance_stride();
    let is_trimer = config.trimer.is_some();

    let mut diag = CsvWriter::create(&out.join("diagnostics.csv"), io::DIAGNOSTICS_HEADER)?;
    let mut dist = if is_trimer {
        Some(CsvWriter::create(&out.join("distances.csv"), io::DISTANCES_HEADER)?)
    } else {
        None
    };
    let mut marginal_index = 0usize;
    let mut last_row = None;

    loop {
        let steps = sim.steps();
        if let (Some(w), Some([d01, d12])) = (dist.as_mut(), sim.bond_lengths(0)) {
            if steps % dist_stride == 0 {
                w.row(&format!("{},{d01},{d12}", sim.time()))?;
            }
        }
        if steps % diag_stride == 0 || steps == total {
            let snap = snapshot(&sim, reference.as_ref())?;
            diag.row(&snap.row.to_csv())?;
            if config.diagnostics.marginals {
                if let Ok(m) = diagnostics::marginal_histograms(sim.grid(), &sim.occupancy()) {
                    fs::write(
                        out.join(format!("marginals_{marginal_index:05}.csv")),
                        format!("# time {}\n{}", sim.time(), io::format_marginals(sim.grid(), &m)),
                    )?;
                }
                marginal_index += 1;
            }
            last_row = Some(snap.row);
        }
        if steps >= total {
            break;
        }
        sim.step()?;
    }
    diag.finish()?;
    if let Some(w) = dist {
        w.finish()?;
    }

    let f = sim.mean_force()?;
    let projection = sim.projection()?;
    io::write_vector_field(&out.join("mean_force.csv"), &f)?;
    io::write_vector_field(
        &out.join("projected_force.csv"),
        &helmholtz::gradient_at_bins(&projection.potential),
    )?;
    io::write_scalar_field(&out.join("free_energy.csv"), &projection.potential)?;

    Ok(RunSummary {
        steps: sim.steps(),
        time: sim.time(),
        wall_seconds: started.elapsed().as_secs_f64(),
        final_row: last_row.expect("at least one diagnostics row"),
    })
}

/// Statistics of one mode at one diagnostics time over all realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeStatistics {
    pub var_force: f64,
    pub var_gradient: f64,
    pub mean_error_force: Option<f64>,
    pub mean_error_gradient: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub modes: Vec<BiasMode>,
    pub times: Vec<f64>,
    /// `stats[m][t]` for mode `m` at time index `t`.
    pub stats: Vec<Vec<ModeStatistics>>,
}

impl Comparison {
    pub fn header(&self) -> String {
        let mut h = String::from("time");
        for m in &self.modes {
            h.push_str(&format!(",{m}_var_F,{m}_var_gradA,{m}_error_F,{m}_error_gradA"));
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = self.header();
        out.push('\n');
        for (t, time) in self.times.iter().enumerate() {
            out.push_str(&time.to_string());
            for s in &self.stats {
                let s = s[t];
                out.push_str(&format!(
                    ",{},{},{},{}",
                    s.var_force,
                    s.var_gradient,
                    opt(s.mean_error_force),
                    opt(s.mean_error_gradient)
                ));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs `realizations` copies of the configuration per mode, realization
/// `k` with seed `config.seed + k`, and gathers the spread of the binned
/// force `F_t` and of its projection `grad A_t` at every diagnostics time.
pub fn compare(config: &RunConfig, modes: &[BiasMode], realizations: usize) -> Result<Comparison> {
    if realizations < 2 {
        return Err(Error::config("a comparison needs at least 2 realizations"));
    }
    if modes.is_empty() {
        return Err(Error::config("a comparison needs at least one mode"));
    }
    let reference = reference_field(config)?;
    let mut stats = Vec::with_capacity(modes.len());
    let mut times = Vec::new();
    for &mode in modes {
        let runs: Vec<Vec<Snapshot>> = (0..realizations)
            .into_par_iter()
            .map(|k| {
                let mut c = config.clone();
                c.mode = mode;
                c.seed = config.seed.wrapping_add(k as u64);
                let mut sim = Simulation::new(c)?;
                let mut snaps = Vec::new();
                sim.run_observed(|s| {
                    snaps.push(snapshot(s, reference.as_ref())?);
                    Ok(())
                })?;
                Ok(snaps)
            })
            .collect::<Result<_>>()
            .map_err(|e: Error| e.context(format!("mode {mode}")))?;
        times = runs[0].iter().map(|s| s.row.time).collect();
        let mut per_time = Vec::with_capacity(times.len());
        for t in 0..times.len() {
            let forces: Vec<VectorField2> = runs.iter().map(|r| r[t].mean_force.clone()).collect();
            let gradients: Vec<VectorField2> = runs.iter().map(|r| r[t].gradient.clone()).collect();
            let mean = |get: fn(&DiagnosticsRow) -> Option<f64>| -> Option<f64> {
                let vals: Option<Vec<f64>> = runs.iter().map(|r| get(&r[t].row)).collect();
                vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
            };
            per_time.push(ModeStatistics {
                var_force: diagnostics::realization_variance(&forces)?.total(),
                var_gradient: diagnostics::realization_variance(&gradients)?.total(),
                mean_error_force: mean(|r| r.error_force),
                mean_error_gradient: mean(|r| r.error_gradient),
            });
        }
        stats.push(per_time);
    }
    Ok(Comparison {
        modes: modes.to_vec(),
        times,
        stats,
    })
}
