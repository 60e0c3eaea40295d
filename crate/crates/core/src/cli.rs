//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::{QuadratureField, WeightField};
use crate::helmholtz::{self, ProjectionOptions, Projector, SolverKind};
use crate::io;
use crate::langevin::BiasMode;
use crate::oracle;
use crate::run;
use crate::system::Model;

#[derive(Debug, Parser)]
#[command(name = "pabf", version, about = "Adaptive biasing force sampling with projected mean forces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its artifacts.
    Run(RunArgs),
    /// Run several seeded realizations per mode and tabulate their spread.
    Compare(CompareArgs),
    /// Project a vector-field CSV onto a gradient.
    Project(ProjectArgs),
    /// Write the quadrature reference free energy and mean force of a toy.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed replacing the configured one.
    #[arg(long)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Biasing mode replacing the configured one.
    #[arg(long)]
    pub mode: Option<BiasMode>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Modes to compare (repeatable); defaults to abf and pabf.
    #[arg(long = "mode")]
    pub modes: Vec<BiasMode>,
    /// Realizations per mode; realization k uses seed + k.
    #[arg(long, default_value_t = 20)]
    pub realizations: usize,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Vector-field CSV to project.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving free_energy.csv and projected_force.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Weight the projection by the sample counts in the file.
    #[arg(long)]
    pub weighted: bool,
    /// Floor of the count-based weight density.
    #[arg(long, default_value_t = 1e-6)]
    pub weight_floor: f64,
    /// Linear solver.
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    pub solver: SolverArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverArg {
    Auto,
    Direct,
    Cg,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Auto => SolverKind::Auto,
            SolverArg::Direct => SolverKind::Direct,
            SolverArg::Cg => SolverKind::Cg,
        }
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
}

impl clap::ValueEnum for BiasMode {
    fn value_variants<'a>() -> &'a [Self] {
        &[BiasMode::None, BiasMode::Abf, BiasMode::Pabf]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            BiasMode::None => "none",
            BiasMode::Abf => "abf",
            BiasMode::Pabf => "pabf",
        }))
    }
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut config = RunConfig::from_file(&common.config)?;
    if let Some(seed) = common.seed_override {
        config.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| config.output.directory.clone());
    config.output.directory = out.clone();
    Ok((config, out))
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Project(args) => cmd_project(&args),
        Command::Oracle(args) => cmd_oracle(&args),
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let (mut config, out) = load(&args.common)?;
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    let summary = run::execute(&config, &out)?;
    println!(
        "{} run: {} steps, t = {}, {:.2} s wall",
        config.mode, summary.steps, summary.time, summary.wall_seconds
    );
    if let (Some(ef), Some(eg)) = (summary.final_row.error_force, summary.final_row.error_gradient) {
        println!("final relative error: mean force {ef:.4}, projected gradient {eg:.4}");
    }
    if config.trimer.is_some() {
        let [a, b] = summary.final_row.transitions;
        println!("transitions per replica: bond 01 {a:.3}, bond 12 {b:.3}");
    }
    println!("outputs in {}", out.display());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let (config, out) = load(&args.common)?;
    let modes = if args.modes.is_empty() {
        vec![BiasMode::Abf, BiasMode::Pabf]
    } else {
        args.modes.clone()
    };
    let table = run::compare(&config, &modes, args.realizations)
        .map_err(|e| e.context("comparison aborted; no table was written"))?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("config.toml"), config.to_toml_string())?;
    let path = out.join("compare.csv");
    std::fs::write(&path, table.to_csv())?;
    println!(
        "{} realizations x {} modes, {} diagnostics times -> {}",
        args.realizations,
        modes.len(),
        table.times.len(),
        path.display()
    );
    Ok(())
}

fn cmd_project(args: &ProjectArgs) -> Result<()> {
    let field = io::read_vector_field(&args.input)?;
    let grid = *field.grid();
    let options = ProjectionOptions {
        solver: args.solver.into(),
        ..ProjectionOptions::default()
    };
    let projector = Projector::new(grid, options)?;
    let phi = if args.weighted {
        let counts = field
            .counts()
            .ok_or_else(|| Error::domain("--weighted needs a count column in the input"))?;
        Some(WeightField::from_occupancy(grid, counts, args.weight_floor)?)
    } else {
        None
    };
    let projection = match &phi {
        Some(w) => projector.project_weighted(&field, w, None)?,
        None => projector.project(&field)?,
    };
    std::fs::create_dir_all(&args.out)?;
    io::write_scalar_field(&args.out.join("free_energy.csv"), &projection.potential)?;
    io::write_vector_field(
        &args.out.join("projected_force.csv"),
        &helmholtz::gradient_at_bins(&projection.potential),
    )?;
    let d = helmholtz::decomposition(&QuadratureField::from(&field), &projection.potential, phi.as_ref())?;
    println!("relative residual {:e} ({} iterations)", projection.residual, projection.iterations);
    println!(
        "|F|^2 = {:e}  |grad A|^2 = {:e}  |F - grad A|^2 = {:e}  defect {:e}",
        d.field,
        d.gradient,
        d.remainder,
        d.pythagoras_defect()
    );
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let (config, out) = load(&args.common)?;
    let Model::Toy(toy) = config.model()? else {
        return Err(Error::config(
            "no quadrature reference exists for the trimer; pass a reference field file instead",
        ));
    };
    let grid = config.grid()?;
    let q = config.diagnostics.quadrature_points;
    let beta = config.physics.beta;
    let a = oracle::reference_free_energy(&toy, &grid, beta, q)?;
    let f = oracle::reference_mean_force(&toy, &grid, beta, q)?;
    std::fs::create_dir_all(&out)?;
    io::write_scalar_field(&out.join("reference_free_energy.csv"), &a)?;
    io::write_vector_field(&out.join("reference_mean_force.csv"), &f)?;
    println!("reference written to {}", out.display());
    Ok(())
}
