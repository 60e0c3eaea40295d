//! C interface to the `pabf` engine.
//!
//! Every function returns a [`PabfStatus`]. On failure a description is kept
//! per thread and can be read with [`pabf_last_error_message`]. Simulations
//! are opaque handles created by [`pabf_simulation_new`] and released with
//! [`pabf_simulation_free`]. Field buffers are caller-allocated; vector
//! fields are interleaved `(F1, F2)` per bin, bins ordered with the first
//! coordinate fastest, nodal fields likewise.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pabf::config::RunConfig;
use pabf::helmholtz::{self, ProjectionOptions, Projector};
use pabf::{Error, Grid2, Simulation, VectorField2, WeightField};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PabfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Config = 4,
    Domain = 5,
    Unstable = 6,
    Solver = 7,
    Io = 8,
    Panic = 9,
}

/// Reaction-coordinate grid: `n_bins` bins per axis on
/// `[xi_min, xi_max)^2`; `periodic` is 0 or 1.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PabfGrid {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_bins: usize,
    pub periodic: u8,
}

/// Opaque simulation handle.
pub struct PabfSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PabfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn status_of(e: &Error) -> PabfStatus {
    match e {
        Error::Run { source, .. } => status_of(source),
        Error::Config(_) | Error::Parse { .. } => PabfStatus::Config,
        Error::UnstableStep { .. } | Error::CoincidentParticles { .. } | Error::DegenerateCoordinate { .. } => {
            PabfStatus::Unstable
        }
        Error::Solver { .. } | Error::Singular(_) => PabfStatus::Solver,
        Error::Io(_) => PabfStatus::Io,
        Error::Domain(_) | Error::GridMismatch(_) => PabfStatus::Domain,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PabfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PabfStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {message}"));
            PabfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PabfStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn sim_ref<'a>(sim: *const PabfSimulation) -> Result<&'a Simulation, Failure> {
    sim.as_ref().map(|s| &s.inner).ok_or_else(|| null("sim"))
}

unsafe fn out_slice<'a, T>(buf: *mut T, len: usize, needed: usize) -> Result<&'a mut [T], Failure> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < needed {
        return Err(Failure(
            PabfStatus::BufferTooSmall,
            format!("buffer holds {len} values, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(buf, needed))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

fn to_grid(g: &PabfGrid) -> Result<Grid2, Failure> {
    if g.periodic > 1 {
        return Err(Failure(PabfStatus::InvalidArgument, "`periodic` must be 0 or 1".into()));
    }
    Ok(Grid2::new(g.xi_min, g.xi_max, g.n_bins, g.periodic == 1)?)
}

fn from_grid(g: &Grid2) -> PabfGrid {
    PabfGrid {
        xi_min: g.xi_min(),
        xi_max: g.xi_max(),
        n_bins: g.n_bins(),
        periodic: g.is_periodic() as u8,
    }
}

fn write_vector(field: &VectorField2, out: &mut [f64]) {
    for (dst, v) in out.chunks_exact_mut(2).zip(field.values()) {
        dst.copy_from_slice(v);
    }
}

/// Description of the last failure on this thread, or null after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn pabf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code; unknown codes get a generic name.
#[no_mangle]
pub extern "C" fn pabf_status_name(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"buffer too small",
        4 => c"invalid configuration",
        5 => c"domain error",
        6 => c"unstable or degenerate configuration",
        7 => c"linear solver failure",
        8 => c"i/o error",
        9 => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Number of bins and of nodes of a grid.
///
/// # Safety
/// `n_cells` and `n_nodes` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pabf_grid_sizes(grid: PabfGrid, n_cells: *mut usize, n_nodes: *mut usize) -> PabfStatus {
    guard(|| {
        let g = to_grid(&grid)?;
        write_out(n_cells, g.n_cells())?;
        write_out(n_nodes, g.n_nodes())
    })
}

/// Creates a simulation from a TOML run configuration.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_new(config_toml: *const c_char, out: *mut *mut PabfSimulation) -> PabfStatus {
    guard(|| {
        if config_toml.is_null() {
            return Err(null("config_toml"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(config_toml)
            .to_str()
            .map_err(|_| Failure(PabfStatus::InvalidArgument, "configuration is not UTF-8".into()))?;
        let inner = Simulation::new(RunConfig::from_toml_str(text)?)?;
        out.write(Box::into_raw(Box::new(PabfSimulation { inner })));
        Ok(())
    })
}

/// Releases a simulation; null is ignored.
///
/// # Safety
/// `sim` must come from [`pabf_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_free(sim: *mut PabfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances all replicas by `steps` time steps.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_advance(sim: *mut PabfSimulation, steps: u64) -> PabfStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        Ok(s.inner.advance(steps)?)
    })
}

/// Steps taken so far, current time, and the configured number of steps.
///
/// # Safety
/// `sim` must be a live handle; the outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_progress(
    sim: *const PabfSimulation,
    steps: *mut u64,
    time: *mut f64,
    total_steps: *mut u64,
) -> PabfStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        write_out(steps, s.steps())?;
        write_out(time, s.time())?;
        write_out(total_steps, s.config().total_steps())
    })
}

/// Grid of the simulation.
///
/// # Safety
/// `sim` must be a live handle and `grid` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_grid(sim: *const PabfSimulation, grid: *mut PabfGrid) -> PabfStatus {
    guard(|| write_out(grid, from_grid(sim_ref(sim)?.grid())))
}

/// Binned mean force estimate, `2 * n_cells` values.
///
/// # Safety
/// `sim` must be a live handle and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_mean_force(sim: *const PabfSimulation, out: *mut f64, len: usize) -> PabfStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let f = s.mean_force()?;
        write_vector(&f, out_slice(out, len, 2 * s.grid().n_cells())?);
        Ok(())
    })
}

/// Samples deposited per bin, `n_cells` values.
///
/// # Safety
/// `sim` must be a live handle and `out` hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_counts(sim: *const PabfSimulation, out: *mut u64, len: usize) -> PabfStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let counts = s.accumulator().counts();
        out_slice(out, len, counts.len())?.copy_from_slice(counts);
        Ok(())
    })
}

/// Projects the current mean force estimate (with the configured weighting)
/// and writes the gradient at the bin centers (`2 * n_cells` values) and
/// the nodal free energy (`n_nodes` values). Either output may be null.
///
/// # Safety
/// `sim` must be a live handle; non-null outputs must hold their lengths.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_projection(
    sim: *const PabfSimulation,
    gradient: *mut f64,
    gradient_len: usize,
    free_energy: *mut f64,
    free_energy_len: usize,
) -> PabfStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let p = s.projection()?;
        if !gradient.is_null() {
            let g = helmholtz::gradient_at_bins(&p.potential);
            write_vector(&g, out_slice(gradient, gradient_len, 2 * s.grid().n_cells())?);
        }
        if !free_energy.is_null() {
            let v = p.potential.values();
            out_slice(free_energy, free_energy_len, v.len())?.copy_from_slice(v);
        }
        Ok(())
    })
}

/// Mean transitions per replica of the two trimer bonds (zeros for toys).
///
/// # Safety
/// `sim` must be a live handle and `out` hold two doubles.
#[no_mangle]
pub unsafe extern "C" fn pabf_simulation_transitions(sim: *const PabfSimulation, out: *mut f64) -> PabfStatus {
    guard(|| {
        let t = sim_ref(sim)?.mean_transitions();
        out_slice(out, 2, 2)?.copy_from_slice(&t);
        Ok(())
    })
}

/// Projects a binned vector field (`2 * n_cells` values) onto a gradient:
/// natural boundary conditions on a bounded grid, periodic otherwise. With
/// non-null `weights` (`n_cells` positive values, normalized internally) the
/// weighted problem is solved. Writes the zero-mean nodal potential
/// (`n_nodes` values) and, if `residual` is non-null, the relative residual.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `weights` and `residual`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn pabf_project(
    grid: PabfGrid,
    field: *const f64,
    field_len: usize,
    weights: *const f64,
    potential: *mut f64,
    potential_len: usize,
    residual: *mut f64,
) -> PabfStatus {
    guard(|| {
        let g = to_grid(&grid)?;
        if field.is_null() {
            return Err(null("field"));
        }
        if field_len != 2 * g.n_cells() {
            return Err(Failure(
                PabfStatus::InvalidArgument,
                format!("field has {field_len} values, grid needs {}", 2 * g.n_cells()),
            ));
        }
        let values = std::slice::from_raw_parts(field, field_len)
            .chunks_exact(2)
            .map(|c| [c[0], c[1]])
            .collect();
        let f = VectorField2::new(g, values)?;
        let projector = Projector::new(g, ProjectionOptions::default())?;
        let p = if weights.is_null() {
            projector.project(&f)?
        } else {
            let w = std::slice::from_raw_parts(weights, g.n_cells()).to_vec();
            projector.project_weighted(&f, &WeightField::new(g, w)?, None)?
        };
        let v = p.potential.values();
        out_slice(potential, potential_len, v.len())?.copy_from_slice(v);
        if !residual.is_null() {
            residual.write(p.residual);
        }
        Ok(())
    })
}
