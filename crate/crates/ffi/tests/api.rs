use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use pabf_ffi::*;

const TOY: &str = "system = \"toy_b\"\nmode = \"pabf\"\nseed = 3\n[physics]\nreplicas = 4\ntotal_time = 0.1\n[grid]\nn_bins = 8\n";

fn last_error() -> String {
    let p = pabf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_sim(text: &str) -> Result<*mut PabfSimulation, PabfStatus> {
    let c = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    match unsafe { pabf_simulation_new(c.as_ptr(), &mut sim) } {
        PabfStatus::Ok => Ok(sim),
        s => Err(s),
    }
}

#[test]
fn simulation_lifecycle_matches_the_rust_api() {
    let sim = new_sim(TOY).unwrap();
    assert!(pabf_last_error_message().is_null());
    let mut grid = PabfGrid {
        xi_min: 0.0,
        xi_max: 0.0,
        n_bins: 0,
        periodic: 0,
    };
    unsafe {
        assert_eq!(pabf_simulation_grid(sim, &mut grid), PabfStatus::Ok);
        assert_eq!((grid.n_bins, grid.periodic), (8, 1));
        assert_eq!(pabf_simulation_advance(sim, 40), PabfStatus::Ok);

        let (mut steps, mut time, mut total) = (0u64, 0.0, 0u64);
        assert_eq!(pabf_simulation_progress(sim, &mut steps, &mut time, &mut total), PabfStatus::Ok);
        assert_eq!((steps, total), (40, 100));
        assert!((time - 0.04).abs() < 1e-12);

        let mut force = vec![0.0; 128];
        assert_eq!(pabf_simulation_mean_force(sim, force.as_mut_ptr(), force.len()), PabfStatus::Ok);
        let mut counts = vec![0u64; 64];
        assert_eq!(pabf_simulation_counts(sim, counts.as_mut_ptr(), counts.len()), PabfStatus::Ok);
        assert_eq!(counts.iter().sum::<u64>(), 160);

        let mut gradient = vec![0.0; 128];
        let mut energy = vec![0.0; 64];
        assert_eq!(
            pabf_simulation_projection(sim, gradient.as_mut_ptr(), 128, energy.as_mut_ptr(), 64),
            PabfStatus::Ok
        );
        assert!(energy.iter().sum::<f64>().abs() < 1e-10);

        let mut reference = pabf::Simulation::new(pabf::config::RunConfig::from_toml_str(TOY).unwrap()).unwrap();
        reference.advance(40).unwrap();
        let f = reference.mean_force().unwrap();
        let flat: Vec<f64> = f.values().iter().flatten().copied().collect();
        assert_eq!(force, flat);

        let mut t = [1.0; 2];
        assert_eq!(pabf_simulation_transitions(sim, t.as_mut_ptr()), PabfStatus::Ok);
        assert_eq!(t, [0.0, 0.0]);
        pabf_simulation_free(sim);
        pabf_simulation_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    assert_eq!(new_sim("system = \"toy_b\"\nbogus = 1\n").unwrap_err(), PabfStatus::Config);
    assert!(last_error().contains("bogus"));

    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { pabf_simulation_new(ptr::null(), &mut sim) }, PabfStatus::NullPointer);
    assert_eq!(unsafe { pabf_simulation_advance(ptr::null_mut(), 1) }, PabfStatus::NullPointer);

    let sim = new_sim(TOY).unwrap();
    let mut small = [0.0; 3];
    let s = unsafe { pabf_simulation_mean_force(sim, small.as_mut_ptr(), small.len()) };
    assert_eq!(s, PabfStatus::BufferTooSmall);
    assert!(last_error().contains("128"));
    unsafe { pabf_simulation_free(sim) };

    let name = unsafe { CStr::from_ptr(pabf_status_name(PabfStatus::Solver as i32)) };
    assert_eq!(name.to_str().unwrap(), "linear solver failure");
    let unknown = unsafe { CStr::from_ptr(pabf_status_name(77)) };
    assert_eq!(unknown.to_str().unwrap(), "unknown status");
}

#[test]
fn projection_recovers_a_discrete_gradient() {
    let grid = PabfGrid {
        xi_min: -0.2,
        xi_max: 1.2,
        n_bins: 10,
        periodic: 0,
    };
    let (mut cells, mut nodes) = (0usize, 0usize);
    assert_eq!(unsafe { pabf_grid_sizes(grid, &mut cells, &mut nodes) }, PabfStatus::Ok);
    assert_eq!((cells, nodes), (100, 121));

    // A constant field is the gradient of a linear potential.
    let field: Vec<f64> = (0..cells).flat_map(|_| [0.5, -2.0]).collect();
    let mut potential = vec![0.0; nodes];
    let mut residual = 1.0;
    let s = unsafe {
        pabf_project(grid, field.as_ptr(), field.len(), ptr::null(), potential.as_mut_ptr(), nodes, &mut residual)
    };
    assert_eq!(s, PabfStatus::Ok);
    assert!(residual < 1e-10);
    let h = 1.4 / 10.0;
    for j in 0..11 {
        for i in 0..10 {
            let d = potential[j * 11 + i + 1] - potential[j * 11 + i];
            assert!((d / h - 0.5).abs() < 1e-9);
        }
    }

    let weights = vec![1.0; cells];
    let mut weighted = vec![0.0; nodes];
    let s = unsafe {
        pabf_project(grid, field.as_ptr(), field.len(), weights.as_ptr(), weighted.as_mut_ptr(), nodes, ptr::null_mut())
    };
    assert_eq!(s, PabfStatus::Ok);
    for (a, b) in potential.iter().zip(&weighted) {
        assert!((a - b).abs() < 1e-10);
    }

    let bad = PabfGrid { n_bins: 0, ..grid };
    let s = unsafe { pabf_project(bad, field.as_ptr(), field.len(), ptr::null(), potential.as_mut_ptr(), nodes, ptr::null_mut()) };
    assert_eq!(s, PabfStatus::Domain);
    let s = unsafe { pabf_project(grid, field.as_ptr(), 7, ptr::null(), potential.as_mut_ptr(), nodes, ptr::null_mut()) };
    assert_eq!(s, PabfStatus::InvalidArgument);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/pabf.h");
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
