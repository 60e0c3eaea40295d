use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pabf::field::VectorField2;
use pabf::grid::Grid2;
use pabf::io;

fn pabf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pabf")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SHORT_TOY: &str = "system = \"toy_b\"\nmode = \"pabf\"\n[physics]\nreplicas = 4\ntotal_time = 0.02\n[grid]\nn_bins = 8\n[diagnostics]\ninterval = 0.01\n";

#[test]
fn zero_length_run_writes_one_row_and_initial_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "system = \"toy_a\"\n[physics]\ntotal_time = 0.0\nreplicas = 3\n[grid]\nn_bins = 8\n",
    );
    let out = dir.path().join("out");
    let o = pabf(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let lines: Vec<&str> = diag.lines().collect();
    assert_eq!(lines[0], io::DIAGNOSTICS_HEADER);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,0,"));

    let f = io::read_vector_field(&out.join("mean_force.csv")).unwrap();
    assert_eq!(f.counts().unwrap().iter().sum::<u64>(), 0);
    assert_eq!(f.sum_squares(), 0.0);
    let a = io::read_scalar_field(&out.join("free_energy.csv")).unwrap();
    assert!(a.values().iter().all(|v| *v == 0.0));
    assert!(!out.join("distances.csv").exists());

    let echoed = pabf::config::RunConfig::from_file(&out.join("config.toml")).unwrap();
    assert_eq!(echoed.physics.replicas, 3);
    assert_eq!(echoed.physics.total_time, 0.0);
}

#[test]
fn run_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SHORT_TOY);
    let out = dir.path().join("out");
    let o = pabf(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--seed-override",
        "77",
        "--mode",
        "abf",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let echoed = pabf::config::RunConfig::from_file(&out.join("config.toml")).unwrap();
    assert_eq!(echoed.seed, 77);
    assert_eq!(echoed.mode, pabf::BiasMode::Abf);
    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 1 + 3);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "system = \"toy_a\"\n[physics]\nreplica = 3\n");
    let o = pabf(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("replica"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn invalid_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "system = \"toy_a\"\n[physics]\ndt = -1.0\n",
        "system = \"trimer\"\n[grid]\nperiodic = true\n",
        "system = \"toy_a\"\n[projection]\nstride = 0\n",
    ] {
        let cfg = write(dir.path(), "bad.toml", body);
        let o = pabf(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
        assert!(!o.status.success(), "{body}");
        assert!(stderr(&o).starts_with("error:"));
    }
}

fn sample_field() -> VectorField2 {
    let grid = Grid2::bounded(-0.2, 1.2, 6).unwrap();
    let mut k = 0u64;
    let f = VectorField2::from_fn(grid, |[x, y]| [(3.0 * x).sin() + y * y, 0.1 / 3.0 + x * y]);
    let counts = (0..grid.n_cells())
        .map(|_| {
            k += 7;
            k % 5
        })
        .collect();
    f.with_counts(counts).unwrap()
}

#[test]
fn project_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    io::write_vector_field(&input, &sample_field()).unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["project", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = pabf(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a", &[]);
    let a = io::read_scalar_field(&a.join("free_energy.csv")).unwrap();
    let expected = pabf::helmholtz::project_neumann(&sample_field(), Default::default()).unwrap();
    assert_eq!(a, expected);

    // Written fields read back to identical values.
    let text = io::format_scalar_field(&a);
    assert_eq!(io::parse_scalar_field(Path::new("x"), &text).unwrap(), a);
    let f = sample_field();
    assert_eq!(io::parse_vector_field(Path::new("x"), &io::format_vector_field(&f)).unwrap(), f);

    let w = run("w", &["--weighted", "--solver", "cg"]);
    assert!(w.join("projected_force.csv").exists());
}

#[test]
fn empty_and_malformed_inputs_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let empty = write(dir.path(), "empty.csv", "");
    let o = pabf(&["project", "--input", &empty, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty.csv:1:"), "{}", stderr(&o));

    let mut text = io::format_vector_field(&sample_field());
    text = text.replacen("\n0,0,", "\n0,0,oops,", 1);
    let bad = write(dir.path(), "bad.csv", &text);
    let o = pabf(&["project", "--input", &bad, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bad.csv:3:"), "{}", stderr(&o));
}

#[test]
fn compare_writes_one_column_group_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SHORT_TOY);
    let out = dir.path().join("cmp");
    let o = pabf(&[
        "compare",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--realizations",
        "3",
        "--mode",
        "abf",
        "--mode",
        "pabf",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("compare.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,abf_var_F,abf_var_gradA,abf_error_F,abf_error_gradA,pabf_var_F,pabf_var_gradA,pabf_error_F,pabf_error_gradA"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 9));

    let o = pabf(&["compare", "--config", &cfg, "--out", out.to_str().unwrap(), "--realizations", "1"]);
    assert!(!o.status.success());
}

#[test]
fn oracle_writes_reference_fields_for_toys_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", SHORT_TOY);
    let out = dir.path().join("ref");
    let o = pabf(&["oracle", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let f = io::read_vector_field(&out.join("reference_mean_force.csv")).unwrap();
    assert_eq!(f.grid().n_bins(), 8);

    let trimer = write(dir.path(), "tr.toml", "system = \"trimer\"\n");
    let o = pabf(&["oracle", "--config", &trimer, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
}
