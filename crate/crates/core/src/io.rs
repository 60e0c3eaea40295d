//! CSV files.
//!
//! Field files start with a comment line declaring the grid,
//!
//! ```text
//! # grid xi_min=-0.2 xi_max=1.2 n_bins=50 periodic=false
//! ```
//!
//! followed by a header and one row per bin (vector fields:
//! `i,j,z1,z2,count,F1,F2`) or per node (scalar fields: `i,j,x,y,A`). The
//! `count` column is empty when the field carries no sample counts. Numbers
//! use the shortest representation that round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField2};
use crate::grid::Grid2;

pub const VECTOR_FIELD_HEADER: &str = "i,j,z1,z2,count,F1,F2";
pub const SCALAR_FIELD_HEADER: &str = "i,j,x,y,A";
pub const DIAGNOSTICS_HEADER: &str =
    "time,steps,visited_bins,error_force,error_gradient,marginal_distance_1,marginal_distance_2,transitions_01,transitions_12";
pub const DISTANCES_HEADER: &str = "time,d01,d12";

fn grid_line(grid: &Grid2) -> String {
    format!(
        "# grid xi_min={} xi_max={} n_bins={} periodic={}",
        grid.xi_min(),
        grid.xi_max(),
        grid.n_bins(),
        grid.is_periodic()
    )
}

pub fn format_vector_field(field: &VectorField2) -> String {
    let grid = field.grid();
    let mut out = String::with_capacity(64 * grid.n_cells());
    writeln!(out, "{}", grid_line(grid)).unwrap();
    writeln!(out, "{VECTOR_FIELD_HEADER}").unwrap();
    for (cell, v) in field.values().iter().enumerate() {
        let (i, j) = grid.cell_coords(cell);
        let c = grid.bin_center(i, j);
        let count = field.counts().map(|c| c[cell].to_string()).unwrap_or_default();
        writeln!(out, "{i},{j},{},{},{count},{},{}", c[0], c[1], v[0], v[1]).unwrap();
    }
    out
}

pub fn format_scalar_field(field: &ScalarField) -> String {
    let grid = field.grid();
    let mut out = String::with_capacity(48 * grid.n_nodes());
    writeln!(out, "{}", grid_line(grid)).unwrap();
    writeln!(out, "{SCALAR_FIELD_HEADER}").unwrap();
    for (node, a) in field.values().iter().enumerate() {
        let (i, j) = grid.node_coords(node);
        let p = grid.node_position(i, j);
        writeln!(out, "{i},{j},{},{},{a}", p[0], p[1]).unwrap();
    }
    out
}

pub fn write_vector_field(path: &Path, field: &VectorField2) -> Result<()> {
    fs::write(path, format_vector_field(field))?;
    Ok(())
}

pub fn write_scalar_field(path: &Path, field: &ScalarField) -> Result<()> {
    fs::write(path, format_scalar_field(field))?;
    Ok(())
}

struct Parser<'a> {
    path: &'a Path,
}

impl Parser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn grid(&self, line: Option<&str>) -> Result<Grid2> {
        let line = line.ok_or_else(|| self.err(1, "empty file"))?;
        let rest = line
            .strip_prefix("# grid")
            .ok_or_else(|| self.err(1, "expected a `# grid ...` declaration"))?;
        let (mut lo, mut hi, mut n, mut periodic) = (None, None, None, None);
        for item in rest.split_whitespace() {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| self.err(1, format!("malformed grid entry `{item}`")))?;
            let bad = || self.err(1, format!("invalid value for `{key}`: `{value}`"));
            match key {
                "xi_min" => lo = Some(value.parse::<f64>().map_err(|_| bad())?),
                "xi_max" => hi = Some(value.parse::<f64>().map_err(|_| bad())?),
                "n_bins" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
                "periodic" => periodic = Some(value.parse::<bool>().map_err(|_| bad())?),
                _ => return Err(self.err(1, format!("unknown grid key `{key}`"))),
            }
        }
        match (lo, hi, n, periodic) {
            (Some(lo), Some(hi), Some(n), Some(p)) => {
                Grid2::new(lo, hi, n, p).map_err(|e| self.err(1, e.to_string()))
            }
            _ => Err(self.err(1, "grid declaration needs xi_min, xi_max, n_bins and periodic")),
        }
    }

    fn header(&self, line: Option<&str>, expected: &str) -> Result<()> {
        match line {
            Some(h) if h.trim() == expected => Ok(()),
            Some(h) => Err(self.err(2, format!("expected header `{expected}`, found `{h}`"))),
            None => Err(self.err(2, "missing header")),
        }
    }

    fn number<T: std::str::FromStr>(&self, line: usize, name: &str, text: &str) -> Result<T> {
        text.trim()
            .parse::<T>()
            .map_err(|_| self.err(line, format!("invalid {name} `{text}`")))
    }
}

pub fn parse_vector_field(path: &Path, text: &str) -> Result<VectorField2> {
    let p = Parser { path };
    let mut lines = text.lines();
    let grid = p.grid(lines.next())?;
    p.header(lines.next(), VECTOR_FIELD_HEADER)?;
    let n = grid.n_bins();
    let mut values = vec![[0.0; 2]; grid.n_cells()];
    let mut counts = vec![0u64; grid.n_cells()];
    let mut seen = vec![false; grid.n_cells()];
    let mut with_counts = None;
    for (k, line) in lines.enumerate() {
        let lineno = k + 3;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(p.err(lineno, format!("expected 7 columns, found {}", cols.len())));
        }
        let i: usize = p.number(lineno, "bin index", cols[0])?;
        let j: usize = p.number(lineno, "bin index", cols[1])?;
        if i >= n || j >= n {
            return Err(p.err(lineno, format!("bin ({i}, {j}) is outside the {n}x{n} grid")));
        }
        let cell = grid.cell(i, j);
        if seen[cell] {
            return Err(p.err(lineno, format!("bin ({i}, {j}) appears twice")));
        }
        seen[cell] = true;
        let has_count = !cols[4].trim().is_empty();
        if *with_counts.get_or_insert(has_count) != has_count {
            return Err(p.err(lineno, "the count column must be filled on every row or on none"));
        }
        if has_count {
            counts[cell] = p.number(lineno, "count", cols[4])?;
        }
        let f1: f64 = p.number(lineno, "F1", cols[5])?;
        let f2: f64 = p.number(lineno, "F2", cols[6])?;
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(p.err(lineno, "non-finite field value"));
        }
        values[cell] = [f1, f2];
    }
    if let Some(cell) = seen.iter().position(|s| !s) {
        let (i, j) = grid.cell_coords(cell);
        return Err(p.err(text.lines().count() + 1, format!("bin ({i}, {j}) is missing")));
    }
    let field = VectorField2::new(grid, values)?;
    if with_counts == Some(true) {
        field.with_counts(counts)
    } else {
        Ok(field)
    }
}

pub fn parse_scalar_field(path: &Path, text: &str) -> Result<ScalarField> {
    let p = Parser { path };
    let mut lines = text.lines();
    let grid = p.grid(lines.next())?;
    p.header(lines.next(), SCALAR_FIELD_HEADER)?;
    let m = grid.nodes_per_axis();
    let mut values = vec![0.0; grid.n_nodes()];
    let mut seen = vec![false; grid.n_nodes()];
    for (k, line) in lines.enumerate() {
        let lineno = k + 3;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(p.err(lineno, format!("expected 5 columns, found {}", cols.len())));
        }
        let i: usize = p.number(lineno, "node index", cols[0])?;
        let j: usize = p.number(lineno, "node index", cols[1])?;
        if i >= m || j >= m {
            return Err(p.err(lineno, format!("node ({i}, {j}) is outside the grid")));
        }
        let node = grid.node(i, j);
        if seen[node] {
            return Err(p.err(lineno, format!("node ({i}, {j}) appears twice")));
        }
        seen[node] = true;
        values[node] = p.number(lineno, "A", cols[4])?;
    }
    if let Some(node) = seen.iter().position(|s| !s) {
        let (i, j) = grid.node_coords(node);
        return Err(p.err(text.lines().count() + 1, format!("node ({i}, {j}) is missing")));
    }
    ScalarField::new(grid, values)
}

pub fn read_vector_field(path: &Path) -> Result<VectorField2> {
    let text = fs::read_to_string(path)?;
    parse_vector_field(path, &text)
}

pub fn read_scalar_field(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path)?;
    parse_scalar_field(path, &text)
}

/// One line of a run's diagnostics file.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub steps: u64,
    pub visited_bins: usize,
    /// Relative error of the binned mean force against the reference.
    pub error_force: Option<f64>,
    /// Relative error of the projected gradient against the reference.
    pub error_gradient: Option<f64>,
    /// Sup distance of the occupancy marginals to the uniform distribution.
    pub marginal_distance: [f64; 2],
    /// Mean transitions per replica of the two trimer bonds.
    pub transitions: [f64; 2],
}

impl DiagnosticsRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.time,
            self.steps,
            self.visited_bins,
            opt(self.error_force),
            opt(self.error_gradient),
            self.marginal_distance[0],
            self.marginal_distance[1],
            self.transitions[0],
            self.transitions[1]
        )
    }
}

/// Line-oriented CSV writer that emits its header on creation.
pub struct CsvWriter {
    inner: std::io::BufWriter<fs::File>,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> Result<Self> {
        let mut inner = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(inner, "{header}")?;
        Ok(CsvWriter { inner })
    }

    pub fn row(&mut self, line: &str) -> Result<()> {
        writeln!(self.inner, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Both occupancy marginals, one row per bin.
pub fn format_marginals(grid: &Grid2, marginals: &[Vec<f64>; 2]) -> String {
    let mut out = String::from("bin,center,p1,p2\n");
    for k in 0..grid.n_bins() {
        let c = grid.bin_center(k, k)[0];
        writeln!(out, "{k},{c},{},{}", marginals[0][k], marginals[1][k]).unwrap();
    }
    out
}
