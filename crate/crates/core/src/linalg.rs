//! Sparse symmetric linear algebra for the projection solvers: CSR storage,
//! a banded Cholesky factorization and a preconditioned conjugate gradient
//! that can work on the complement of the constant vector.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            debug_assert!(i < n && j < n);
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// Adds `v` to the stored diagonal entry `(i, i)`.
    pub fn add_to_diagonal(&mut self, i: usize, v: f64) -> Result<()> {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].iter().position(|&c| c == i) {
            Some(k) => {
                self.vals[range.start + k] += v;
                Ok(())
            }
            None => Err(Error::Singular(format!("row {i} has no diagonal entry"))),
        }
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

pub fn remove_mean(a: &mut [f64]) {
    let m = mean(a);
    a.iter_mut().for_each(|x| *x -= m);
}

/// Cholesky factor `L` of a symmetric positive definite banded matrix,
/// stored row by row over the band `[i - bw, i]`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let mut f = BandedCholesky {
            n,
            bw,
            l: vec![0.0; n * (bw + 1)],
        };
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    let k = f.idx(i, j);
                    f.l[k] = v;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let kmin = lo.max(j.saturating_sub(bw));
                let mut s = f.l[f.idx(i, j)];
                let ri = f.idx(i, kmin);
                let rj = f.idx(j, kmin);
                let len = j - kmin;
                s -= dot(&f.l[ri..ri + len], &f.l[rj..rj + len]);
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Singular(format!(
                            "non-positive pivot {s:e} at row {i} of the banded factorization"
                        )));
                    }
                    let k = f.idx(i, i);
                    f.l[k] = s.sqrt();
                } else {
                    let k = f.idx(i, j);
                    f.l[k] = s / f.l[f.idx(j, j)];
                }
            }
        }
        Ok(f)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let bw = self.bw;
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let r = self.idx(i, lo);
            let s = dot(&self.l[r..r + (i - lo)], &y[lo..i]);
            y[i] = (y[i] - s) / self.l[self.idx(i, i)];
        }
        for i in (0..n).rev() {
            y[i] /= self.l[self.idx(i, i)];
            let yi = y[i];
            let lo = i.saturating_sub(bw);
            for k in lo..i {
                y[k] -= self.l[self.idx(i, k)] * yi;
            }
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Restrict iterates to zero-mean vectors (for matrices whose kernel is
    /// the constant vector).
    pub zero_mean: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradient for `A x = b`, starting from the
/// contents of `x`. The returned residual is relative to `|b|`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], x: &mut [f64], options: CgOptions) -> Result<CgReport> {
    let n = a.dim();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport {
            iterations: 0,
            residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    if options.zero_mean {
        remove_mean(x);
    }
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let precondition = |r: &[f64], z: &mut [f64]| {
        z.iter_mut().zip(r).zip(&inv_diag).for_each(|((z, r), d)| *z = r * d);
        if options.zero_mean {
            remove_mean(z);
        }
    };
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = norm(&r) / b_norm;
    for it in 0..options.max_iterations {
        if residual <= options.tolerance {
            return Ok(CgReport {
                iterations: it,
                residual,
            });
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                iterations: it,
                residual,
            });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        residual = norm(&r) / b_norm;
    }
    if residual <= options.tolerance {
        Ok(CgReport {
            iterations: options.max_iterations,
            residual,
        })
    } else {
        Err(Error::Solver {
            iterations: options.max_iterations,
            residual,
        })
    }
}
