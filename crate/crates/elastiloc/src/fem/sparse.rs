//! Compressed sparse row matrix and a Jacobi-preconditioned conjugate
//! gradient solver for the symmetric positive definite systems produced by
//! the assembly.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed in
    /// their sorted order, so identical inputs give identical matrices.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> CsrMatrix {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col_idx[lo..hi].binary_search(&(c as u32)) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *yi = acc;
        }
    }

    /// Row iteration (column index, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Largest |A - A^T| entry, for symmetry checks.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn values_mut(&mut self) -> (&[usize], &[u32], &mut [f64]) {
        (&self.row_ptr, &self.col_idx, &mut self.values)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, starting from x0.
///
/// Convergence is accepted only on the explicitly recomputed true residual
/// ||b - A x|| <= rel_tol ||b||. The recurrence residual can drift a hair
/// past the true one near the tolerance, so whenever the recurrence stops
/// early the iteration restarts from the current iterate until the budget
/// is spent.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgReport)> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    let n = a.dim();
    let b_norm = norm(b);
    let mut x = x0.to_vec();
    if b_norm == 0.0 {
        return Ok((
            x,
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }

    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| 1.0 / d).collect();
    let threshold = rel_tol * b_norm;
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut total_iterations = 0;

    loop {
        // True residual; the only accepted convergence measure.
        a.matvec(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let true_norm = norm(&r);
        if true_norm <= threshold {
            return Ok((
                x,
                CgReport {
                    iterations: total_iterations,
                    relative_residual: true_norm / b_norm,
                },
            ));
        }
        if total_iterations >= max_iter {
            return Err(Error::SolverFailure {
                iterations: total_iterations,
                residual: true_norm / b_norm,
                tolerance: rel_tol,
            });
        }

        // Recurrence sweep from the current iterate.
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut advanced = false;
        while norm(&r) > threshold && total_iterations < max_iter {
            a.matvec(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 {
                // Indefinite direction: the system is not SPD as promised.
                break;
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            rz = rz_new;
            total_iterations += 1;
            advanced = true;
        }
        if !advanced {
            // No progress is possible (indefinite direction right away).
            a.matvec(&x, &mut r);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
            return Err(Error::SolverFailure {
                iterations: total_iterations,
                residual: norm(&r) / b_norm,
                tolerance: rel_tol,
            });
        }
    }
}
