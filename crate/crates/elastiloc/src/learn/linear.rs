//! Multi-output linear regression via the normal equations.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// y = W^T x + b with a D x K weight matrix and K-vector intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Matrix,
    intercept: Vec<f64>,
}

impl LinearModel {
    pub fn from_parts(weights: Matrix, intercept: Vec<f64>) -> LinearModel {
        LinearModel { weights, intercept }
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn intercept(&self) -> &[f64] {
        &self.intercept
    }

    pub fn n_features(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.intercept.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        let k = self.intercept.len();
        let mut out = self.intercept.clone();
        for (j, &v) in row.iter().enumerate() {
            for (o, out_o) in out.iter_mut().enumerate().take(k) {
                *out_o += v * self.weights.get(j, o);
            }
        }
        out
    }
}

/// Least squares on centred data with a Tikhonov jitter of
/// 1e-10 * trace(Xc^T Xc) / D on the diagonal, which keeps the normal
/// equations solvable for rank-deficient inputs. An all-constant feature
/// matrix (zero trace) short-circuits to W = 0, so the prediction is the
/// column means of Y.
pub fn fit_linear(x: &Matrix, y: &Matrix) -> Result<LinearModel> {
    let n = x.nrows();
    let d = x.ncols();
    let k = y.ncols();
    if n == 0 || y.nrows() != n {
        return Err(Error::InvalidArgument(format!(
            "fit_linear needs matching non-empty X ({n} rows) and Y ({} rows)",
            y.nrows()
        )));
    }

    let x_mean: Vec<f64> = (0..d)
        .map(|j| x.column(j).iter().sum::<f64>() / n as f64)
        .collect();
    let y_mean: Vec<f64> = (0..k)
        .map(|j| y.column(j).iter().sum::<f64>() / n as f64)
        .collect();

    // Gram matrix and right-hand side on centred data.
    let mut gram = vec![vec![0.0f64; d]; d];
    let mut rhs = vec![vec![0.0f64; k]; d];
    for r in 0..n {
        let row = x.row(r);
        let yrow = y.row(r);
        for a in 0..d {
            let xa = row[a] - x_mean[a];
            for (b, g) in gram[a].iter_mut().enumerate().skip(a) {
                *g += xa * (row[b] - x_mean[b]);
            }
            for (o, rh) in rhs[a].iter_mut().enumerate() {
                *rh += xa * (yrow[o] - y_mean[o]);
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }

    let trace: f64 = (0..d).map(|a| gram[a][a]).sum();
    let mut weights = Matrix::zeros(d, k);
    if trace > 0.0 {
        let jitter = 1e-10 * trace / d as f64;
        for (a, row) in gram.iter_mut().enumerate() {
            row[a] += jitter;
        }
        let w = solve_dense_multi(&mut gram, &mut rhs)?;
        for a in 0..d {
            for o in 0..k {
                weights.set(a, o, w[a][o]);
            }
        }
    }

    let intercept: Vec<f64> = (0..k)
        .map(|o| {
            let dot: f64 = (0..d).map(|a| x_mean[a] * weights.get(a, o)).sum();
            y_mean[o] - dot
        })
        .collect();

    Ok(LinearModel { weights, intercept })
}

/// Gaussian elimination with partial pivoting for G W = B; `g` and `b` are
/// consumed as workspace.
fn solve_dense_multi(g: &mut [Vec<f64>], b: &mut [Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = g.len();
    let k = b.first().map_or(0, Vec::len);
    for col in 0..d {
        let (pivot, pmax) = (col..d)
            .map(|r| (r, g[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pmax == 0.0 {
            return Err(Error::InvalidArgument(
                "normal equations are singular despite jitter".into(),
            ));
        }
        g.swap(col, pivot);
        b.swap(col, pivot);
        let inv = 1.0 / g[col][col];
        for r in col + 1..d {
            let factor = g[r][col] * inv;
            if factor == 0.0 {
                continue;
            }
            for c in col..d {
                g[r][c] -= factor * g[col][c];
            }
            for o in 0..k {
                b[r][o] -= factor * b[col][o];
            }
        }
    }
    let mut w = vec![vec![0.0; k]; d];
    for col in (0..d).rev() {
        for o in 0..k {
            let mut acc = b[col][o];
            for c in col + 1..d {
                acc -= g[col][c] * w[c][o];
            }
            w[col][o] = acc / g[col][col];
        }
    }
    Ok(w)
}
