//! Column-wise z-score normalization fitted on training rows only.

use crate::matrix::Matrix;

/// Per-feature mean and population standard deviation (divide by N).
/// Constant columns (sigma = 0) transform to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardScaler {
    mean: Vec<f64>,
    std: Vec<f64>,
}

pub fn fit_scaler(x: &Matrix) -> StandardScaler {
    let n = x.nrows().max(1) as f64;
    let d = x.ncols();
    let mut mean = vec![0.0; d];
    for row in x.rows_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; d];
    for row in x.rows_iter() {
        for j in 0..d {
            let dv = row[j] - mean[j];
            var[j] += dv * dv;
        }
    }
    let std = var.iter().map(|v| (v / n).sqrt()).collect();
    StandardScaler { mean, std }
}

impl StandardScaler {
    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>) -> StandardScaler {
        StandardScaler { mean, std }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.std[j] == 0.0 {
                    0.0
                } else {
                    (v - self.mean[j]) / self.std[j]
                }
            })
            .collect()
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = x.rows_iter().map(|r| self.transform_row(r)).collect();
        Matrix::from_rows(&rows).expect("rows share the scaler dimension")
    }
}
