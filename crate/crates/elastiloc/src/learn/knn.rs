//! Exact k-nearest-neighbour regression over the (scaled) training set.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnWeighting {
    Uniform,
    /// w_i = 1 / d_i; a zero-distance hit short-circuits to the mean of all
    /// zero-distance labels.
    InverseDistance,
}

impl KnnWeighting {
    pub fn as_str(&self) -> &'static str {
        match self {
            KnnWeighting::Uniform => "uniform",
            KnnWeighting::InverseDistance => "distance",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(KnnWeighting::Uniform),
            "distance" | "inverse-distance" => Ok(KnnWeighting::InverseDistance),
            other => Err(Error::InvalidArgument(format!(
                "unknown kNN weighting '{other}' (expected 'uniform' or 'distance')"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    x: Matrix,
    y: Matrix,
    k: usize,
    weighting: KnnWeighting,
}

pub fn fit_knn(x: Matrix, y: Matrix, k: usize, weighting: KnnWeighting) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k > x.nrows() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the training size {}",
            x.nrows()
        )));
    }
    if y.nrows() != x.nrows() {
        return Err(Error::InvalidArgument(format!(
            "X has {} rows but Y has {}",
            x.nrows(),
            y.nrows()
        )));
    }
    Ok(KnnModel { x, y, k, weighting })
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weighting(&self) -> KnnWeighting {
        self.weighting
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.y.ncols()
    }

    pub fn training(&self) -> (&Matrix, &Matrix) {
        (&self.x, &self.y)
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        let n = self.x.nrows();
        let kk = self.y.ncols();
        // Distance ties break by training-row index: (d2, index) ordering.
        let mut dist: Vec<(f64, usize)> = (0..n)
            .map(|r| {
                let d2: f64 = self
                    .x
                    .row(r)
                    .iter()
                    .zip(row)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2, r)
            })
            .collect();
        dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &dist[..self.k];

        let mut out = vec![0.0; kk];
        match self.weighting {
            KnnWeighting::Uniform => {
                for &(_, r) in nearest {
                    for (o, &v) in out.iter_mut().zip(self.y.row(r)) {
                        *o += v;
                    }
                }
                for o in &mut out {
                    *o /= self.k as f64;
                }
            }
            KnnWeighting::InverseDistance => {
                if nearest.iter().any(|&(d2, _)| d2 == 0.0) {
                    let zeros: Vec<usize> = dist
                        .iter()
                        .take_while(|&&(d2, _)| d2 == 0.0)
                        .map(|&(_, r)| r)
                        .collect();
                    for &r in &zeros {
                        for (o, &v) in out.iter_mut().zip(self.y.row(r)) {
                            *o += v;
                        }
                    }
                    for o in &mut out {
                        *o /= zeros.len() as f64;
                    }
                    return out;
                }
                let mut wsum = 0.0;
                for &(d2, r) in nearest {
                    let w = 1.0 / d2.sqrt();
                    wsum += w;
                    for (o, &v) in out.iter_mut().zip(self.y.row(r)) {
                        *o += w * v;
                    }
                }
                for o in &mut out {
                    *o /= wsum;
                }
            }
        }
        out
    }
}
