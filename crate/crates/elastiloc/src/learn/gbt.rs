//! Gradient-boosted trees for squared loss, fitted independently per output
//! coordinate: F_0 is the label mean; each round fits a depth-limited tree
//! to the current residuals and adds it scaled by the learning rate.

use crate::error::{Error, Result};
use crate::learn::tree::{fit_tree, RegressionTree};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct GbtParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub learning_rate: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_estimators: 100,
            max_depth: 3,
            min_samples_leaf: 1,
            learning_rate: 0.1,
        }
    }
}

/// One boosted chain per output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    base: Vec<f64>,
    stages: Vec<Vec<RegressionTree>>,
    learning_rate: f64,
    n_features: usize,
}

impl GbtModel {
    pub fn from_parts(
        base: Vec<f64>,
        stages: Vec<Vec<RegressionTree>>,
        learning_rate: f64,
        n_features: usize,
    ) -> GbtModel {
        GbtModel {
            base,
            stages,
            learning_rate,
            n_features,
        }
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn stages(&self) -> &[Vec<RegressionTree>] {
        &self.stages
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.base.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.stages)
            .map(|(&b, chain)| {
                b + self.learning_rate
                    * chain.iter().map(|t| t.predict_row(row)[0]).sum::<f64>()
            })
            .collect()
    }

    /// Prediction truncated to the first `m` boosting rounds (used by the
    /// monotonicity checks).
    pub fn predict_row_truncated(&self, row: &[f64], m: usize) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.stages)
            .map(|(&b, chain)| {
                b + self.learning_rate
                    * chain
                        .iter()
                        .take(m)
                        .map(|t| t.predict_row(row)[0])
                        .sum::<f64>()
            })
            .collect()
    }
}

pub fn fit_gbt(x: &Matrix, y: &Matrix, params: &GbtParams) -> Result<GbtModel> {
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "learning_rate must lie in (0, 1], got {}",
            params.learning_rate
        )));
    }
    if x.nrows() == 0 || y.nrows() != x.nrows() {
        return Err(Error::InvalidArgument(
            "X and Y must be non-empty with matching rows".into(),
        ));
    }
    let n = x.nrows();
    let k = y.ncols();

    let mut base = Vec::with_capacity(k);
    let mut stages = Vec::with_capacity(k);
    for o in 0..k {
        let col = y.column(o);
        let mean = col.iter().sum::<f64>() / n as f64;
        base.push(mean);

        let mut current: Vec<f64> = vec![mean; n];
        let mut chain = Vec::with_capacity(params.n_estimators);
        for _ in 0..params.n_estimators {
            let residuals: Vec<Vec<f64>> =
                (0..n).map(|r| vec![col[r] - current[r]]).collect();
            let ry = Matrix::from_rows(&residuals)?;
            let tree = fit_tree(x, &ry, params.max_depth, params.min_samples_leaf)?;
            for (r, cur) in current.iter_mut().enumerate() {
                *cur += params.learning_rate * tree.predict_row(x.row(r))[0];
            }
            chain.push(tree);
        }
        stages.push(chain);
    }

    Ok(GbtModel {
        base,
        stages,
        learning_rate: params.learning_rate,
        n_features: x.ncols(),
    })
}
