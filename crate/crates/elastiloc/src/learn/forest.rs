//! Random forest: bagged CART trees with per-node random feature subsets.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::learn::tree::{fit_tree_on_rows, FeaturePool, RegressionTree};
use crate::matrix::Matrix;
use crate::seeding::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
    /// Test hook: disabling the bootstrap trains every tree on the full
    /// sample.
    pub bootstrap: bool,
    /// Candidate features per node; None means max(1, D/3).
    pub features_per_split: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_depth: 25,
            min_samples_leaf: 1,
            seed: 0,
            bootstrap: true,
            features_per_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<RegressionTree>,
    n_features: usize,
    n_outputs: usize,
}

impl Forest {
    pub fn from_trees(trees: Vec<RegressionTree>) -> Result<Forest> {
        let Some(first) = trees.first() else {
            return Err(Error::InvalidArgument("forest needs >= 1 tree".into()));
        };
        let n_features = first.n_features();
        let n_outputs = first.n_outputs();
        Ok(Forest {
            trees,
            n_features,
            n_outputs,
        })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    /// Unweighted mean of the member trees' predictions (sum then divide,
    /// so it matches an external mean computation bit-for-bit).
    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_outputs];
        for t in &self.trees {
            for (o, v) in out.iter_mut().zip(t.predict_row(row)) {
                *o += v;
            }
        }
        for o in &mut out {
            *o /= self.trees.len() as f64;
        }
        out
    }
}

/// Each tree sees a bootstrap resample (N draws with replacement) and a
/// fresh per-node feature pool; tree seeds derive from the master seed, so
/// the result is independent of thread scheduling.
pub fn fit_forest(x: &Matrix, y: &Matrix, params: &ForestParams) -> Result<Forest> {
    if params.n_estimators == 0 {
        return Err(Error::InvalidArgument("n_estimators must be >= 1".into()));
    }
    if x.nrows() == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let n = x.nrows();
    let m = params
        .features_per_split
        .unwrap_or_else(|| (x.ncols() / 3).max(1));

    let trees: Result<Vec<RegressionTree>> = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, t as u64));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut pool = if m >= x.ncols() {
                FeaturePool::All
            } else {
                FeaturePool::Random { m, rng: &mut rng }
            };
            fit_tree_on_rows(
                x,
                y,
                &rows,
                params.max_depth,
                params.min_samples_leaf,
                &mut pool,
            )
        })
        .collect();
    Forest::from_trees(trees?)
}
