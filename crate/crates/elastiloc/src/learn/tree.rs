//! Greedy CART regression tree with multi-output leaves.
//!
//! Splits minimize the summed (over outputs) within-child squared deviation
//! from the child mean, i.e. SSE(left) + SSE(right). Candidate thresholds
//! are midpoints between consecutive distinct sorted feature values; ties
//! are broken by the lowest feature index, then the lowest threshold. A row
//! goes left when feature <= threshold.

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        prediction: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<TreeNode>,
    n_features: usize,
    n_outputs: usize,
}

impl RegressionTree {
    pub fn from_parts(nodes: Vec<TreeNode>, n_features: usize, n_outputs: usize) -> Self {
        RegressionTree {
            nodes,
            n_features,
            n_outputs,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + rec(nodes, *left).max(rec(nodes, *right))
                }
            }
        }
        rec(&self.nodes, 0)
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { prediction } => return prediction.clone(),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// Per-node feature pool: all features, or `m` drawn without replacement
/// from the given RNG (used by forests).
pub enum FeaturePool<'a, R: Rng> {
    All,
    Random { m: usize, rng: &'a mut R },
}

pub fn fit_tree(
    x: &Matrix,
    y: &Matrix,
    max_depth: usize,
    min_samples_leaf: usize,
) -> Result<RegressionTree> {
    let rows: Vec<usize> = (0..x.nrows()).collect();
    fit_tree_on_rows::<rand_chacha::ChaCha8Rng>(
        x,
        y,
        &rows,
        max_depth,
        min_samples_leaf,
        &mut FeaturePool::All,
    )
}

/// Fit on a subset of rows (duplicates allowed, as in bootstrap samples).
pub fn fit_tree_on_rows<R: Rng>(
    x: &Matrix,
    y: &Matrix,
    rows: &[usize],
    max_depth: usize,
    min_samples_leaf: usize,
    features: &mut FeaturePool<'_, R>,
) -> Result<RegressionTree> {
    if rows.is_empty() || x.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit a tree on an empty sample".into(),
        ));
    }
    if y.nrows() != x.nrows() {
        return Err(Error::InvalidArgument(format!(
            "X has {} rows but Y has {}",
            x.nrows(),
            y.nrows()
        )));
    }
    if min_samples_leaf == 0 {
        return Err(Error::InvalidArgument(
            "min_samples_leaf must be >= 1".into(),
        ));
    }
    let mut builder = Builder {
        x,
        y,
        max_depth,
        min_samples_leaf,
        nodes: Vec::new(),
    };
    let mut rows = rows.to_vec();
    builder.grow(&mut rows, 0, features);
    Ok(RegressionTree {
        nodes: builder.nodes,
        n_features: x.ncols(),
        n_outputs: y.ncols(),
    })
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a Matrix,
    max_depth: usize,
    min_samples_leaf: usize,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    cost: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn grow<R: Rng>(
        &mut self,
        rows: &mut [usize],
        depth: usize,
        features: &mut FeaturePool<'_, R>,
    ) -> usize {
        let index = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            prediction: self.mean_label(rows),
        });

        if depth >= self.max_depth || rows.len() < 2 * self.min_samples_leaf || self.pure(rows) {
            return index;
        }

        let pool: Vec<usize> = match features {
            FeaturePool::All => (0..self.x.ncols()).collect(),
            FeaturePool::Random { m, rng } => {
                let m = (*m).min(self.x.ncols());
                let mut picked: Vec<usize> =
                    sample_indices(rng, self.x.ncols(), m).into_iter().collect();
                // Ascending order keeps the lowest-feature tie-break
                // deterministic regardless of draw order.
                picked.sort_unstable();
                picked
            }
        };

        let Some(best) = self.best_split(rows, &pool) else {
            return index;
        };

        // Stable partition: left rows keep their relative order.
        let mut left: Vec<usize> = Vec::with_capacity(rows.len());
        let mut right: Vec<usize> = Vec::with_capacity(rows.len());
        for &r in rows.iter() {
            if self.x.get(r, best.feature) <= best.threshold {
                left.push(r);
            } else {
                right.push(r);
            }
        }
        let left_id = self.grow(&mut left, depth + 1, features);
        let right_id = self.grow(&mut right, depth + 1, features);
        self.nodes[index] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: left_id,
            right: right_id,
        };
        index
    }

    fn mean_label(&self, rows: &[usize]) -> Vec<f64> {
        let k = self.y.ncols();
        let mut mean = vec![0.0; k];
        for &r in rows {
            for (m, &v) in mean.iter_mut().zip(self.y.row(r)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= rows.len() as f64;
        }
        mean
    }

    fn pure(&self, rows: &[usize]) -> bool {
        let first = self.y.row(rows[0]);
        rows.iter().all(|&r| self.y.row(r) == first)
    }

    fn best_split(&self, rows: &[usize], pool: &[usize]) -> Option<BestSplit> {
        let k = self.y.ncols();
        let n = rows.len();
        let mut best: Option<BestSplit> = None;

        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut prefix_sum = vec![0.0f64; k];
        let mut total_sum = vec![0.0f64; k];
        let mut prefix_sq = vec![0.0f64; k];
        let mut total_sq = vec![0.0f64; k];

        for &f in pool {
            order.clear();
            order.extend_from_slice(rows);
            order.sort_unstable_by(|&a, &b| {
                self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b))
            });

            total_sum.iter_mut().for_each(|v| *v = 0.0);
            total_sq.iter_mut().for_each(|v| *v = 0.0);
            for &r in &order {
                for (o, &v) in self.y.row(r).iter().enumerate() {
                    total_sum[o] += v;
                    total_sq[o] += v * v;
                }
            }

            prefix_sum.iter_mut().for_each(|v| *v = 0.0);
            prefix_sq.iter_mut().for_each(|v| *v = 0.0);
            for pos in 1..n {
                let prev = order[pos - 1];
                for (o, &v) in self.y.row(prev).iter().enumerate() {
                    prefix_sum[o] += v;
                    prefix_sq[o] += v * v;
                }
                let v_prev = self.x.get(prev, f);
                let v_here = self.x.get(order[pos], f);
                if v_prev == v_here {
                    continue; // not a boundary between distinct values
                }
                if pos < self.min_samples_leaf || n - pos < self.min_samples_leaf {
                    continue;
                }
                let threshold = 0.5 * (v_prev + v_here);
                let nl = pos as f64;
                let nr = (n - pos) as f64;
                let mut cost = 0.0;
                for o in 0..k {
                    let ls = prefix_sum[o];
                    let rs = total_sum[o] - ls;
                    cost += (prefix_sq[o] - ls * ls / nl)
                        + ((total_sq[o] - prefix_sq[o]) - rs * rs / nr);
                }
                // Strict improvement keeps the first (lowest feature, lowest
                // threshold) optimum on ties.
                if best.as_ref().is_none_or(|b| cost < b.cost) {
                    best = Some(BestSplit {
                        cost,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(pairs: &[(f64, f64)]) -> (Matrix, Matrix) {
        let x = Matrix::from_rows(&pairs.iter().map(|p| vec![p.0]).collect::<Vec<_>>()).unwrap();
        let y = Matrix::from_rows(&pairs.iter().map(|p| vec![p.1]).collect::<Vec<_>>()).unwrap();
        (x, y)
    }

    #[test]
    fn single_row_is_a_leaf() {
        let (x, y) = xy(&[(3.0, 7.5)]);
        let t = fit_tree(&x, &y, 8, 1).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_row(&[100.0]), vec![7.5]);
    }

    #[test]
    fn four_point_depth_one_splits_at_midpoint() {
        // Exhaustive search over the 3 candidate midpoints picks 1.5.
        let (x, y) = xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]);
        let t = fit_tree(&x, &y, 1, 1).unwrap();
        match &t.nodes()[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5);
            }
            other => panic!("expected a split at the root, got {other:?}"),
        }
        assert_eq!(t.predict_row(&[0.5]), vec![0.0]);
        assert_eq!(t.predict_row(&[2.5]), vec![1.0]);
    }

    #[test]
    fn memorizes_distinct_rows_at_full_depth() {
        // Linear labels make every greedy split land on the median, so
        // ceil(log2 N) levels memorize N rows.
        let rows: Vec<(f64, f64)> = (0..16).map(|i| (i as f64, (3 * i) as f64)).collect();
        let (x, y) = xy(&rows);
        let t = fit_tree(&x, &y, 4, 1).unwrap(); // ceil(log2 16) = 4
        for (xi, yi) in &rows {
            assert_eq!(t.predict_row(&[*xi]), vec![*yi]);
        }

        // Greedy splits on curved labels can come out unbalanced; an
        // unconstrained depth still memorizes them.
        let rows: Vec<(f64, f64)> = (0..16).map(|i| (i as f64, (i * i) as f64)).collect();
        let (x, y) = xy(&rows);
        let t = fit_tree(&x, &y, usize::MAX, 1).unwrap();
        for (xi, yi) in &rows {
            assert_eq!(t.predict_row(&[*xi]), vec![*yi]);
        }
    }

    #[test]
    fn depth_zero_predicts_global_mean() {
        let (x, y) = xy(&[(0.0, 1.0), (1.0, 3.0)]);
        let t = fit_tree(&x, &y, 0, 1).unwrap();
        assert_eq!(t.predict_row(&[0.0]), vec![2.0]);
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn min_samples_leaf_blocks_small_children() {
        let (x, y) = xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 5.0)]);
        let t = fit_tree(&x, &y, 8, 2).unwrap();
        // Only the 2/2 split is admissible.
        match &t.nodes()[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn multi_output_cost_sums_over_outputs() {
        // Output 0 prefers the split at 0.5; output 1 prefers 2.5, and its
        // variance dominates the sum, so the joint split must be 2.5.
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let y = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 10.0],
        ])
        .unwrap();
        let t = fit_tree(&x, &y, 1, 1).unwrap();
        match &t.nodes()[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 2.5),
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn tie_breaks_prefer_lowest_feature_then_threshold() {
        // Features 0 and 1 produce identical (perfect) splits; feature 0
        // must win. Along feature 0, thresholds 0.5 and 1.5 tie on the
        // constant-label left/right groups; the lower one must win.
        let x = Matrix::from_rows(&[
            vec![0.0, 10.0],
            vec![1.0, 11.0],
            vec![2.0, 12.0],
            vec![3.0, 13.0],
        ])
        .unwrap();
        let y = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0], vec![2.0]]).unwrap();
        let t = fit_tree(&x, &y, 1, 1).unwrap();
        match &t.nodes()[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
            }
            other => panic!("expected a split, got {other:?}"),
        }

        let y_tied = Matrix::from_rows(&vec![vec![5.0]; 4]).unwrap();
        let t = fit_tree(&x, &y_tied, 3, 1).unwrap();
        assert_eq!(t.nodes().len(), 1, "pure node must not split");
    }

    #[test]
    fn predictions_stay_within_label_range() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let labels: Vec<Vec<f64>> = (0..80)
            .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = Matrix::from_rows(&labels).unwrap();
        let t = fit_tree(&x, &y, 6, 1).unwrap();
        let (lo, hi): (Vec<f64>, Vec<f64>) = (0..3)
            .map(|o| {
                let col = y.column(o);
                (
                    col.iter().cloned().fold(f64::INFINITY, f64::min),
                    col.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            })
            .unzip();
        for _ in 0..50 {
            let q: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = t.predict_row(&q);
            for o in 0..3 {
                assert!(p[o] >= lo[o] - 1e-12 && p[o] <= hi[o] + 1e-12);
            }
        }
    }
}
