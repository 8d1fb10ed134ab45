//! Exhaustive grid search with k-fold cross-validation.
//!
//! Every parameter combination is scored by the mean validation MSE over a
//! deterministic shuffled k-fold partition; the scaler is refit inside each
//! fold's training portion so no validation statistics leak into the fit.
//! The winner is the argmin, with ties resolved by grid enumeration order
//! (parameters iterate in their declared order, last parameter fastest).

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::mse;
use crate::learn::{ModelFamily, ParamValue, Params, Pipeline};
use crate::matrix::Matrix;

/// Named candidate lists; the Cartesian product is enumerated in
/// declaration order.
#[derive(Debug, Clone)]
pub struct ParamGrid {
    family: ModelFamily,
    axes: Vec<(String, Vec<ParamValue>)>,
}

impl ParamGrid {
    pub fn new(family: ModelFamily) -> ParamGrid {
        ParamGrid {
            family,
            axes: Vec::new(),
        }
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn add(mut self, name: &str, values: Vec<ParamValue>) -> ParamGrid {
        self.axes.push((name.to_string(), values));
        self
    }

    pub fn axes(&self) -> &[(String, Vec<ParamValue>)] {
        &self.axes
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.iter().any(|(_, v)| v.is_empty()) {
            return Err(Error::InvalidArgument(
                "every grid axis needs at least one candidate value".into(),
            ));
        }
        Ok(())
    }

    /// All combinations, last-declared axis varying fastest. An empty grid
    /// yields the single empty combination (family defaults).
    pub fn combinations(&self) -> Vec<Params> {
        let mut out = vec![Params::new()];
        for (name, values) in &self.axes {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for base in &out {
                for v in values {
                    let mut p = base.clone();
                    p.insert(name.clone(), v.clone());
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

/// Shuffled k-fold partition: folds are disjoint, exhaustive and differ in
/// size by at most one (the first n mod k folds get the extra row).
pub fn kfold_indices(n: usize, k_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k_folds < 2 {
        return Err(Error::InvalidArgument("k_folds must be >= 2".into()));
    }
    if n < k_folds {
        return Err(Error::InvalidArgument(format!(
            "need at least {k_folds} rows for {k_folds}-fold CV, got {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let base = n / k_folds;
    let extra = n % k_folds;
    let mut folds = Vec::with_capacity(k_folds);
    let mut at = 0;
    for f in 0..k_folds {
        let size = base + usize::from(f < extra);
        folds.push(idx[at..at + size].to_vec());
        at += size;
    }
    Ok(folds)
}

/// Scores for one parameter combination.
#[derive(Debug, Clone)]
pub struct CombinationScore {
    pub params: Params,
    pub fold_mse: Vec<f64>,
    pub mean_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub family: ModelFamily,
    pub best: Params,
    pub best_mean_mse: f64,
    pub scores: Vec<CombinationScore>,
    pub k_folds: usize,
    pub seed: u64,
}

/// Mean-of-folds validation MSE for one combination on a fixed partition.
fn score_combination(
    family: ModelFamily,
    params: &Params,
    x: &Matrix,
    y: &Matrix,
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<CombinationScore> {
    let mut fold_mse = Vec::with_capacity(folds.len());
    for held_out in 0..folds.len() {
        let val_idx = &folds[held_out];
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != held_out)
            .flat_map(|(_, rows)| rows.iter().copied())
            .collect();
        let pipeline = Pipeline::fit(
            family,
            params,
            &x.select_rows(&train_idx),
            &y.select_rows(&train_idx),
            seed,
        )?;
        let pred = pipeline.predict(&x.select_rows(val_idx))?;
        fold_mse.push(mse(&y.select_rows(val_idx), &pred)?);
    }
    let mean_mse = fold_mse.iter().sum::<f64>() / fold_mse.len() as f64;
    Ok(CombinationScore {
        params: params.clone(),
        fold_mse,
        mean_mse,
    })
}

/// Evaluate every combination and return the argmin. Combinations are
/// scored in parallel; the result is independent of scheduling because the
/// partition and per-combination seeds are fixed up front.
pub fn grid_search(
    grid: &ParamGrid,
    x: &Matrix,
    y: &Matrix,
    k_folds: usize,
    seed: u64,
) -> Result<TuneResult> {
    grid.validate()?;
    if x.nrows() != y.nrows() {
        return Err(Error::InvalidArgument(format!(
            "X has {} rows but Y has {}",
            x.nrows(),
            y.nrows()
        )));
    }
    let folds = kfold_indices(x.nrows(), k_folds, seed)?;
    let combos = grid.combinations();

    let scores: Result<Vec<CombinationScore>> = combos
        .par_iter()
        .map(|params| score_combination(grid.family, params, x, y, &folds, seed))
        .collect();
    let scores = scores?;

    let mut best_at = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.mean_mse < scores[best_at].mean_mse {
            best_at = i;
        }
    }
    Ok(TuneResult {
        family: grid.family,
        best: scores[best_at].params.clone(),
        best_mean_mse: scores[best_at].mean_mse,
        scores,
        k_folds,
        seed,
    })
}

/// CSV export: one row per combination (parameter columns, per-fold MSEs,
/// mean), ordered as enumerated.
pub fn write_tune_csv(result: &TuneResult, path: &Path) -> Result<()> {
    let mut names: Vec<&str> = Vec::new();
    for s in &result.scores {
        for k in s.params.keys() {
            if !names.contains(&k.as_str()) {
                names.push(k);
            }
        }
    }
    let mut out = String::new();
    out.push_str("family");
    for n in &names {
        let _ = write!(out, ",{n}");
    }
    for f in 0..result.k_folds {
        let _ = write!(out, ",fold{f}_mse");
    }
    out.push_str(",mean_mse,best\n");
    for s in &result.scores {
        out.push_str(result.family.as_str());
        for n in &names {
            match s.params.get(*n) {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push(','),
            }
        }
        for v in &s.fold_mse {
            let _ = write!(out, ",{}", crate::datagen::fmt_f64(*v));
        }
        let _ = write!(out, ",{}", crate::datagen::fmt_f64(s.mean_mse));
        let is_best = s.params == result.best;
        let _ = writeln!(out, ",{}", if is_best { 1 } else { 0 });
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
