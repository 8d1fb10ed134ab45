//! Preprocessing and the from-scratch regression model families.
//!
//! Every model maps a feature vector to one prediction per label column
//! (three coordinates in the localisation pipeline). Fitted models are
//! immutable and safe for concurrent prediction.

pub mod forest;
pub mod gbt;
pub mod io;
pub mod knn;
pub mod linear;
pub mod scaler;
pub mod tree;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use forest::{fit_forest, Forest, ForestParams};
pub use gbt::{fit_gbt, GbtModel, GbtParams};
pub use knn::{fit_knn, KnnModel, KnnWeighting};
pub use linear::{fit_linear, LinearModel};
pub use scaler::{fit_scaler, StandardScaler};
pub use tree::{fit_tree, RegressionTree};

/// Train/validation split: train receives ceil(fraction * N) rows of a
/// seeded shuffle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 0,
        }
    }
}

/// Shuffled index split; deterministic in the seed.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot split an empty dataset".into()));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    idx.shuffle(&mut rng);
    let n_train = ((spec.train_fraction * n as f64).ceil() as usize).clamp(1, n);
    let val = idx.split_off(n_train);
    Ok((idx, val))
}

pub fn train_val_split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train_idx, val_idx) = split_indices(dataset.len(), spec)?;
    Ok((dataset.select_rows(&train_idx), dataset.select_rows(&val_idx)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelFamily {
    Linear,
    Tree,
    Forest,
    Gbt,
    Knn,
    Ensemble,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 6] = [
        ModelFamily::Linear,
        ModelFamily::Tree,
        ModelFamily::Forest,
        ModelFamily::Gbt,
        ModelFamily::Knn,
        ModelFamily::Ensemble,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelFamily::Linear => "linear",
            ModelFamily::Tree => "tree",
            ModelFamily::Forest => "forest",
            ModelFamily::Gbt => "gbt",
            ModelFamily::Knn => "knn",
            ModelFamily::Ensemble => "ensemble",
        }
    }

    pub fn parse(s: &str) -> Result<ModelFamily> {
        match s {
            "linear" => Ok(ModelFamily::Linear),
            "tree" => Ok(ModelFamily::Tree),
            "forest" => Ok(ModelFamily::Forest),
            "gbt" => Ok(ModelFamily::Gbt),
            "knn" => Ok(ModelFamily::Knn),
            "ensemble" => Ok(ModelFamily::Ensemble),
            other => Err(Error::InvalidArgument(format!(
                "unknown model family '{other}'"
            ))),
        }
    }
}

/// Hyperparameter value in a grid or a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Text(v) => write!(f, "{v}"),
        }
    }
}

impl ParamValue {
    /// Parse "4" as Int, "0.1" as Float, anything else as Text.
    pub fn infer(s: &str) -> ParamValue {
        if let Ok(i) = s.parse::<i64>() {
            ParamValue::Int(i)
        } else if let Ok(fl) = s.parse::<f64>() {
            ParamValue::Float(fl)
        } else {
            ParamValue::Text(s.to_string())
        }
    }

    fn as_usize(&self, name: &str) -> Result<usize> {
        match self {
            ParamValue::Int(v) if *v >= 0 => Ok(*v as usize),
            _ => Err(Error::InvalidArgument(format!(
                "parameter '{name}' must be a non-negative integer, got {self}"
            ))),
        }
    }

    fn as_f64(&self, name: &str) -> Result<f64> {
        match self {
            ParamValue::Int(v) => Ok(*v as f64),
            ParamValue::Float(v) => Ok(*v),
            ParamValue::Text(_) => Err(Error::InvalidArgument(format!(
                "parameter '{name}' must be numeric, got {self}"
            ))),
        }
    }

    fn as_text(&self, name: &str) -> Result<&str> {
        match self {
            ParamValue::Text(v) => Ok(v),
            _ => Err(Error::InvalidArgument(format!(
                "parameter '{name}' must be a string, got {self}"
            ))),
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Any fitted predictor.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Tree(RegressionTree),
    Forest(Forest),
    Gbt(GbtModel),
    Knn(KnnModel),
    Ensemble(EnsembleModel),
}

impl Model {
    pub fn family(&self) -> ModelFamily {
        match self {
            Model::Linear(_) => ModelFamily::Linear,
            Model::Tree(_) => ModelFamily::Tree,
            Model::Forest(_) => ModelFamily::Forest,
            Model::Gbt(_) => ModelFamily::Gbt,
            Model::Knn(_) => ModelFamily::Knn,
            Model::Ensemble(_) => ModelFamily::Ensemble,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_features(),
            Model::Tree(m) => m.n_features(),
            Model::Forest(m) => m.n_features(),
            Model::Gbt(m) => m.n_features(),
            Model::Knn(m) => m.n_features(),
            Model::Ensemble(m) => m.n_features(),
        }
    }

    pub fn n_outputs(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_outputs(),
            Model::Tree(m) => m.n_outputs(),
            Model::Forest(m) => m.n_outputs(),
            Model::Gbt(m) => m.n_outputs(),
            Model::Knn(m) => m.n_outputs(),
            Model::Ensemble(m) => m.n_outputs(),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        match self {
            Model::Linear(m) => m.predict_row(row),
            Model::Tree(m) => m.predict_row(row),
            Model::Forest(m) => m.predict_row(row),
            Model::Gbt(m) => m.predict_row(row),
            Model::Knn(m) => m.predict_row(row),
            Model::Ensemble(m) => m.predict_row(row),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.n_features() {
            return Err(Error::InvalidArgument(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.ncols()
            )));
        }
        let rows: Vec<Vec<f64>> = x.rows_iter().map(|r| self.predict_row(r)).collect();
        Matrix::from_rows(&rows)
    }
}

/// Averaging ensemble: the prediction is the exact arithmetic mean of the
/// member predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    members: Vec<Model>,
}

impl EnsembleModel {
    pub fn new(members: Vec<Model>) -> Result<EnsembleModel> {
        if members.len() < 2 {
            return Err(Error::InvalidArgument(
                "ensemble needs at least 2 members".into(),
            ));
        }
        let d = members[0].n_features();
        let k = members[0].n_outputs();
        for (i, m) in members.iter().enumerate() {
            if m.n_features() != d || m.n_outputs() != k {
                return Err(Error::InvalidArgument(format!(
                    "ensemble member {i} has shape {}x{}, expected {d}x{k}",
                    m.n_features(),
                    m.n_outputs()
                )));
            }
        }
        Ok(EnsembleModel { members })
    }

    pub fn members(&self) -> &[Model] {
        &self.members
    }

    pub fn n_features(&self) -> usize {
        self.members[0].n_features()
    }

    pub fn n_outputs(&self) -> usize {
        self.members[0].n_outputs()
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_outputs()];
        for m in &self.members {
            for (o, v) in out.iter_mut().zip(m.predict_row(row)) {
                *o += v;
            }
        }
        for o in &mut out {
            *o /= self.members.len() as f64;
        }
        out
    }
}

fn reject_unknown(params: &Params, allowed: &[&str], family: ModelFamily) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "unknown parameter '{key}' for family '{}' (allowed: {})",
                family.as_str(),
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn get_usize(params: &Params, name: &str, default: usize) -> Result<usize> {
    params.get(name).map_or(Ok(default), |v| v.as_usize(name))
}

fn get_f64(params: &Params, name: &str, default: f64) -> Result<f64> {
    params.get(name).map_or(Ok(default), |v| v.as_f64(name))
}

/// Fit any family from a name/value parameter map. The ensemble defaults to
/// one forest plus one inverse-distance kNN, each configurable through
/// `forest_*` / `knn_*` keys.
pub fn fit_family(
    family: ModelFamily,
    params: &Params,
    x: &Matrix,
    y: &Matrix,
    seed: u64,
) -> Result<Model> {
    match family {
        ModelFamily::Linear => {
            reject_unknown(params, &[], family)?;
            Ok(Model::Linear(fit_linear(x, y)?))
        }
        ModelFamily::Tree => {
            reject_unknown(params, &["max_depth", "min_samples_leaf"], family)?;
            let max_depth = get_usize(params, "max_depth", 25)?;
            let min_leaf = get_usize(params, "min_samples_leaf", 1)?;
            Ok(Model::Tree(fit_tree(x, y, max_depth, min_leaf)?))
        }
        ModelFamily::Forest => {
            reject_unknown(
                params,
                &["n_estimators", "max_depth", "min_samples_leaf"],
                family,
            )?;
            let fp = ForestParams {
                n_estimators: get_usize(params, "n_estimators", 100)?,
                max_depth: get_usize(params, "max_depth", 25)?,
                min_samples_leaf: get_usize(params, "min_samples_leaf", 1)?,
                seed,
                ..ForestParams::default()
            };
            Ok(Model::Forest(fit_forest(x, y, &fp)?))
        }
        ModelFamily::Gbt => {
            reject_unknown(
                params,
                &["n_estimators", "max_depth", "learning_rate", "min_samples_leaf"],
                family,
            )?;
            let gp = GbtParams {
                n_estimators: get_usize(params, "n_estimators", 100)?,
                max_depth: get_usize(params, "max_depth", 3)?,
                min_samples_leaf: get_usize(params, "min_samples_leaf", 1)?,
                learning_rate: get_f64(params, "learning_rate", 0.1)?,
            };
            Ok(Model::Gbt(fit_gbt(x, y, &gp)?))
        }
        ModelFamily::Knn => {
            reject_unknown(params, &["n_neighbors", "weights"], family)?;
            let k = get_usize(params, "n_neighbors", 4)?;
            let weighting = match params.get("weights") {
                Some(v) => KnnWeighting::parse(v.as_text("weights")?)?,
                None => KnnWeighting::InverseDistance,
            };
            Ok(Model::Knn(fit_knn(x.clone(), y.clone(), k, weighting)?))
        }
        ModelFamily::Ensemble => {
            reject_unknown(
                params,
                &[
                    "forest_n_estimators",
                    "forest_max_depth",
                    "forest_min_samples_leaf",
                    "knn_n_neighbors",
                    "knn_weights",
                ],
                family,
            )?;
            let mut forest_params = Params::new();
            let mut knn_params = Params::new();
            for (k, v) in params {
                if let Some(rest) = k.strip_prefix("forest_") {
                    forest_params.insert(rest.to_string(), v.clone());
                } else if let Some(rest) = k.strip_prefix("knn_") {
                    knn_params.insert(rest.to_string(), v.clone());
                }
            }
            let forest = fit_family(ModelFamily::Forest, &forest_params, x, y, seed)?;
            let knn = fit_family(ModelFamily::Knn, &knn_params, x, y, seed)?;
            Ok(Model::Ensemble(EnsembleModel::new(vec![forest, knn])?))
        }
    }
}

/// A fitted scaler plus model; predictions take raw (unscaled) features.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub scaler: StandardScaler,
    pub model: Model,
}

impl Pipeline {
    /// Fit the scaler on the raw training features, then the model on the
    /// scaled ones.
    pub fn fit(
        family: ModelFamily,
        params: &Params,
        x_raw: &Matrix,
        y: &Matrix,
        seed: u64,
    ) -> Result<Pipeline> {
        let scaler = fit_scaler(x_raw);
        let x = scaler.transform(x_raw);
        let model = fit_family(family, params, &x, y, seed)?;
        Ok(Pipeline { scaler, model })
    }

    pub fn predict(&self, x_raw: &Matrix) -> Result<Matrix> {
        if x_raw.ncols() != self.scaler.dim() {
            return Err(Error::InvalidArgument(format!(
                "pipeline expects {} features, got {}",
                self.scaler.dim(),
                x_raw.ncols()
            )));
        }
        self.model.predict(&self.scaler.transform(x_raw))
    }
}
