//! Run configuration: a flat key = value file plus flag overrides, with a
//! closed schema (unknown keys are rejected before any work starts).
//!
//! Precedence: built-in desk-scale defaults, then the config file, then the
//! `--paper-scale` preset, then explicit `--set key=value` flags.
//!
//! ```text
//! recipe = single | per-eps | universal | ablation
//! sensors = microphone | accelerometer
//! eps = 0.01            # source narrowness (single recipe)
//! mesh = 10x5x4         # divisions (single recipe)
//! n_samples = 500       # per generated configuration
//! seed = 7
//! train_fraction = 0.7
//! split_seed = 11
//! models = linear,tree,forest,gbt,knn,ensemble
//! k_folds = 5
//! tune_family = forest
//! grid_<param> = v1,v2,...   # axes for `tune`
//! tree_max_depth, tree_min_samples_leaf
//! forest_n_estimators, forest_max_depth, forest_min_samples_leaf
//! gbt_n_estimators, gbt_max_depth, gbt_learning_rate, gbt_min_samples_leaf
//! knn_n_neighbors, knn_weights        # ensemble reuses forest_*/knn_*
//! young_modulus = 100000
//! poisson_ratio = 0.45
//! amplitude = 1
//! rel_tol = 1e-10
//! threads = 0           # 0 = library default worker pool
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::datagen::{read_meta, SensorLayout};
use crate::error::{Error, Result};
use crate::fem::Material;
use crate::learn::{ModelFamily, ParamValue, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    Single,
    PerEps,
    Universal,
    Ablation,
}

impl Recipe {
    pub fn as_str(&self) -> &'static str {
        match self {
            Recipe::Single => "single",
            Recipe::PerEps => "per-eps",
            Recipe::Universal => "universal",
            Recipe::Ablation => "ablation",
        }
    }

    fn parse(s: &str) -> Result<Recipe> {
        match s {
            "single" => Ok(Recipe::Single),
            "per-eps" => Ok(Recipe::PerEps),
            "universal" => Ok(Recipe::Universal),
            "ablation" => Ok(Recipe::Ablation),
            other => Err(Error::Config(format!("unknown recipe '{other}'"))),
        }
    }
}

pub const COARSE_MESH: (usize, usize, usize) = (10, 5, 4);
pub const FINE_MESH: (usize, usize, usize) = (20, 10, 8);
pub const EPS_VALUES: [f64; 2] = [0.01, 0.001];

/// Family-specific hyperparameter keys accepted in configs.
const PARAM_KEYS: &[(&str, ModelFamily, &str)] = &[
    ("tree_max_depth", ModelFamily::Tree, "max_depth"),
    ("tree_min_samples_leaf", ModelFamily::Tree, "min_samples_leaf"),
    ("forest_n_estimators", ModelFamily::Forest, "n_estimators"),
    ("forest_max_depth", ModelFamily::Forest, "max_depth"),
    (
        "forest_min_samples_leaf",
        ModelFamily::Forest,
        "min_samples_leaf",
    ),
    ("gbt_n_estimators", ModelFamily::Gbt, "n_estimators"),
    ("gbt_max_depth", ModelFamily::Gbt, "max_depth"),
    ("gbt_learning_rate", ModelFamily::Gbt, "learning_rate"),
    ("gbt_min_samples_leaf", ModelFamily::Gbt, "min_samples_leaf"),
    ("knn_n_neighbors", ModelFamily::Knn, "n_neighbors"),
    ("knn_weights", ModelFamily::Knn, "weights"),
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub recipe: Recipe,
    pub sensors: SensorLayout,
    pub eps: f64,
    pub mesh: (usize, usize, usize),
    pub n_samples: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub models: Vec<ModelFamily>,
    pub k_folds: usize,
    pub tune_family: ModelFamily,
    pub grid: Vec<(String, Vec<ParamValue>)>,
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub amplitude: f64,
    pub rel_tol: f64,
    pub threads: usize,
    /// family-param values as written, keyed by the raw config key.
    raw_params: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            recipe: Recipe::Single,
            sensors: SensorLayout::microphones(),
            eps: 0.01,
            mesh: COARSE_MESH,
            n_samples: 500,
            seed: 7,
            train_fraction: 0.7,
            split_seed: 11,
            models: ModelFamily::ALL.to_vec(),
            k_folds: 5,
            tune_family: ModelFamily::Forest,
            grid: Vec::new(),
            young_modulus: 1.0e5,
            poisson_ratio: 0.45,
            amplitude: 1.0,
            rel_tol: 1e-10,
            threads: 0,
            raw_params: BTreeMap::new(),
        }
    }
}

fn parse_mesh(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() == 3 {
        let mut out = [0usize; 3];
        let mut ok = true;
        for (o, p) in out.iter_mut().zip(&parts) {
            match p.parse::<usize>() {
                Ok(v) if v >= 1 => *o = v,
                _ => ok = false,
            }
        }
        if ok {
            return Ok((out[0], out[1], out[2]));
        }
    }
    Err(Error::Config(format!(
        "mesh must look like '10x5x4' with positive counts, got '{s}'"
    )))
}

impl RunConfig {
    /// Load from an optional file, then apply the paper-scale preset, then
    /// `--set key=value` overrides.
    pub fn load(
        file: Option<&Path>,
        paper_scale: bool,
        sets: &[(String, String)],
    ) -> Result<RunConfig> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        if let Some(path) = file {
            for (k, v) in read_meta(path)? {
                kv.insert(k, v);
            }
        }
        if paper_scale {
            kv.insert("n_samples".into(), "5000".into());
            kv.insert("forest_n_estimators".into(), "800".into());
        }
        for (k, v) in sets {
            kv.insert(k.clone(), v.clone());
        }
        RunConfig::from_map(kv)
    }

    pub fn from_map(kv: BTreeMap<String, String>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (key, value) in kv {
            cfg.apply(&key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value '{value}' for '{what}'"));
        match key {
            "recipe" => self.recipe = Recipe::parse(value)?,
            "sensors" => {
                self.sensors = match value {
                    "microphone" => SensorLayout::microphones(),
                    "accelerometer" => SensorLayout::accelerometers(),
                    other => {
                        return Err(Error::Config(format!(
                            "sensors must be 'microphone' or 'accelerometer', got '{other}'"
                        )))
                    }
                }
            }
            "eps" => self.eps = value.parse().map_err(|_| bad("eps"))?,
            "mesh" => self.mesh = parse_mesh(value)?,
            "n_samples" => self.n_samples = value.parse().map_err(|_| bad("n_samples"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "train_fraction" => {
                self.train_fraction = value.parse().map_err(|_| bad("train_fraction"))?
            }
            "split_seed" => self.split_seed = value.parse().map_err(|_| bad("split_seed"))?,
            "models" => {
                self.models = value
                    .split(',')
                    .map(|s| ModelFamily::parse(s.trim()))
                    .collect::<Result<Vec<_>>>()?;
                if self.models.is_empty() {
                    return Err(Error::Config("models list is empty".into()));
                }
            }
            "k_folds" => self.k_folds = value.parse().map_err(|_| bad("k_folds"))?,
            "tune_family" => self.tune_family = ModelFamily::parse(value)?,
            "young_modulus" => {
                self.young_modulus = value.parse().map_err(|_| bad("young_modulus"))?
            }
            "poisson_ratio" => {
                self.poisson_ratio = value.parse().map_err(|_| bad("poisson_ratio"))?
            }
            "amplitude" => self.amplitude = value.parse().map_err(|_| bad("amplitude"))?,
            "rel_tol" => self.rel_tol = value.parse().map_err(|_| bad("rel_tol"))?,
            "threads" => self.threads = value.parse().map_err(|_| bad("threads"))?,
            _ if PARAM_KEYS.iter().any(|(k, _, _)| *k == key) => {
                self.raw_params.insert(key.to_string(), value.to_string());
            }
            _ if key.starts_with("grid_") => {
                let param = key.trim_start_matches("grid_").to_string();
                let values: Vec<ParamValue> = value
                    .split(',')
                    .map(|s| ParamValue::infer(s.trim()))
                    .collect();
                if values.is_empty() {
                    return Err(Error::Config(format!("grid axis '{key}' is empty")));
                }
                self.grid.push((param, values));
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key '{other}'"
                )))
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        if self.k_folds < 2 {
            return Err(Error::Config("k_folds must be >= 2".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        Material::new(self.young_modulus, self.poisson_ratio).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            other => other,
        })?;
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }

    pub fn material(&self) -> Material {
        Material::new(self.young_modulus, self.poisson_ratio).expect("validated at load")
    }

    /// Hyperparameters for one family, parsed from the family-prefixed
    /// config keys (the ensemble reuses the forest and kNN keys).
    pub fn family_params(&self, family: ModelFamily) -> Params {
        let mut params = Params::new();
        match family {
            ModelFamily::Ensemble => {
                for (raw, fam, name) in PARAM_KEYS {
                    if !matches!(fam, ModelFamily::Forest | ModelFamily::Knn) {
                        continue;
                    }
                    if let Some(v) = self.raw_params.get(*raw) {
                        let prefix = if *fam == ModelFamily::Forest {
                            "forest_"
                        } else {
                            "knn_"
                        };
                        params.insert(format!("{prefix}{name}"), infer_param(name, v));
                    }
                }
            }
            _ => {
                for (raw, fam, name) in PARAM_KEYS {
                    if *fam != family {
                        continue;
                    }
                    if let Some(v) = self.raw_params.get(*raw) {
                        params.insert((*name).to_string(), infer_param(name, v));
                    }
                }
            }
        }
        params
    }

    /// Canonical sorted key = value dump of every effective setting (used
    /// by manifests; excludes paths).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        push("amplitude", self.amplitude.to_string());
        push("eps", self.eps.to_string());
        for (param, values) in &self.grid {
            push(
                &format!("grid_{param}"),
                values
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        push("k_folds", self.k_folds.to_string());
        push(
            "mesh",
            format!("{}x{}x{}", self.mesh.0, self.mesh.1, self.mesh.2),
        );
        push(
            "models",
            self.models
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("n_samples", self.n_samples.to_string());
        push("poisson_ratio", self.poisson_ratio.to_string());
        push("recipe", self.recipe.as_str().to_string());
        push("rel_tol", self.rel_tol.to_string());
        push("seed", self.seed.to_string());
        push("sensors", self.sensors.kind().as_str().to_string());
        push("split_seed", self.split_seed.to_string());
        push("threads", self.threads.to_string());
        push("train_fraction", self.train_fraction.to_string());
        push("tune_family", self.tune_family.as_str().to_string());
        push("young_modulus", self.young_modulus.to_string());
        for (k, v) in &self.raw_params {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn infer_param(name: &str, value: &str) -> ParamValue {
    if name == "weights" {
        ParamValue::Text(value.to_string())
    } else {
        ParamValue::infer(value)
    }
}
