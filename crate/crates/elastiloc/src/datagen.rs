//! Dataset generation: sample random source positions, run one forward
//! solve per sample, read (u, grad u) at the surface sensor sites and
//! persist the labelled rows as CSV with a key = value metadata sidecar.
//!
//! All floating point in the CSV is written with 17 significant digits, so
//! files are byte-reproducible and parse back to the exact same values.
//! Generation is parallel across samples; row order always follows the
//! source-sampling order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{ForwardSolver, DisplacementField, Material, SourceSpec};
use crate::matrix::Matrix;
use crate::mesh::{build_mesh, DomainBounds};

/// Values per sensor site: u1, u2, u3 followed by the nine gradient entries
/// in row-major order (du1/dx, du1/dy, du1/dz, du2/dx, ...).
pub const FEATURES_PER_SITE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Microphone,
    Accelerometer,
    Custom,
}

impl SensorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SensorKind::Microphone => "microphone",
            SensorKind::Accelerometer => "accelerometer",
            SensorKind::Custom => "custom",
        }
    }
}

/// Sensor sites on the top face z = z_hi, given as (x, y) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLayout {
    kind: SensorKind,
    sites: Vec<(f64, f64)>,
}

impl SensorLayout {
    /// The five microphone sites.
    pub fn microphones() -> Self {
        SensorLayout {
            kind: SensorKind::Microphone,
            sites: vec![
                (0.12, 0.01),
                (0.18, 0.01),
                (0.15, 0.00),
                (0.12, -0.01),
                (0.18, -0.01),
            ],
        }
    }

    /// The four accelerometer sites.
    pub fn accelerometers() -> Self {
        SensorLayout {
            kind: SensorKind::Accelerometer,
            sites: vec![(0.15, 0.01), (0.12, 0.00), (0.18, 0.00), (0.15, -0.01)],
        }
    }

    pub fn custom(sites: Vec<(f64, f64)>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument(
                "custom sensor layout needs at least one site".into(),
            ));
        }
        Ok(SensorLayout {
            kind: SensorKind::Custom,
            sites,
        })
    }

    pub fn kind(&self) -> SensorKind {
        self.kind
    }

    pub fn sites(&self) -> &[(f64, f64)] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn feature_len(&self) -> usize {
        FEATURES_PER_SITE * self.sites.len()
    }

    /// Column names in extraction order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.feature_len());
        for s in 0..self.sites.len() {
            for c in ["u1", "u2", "u3"] {
                names.push(format!("s{s}_{c}"));
            }
            for i in 1..=3 {
                for d in ["x", "y", "z"] {
                    names.push(format!("s{s}_du{i}d{d}"));
                }
            }
        }
        names
    }

    /// Keep only the given sites (indices into the current layout); blocks
    /// stay in their original site order.
    pub fn restrict(&self, keep: &[usize]) -> Result<SensorLayout> {
        let keep = checked_keep(keep, self.sites.len())?;
        Ok(SensorLayout {
            kind: self.kind,
            sites: keep.iter().map(|&i| self.sites[i]).collect(),
        })
    }
}

/// Validate a keep-list: indices in range and distinct, returned in
/// ascending (original) order.
fn checked_keep(keep: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep list is empty".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument(format!(
                "duplicate site index {}",
                w[0]
            )));
        }
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= n_sites) {
        return Err(Error::InvalidArgument(format!(
            "site index {bad} out of range (layout has {n_sites} sites)"
        )));
    }
    Ok(sorted)
}

/// Everything needed to generate one dataset deterministically.
#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub eps: f64,
    pub divisions: (usize, usize, usize),
    /// Polynomial degree label recorded in metadata; only 1 is supported.
    pub degree: u32,
    pub layout: SensorLayout,
    pub n_samples: usize,
    pub seed: u64,
    pub material: Material,
    pub amplitude: f64,
    pub bounds: DomainBounds,
    pub rel_tol: f64,
    /// Diagnostic hook: when set, every sample uses this source position
    /// instead of a random one.
    pub fixed_source: Option<[f64; 3]>,
}

impl DatasetConfig {
    pub fn new(
        eps: f64,
        divisions: (usize, usize, usize),
        layout: SensorLayout,
        n_samples: usize,
        seed: u64,
    ) -> Self {
        DatasetConfig {
            eps,
            divisions,
            degree: 1,
            layout,
            n_samples,
            seed,
            material: Material::default(),
            amplitude: 1.0,
            bounds: DomainBounds::default(),
            rel_tol: crate::fem::DEFAULT_REL_TOL,
            fixed_source: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
        }
        if self.degree != 1 {
            return Err(Error::InvalidArgument(format!(
                "only trilinear elements (degree 1) are supported, got degree {}",
                self.degree
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        let z_top = self.bounds.z_range.1;
        for &(x, y) in self.layout.sites() {
            if !self.bounds.contains([x, y, z_top]) {
                return Err(Error::Config(format!(
                    "sensor site ({x}, {y}) lies outside the top face"
                )));
            }
        }
        if let Some(p) = self.fixed_source {
            if !self.bounds.contains(p) {
                return Err(Error::Config(format!(
                    "fixed source ({}, {}, {}) lies outside the domain",
                    p[0], p[1], p[2]
                )));
            }
        }
        Ok(())
    }

    /// Short provenance tag, e.g. "eps=0.01;mesh=10x5x4;r=1" (no commas, so
    /// it can sit in a CSV field).
    pub fn tag(&self) -> String {
        format!(
            "eps={};mesh={}x{}x{};r={}",
            self.eps, self.divisions.0, self.divisions.1, self.divisions.2, self.degree
        )
    }
}

/// One labelled observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: [f64; 3],
    /// Set for rows of combined datasets.
    pub provenance: Option<String>,
}

/// A labelled dataset plus the metadata needed to regenerate it.
#[derive(Debug, Clone)]
pub struct Dataset {
    feature_names: Vec<String>,
    samples: Vec<Sample>,
    meta: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        samples: Vec<Sample>,
        meta: BTreeMap<String, String>,
    ) -> Result<Self> {
        let d = feature_names.len();
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "sample {i} has {} features, expected {d}",
                    s.features.len()
                )));
            }
            if !s.features.iter().all(|v| v.is_finite()) || !s.label.iter().all(|v| v.is_finite())
            {
                return Err(Error::InvalidArgument(format!(
                    "sample {i} contains non-finite values"
                )));
            }
        }
        Ok(Dataset {
            feature_names,
            samples,
            meta,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_len(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn site_count(&self) -> usize {
        self.feature_names.len() / FEATURES_PER_SITE
    }

    /// Feature table as an N x D matrix.
    pub fn features_matrix(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.len() * self.feature_len());
        for s in &self.samples {
            data.extend_from_slice(&s.features);
        }
        Matrix::from_vec(self.len(), self.feature_len(), data).expect("consistent by invariant")
    }

    /// Labels as an N x 3 matrix.
    pub fn labels_matrix(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.len() * 3);
        for s in &self.samples {
            data.extend_from_slice(&s.label);
        }
        Matrix::from_vec(self.len(), 3, data).expect("consistent by invariant")
    }

    /// Select rows by index, keeping names and metadata.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
            meta: self.meta.clone(),
        }
    }
}

/// `n` source positions i.i.d. uniform over the box, deterministic in seed.
pub fn sample_sources(n: usize, bounds: &DomainBounds, seed: u64) -> Result<Vec<[f64; 3]>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot sample zero source positions".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            [
                rng.random_range(bounds.x_range.0..bounds.x_range.1),
                rng.random_range(bounds.y_range.0..bounds.y_range.1),
                rng.random_range(bounds.z_range.0..bounds.z_range.1),
            ]
        })
        .collect())
}

/// Concatenate (u, grad u) readings over the layout's sites, in site order.
pub fn extract_features(field: &DisplacementField, layout: &SensorLayout) -> Result<Vec<f64>> {
    let z_top = field.mesh().bounds().z_range.1;
    let mut out = Vec::with_capacity(layout.feature_len());
    for &(x, y) in layout.sites() {
        let p = [x, y, z_top];
        let u = field
            .eval_displacement(p)
            .map_err(|_| Error::Config(format!("sensor site ({x}, {y}) is outside the domain")))?;
        let g = field.eval_gradient(p)?;
        out.extend_from_slice(&u);
        for row in g {
            out.extend_from_slice(&row);
        }
    }
    Ok(out)
}

/// Run the full generation pipeline for one configuration.
///
/// One forward solve per sampled source; bitwise reproducible for a given
/// config, regardless of how many worker threads execute the solves.
pub fn generate_dataset(config: &DatasetConfig) -> Result<Dataset> {
    config.validate()?;
    let mesh = Arc::new(build_mesh(config.divisions, config.bounds)?);
    let solver = ForwardSolver::new(Arc::clone(&mesh), &config.material, config.rel_tol)?;

    let sources = match config.fixed_source {
        Some(p) => vec![p; config.n_samples],
        None => sample_sources(config.n_samples, &config.bounds, config.seed)?,
    };

    let samples: Result<Vec<Sample>> = sources
        .par_iter()
        .enumerate()
        .map(|(i, &center)| {
            let run = || -> Result<Sample> {
                let spec = SourceSpec::new(center, config.amplitude, config.eps)?;
                let (field, _) = solver.solve_source(&spec)?;
                let features = extract_features(&field, &config.layout)?;
                Ok(Sample {
                    features,
                    label: center,
                    provenance: None,
                })
            };
            run().map_err(|e| Error::Sample {
                index: i,
                source: Box::new(e),
            })
        })
        .collect();

    Dataset::new(config.layout.feature_names(), samples?, dataset_meta(config))
}

fn dataset_meta(config: &DatasetConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("format".into(), "elastiloc-dataset-v1".into());
    m.insert("kind".into(), "single".into());
    m.insert("sensor_kind".into(), config.layout.kind().as_str().into());
    m.insert(
        "sites".into(),
        config
            .layout
            .sites()
            .iter()
            .map(|(x, y)| format!("{x},{y}"))
            .collect::<Vec<_>>()
            .join(";"),
    );
    m.insert("eps".into(), config.eps.to_string());
    m.insert(
        "mesh".into(),
        format!(
            "{}x{}x{}",
            config.divisions.0, config.divisions.1, config.divisions.2
        ),
    );
    m.insert("degree".into(), config.degree.to_string());
    m.insert("n_samples".into(), config.n_samples.to_string());
    m.insert("seed".into(), config.seed.to_string());
    m.insert(
        "young_modulus".into(),
        config.material.young_modulus().to_string(),
    );
    m.insert(
        "poisson_ratio".into(),
        config.material.poisson_ratio().to_string(),
    );
    m.insert("amplitude".into(), config.amplitude.to_string());
    m.insert("rel_tol".into(), config.rel_tol.to_string());
    m.insert(
        "bounds".into(),
        format!(
            "{},{};{},{};{},{}",
            config.bounds.x_range.0,
            config.bounds.x_range.1,
            config.bounds.y_range.0,
            config.bounds.y_range.1,
            config.bounds.z_range.0,
            config.bounds.z_range.1
        ),
    );
    m
}

/// Keep only the given sites' feature blocks; labels are unchanged and
/// blocks stay in their original site order.
pub fn restrict_sensors(dataset: &Dataset, keep: &[usize]) -> Result<Dataset> {
    let keep = checked_keep(keep, dataset.site_count())?;
    let mut names = Vec::with_capacity(keep.len() * FEATURES_PER_SITE);
    for (new_s, &s) in keep.iter().enumerate() {
        for f in 0..FEATURES_PER_SITE {
            let old = &dataset.feature_names[s * FEATURES_PER_SITE + f];
            let suffix = old.split_once('_').map(|(_, rest)| rest).unwrap_or(old);
            names.push(format!("s{new_s}_{suffix}"));
        }
    }
    let samples = dataset
        .samples
        .iter()
        .map(|sample| {
            let mut features = Vec::with_capacity(keep.len() * FEATURES_PER_SITE);
            for &s in &keep {
                features.extend_from_slice(
                    &sample.features[s * FEATURES_PER_SITE..(s + 1) * FEATURES_PER_SITE],
                );
            }
            Sample {
                features,
                label: sample.label,
                provenance: sample.provenance.clone(),
            }
        })
        .collect();

    let mut meta = dataset.meta.clone();
    meta.insert(
        "restricted_sites".into(),
        keep.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    if let Some(sites) = dataset.meta.get("sites") {
        let parts: Vec<&str> = sites.split(';').collect();
        let kept: Vec<&str> = keep
            .iter()
            .filter_map(|&i| parts.get(i).copied())
            .collect();
        meta.insert("sites".into(), kept.join(";"));
    }
    Dataset::new(names, samples, meta)
}

/// Row-concatenate datasets with identical feature schemas; each row gets a
/// provenance tag naming the part it came from.
pub fn concat_datasets(parts: &[(Dataset, String)]) -> Result<Dataset> {
    let Some(((first, _), rest)) = parts.split_first() else {
        return Err(Error::InvalidArgument(
            "cannot concatenate zero datasets".into(),
        ));
    };
    for (d, tag) in rest {
        if d.feature_names != first.feature_names {
            return Err(Error::InvalidArgument(format!(
                "dataset '{tag}' has a different feature schema; only layouts with matching \
                 sensors can be row-concatenated"
            )));
        }
    }
    let mut samples = Vec::new();
    for (d, tag) in parts {
        for s in &d.samples {
            samples.push(Sample {
                features: s.features.clone(),
                label: s.label,
                provenance: Some(tag.clone()),
            });
        }
    }
    let mut meta = BTreeMap::new();
    meta.insert("format".into(), "elastiloc-dataset-v1".into());
    meta.insert("kind".into(), "combined".into());
    if let Some(k) = first.meta.get("sensor_kind") {
        meta.insert("sensor_kind".into(), k.clone());
    }
    if let Some(s) = first.meta.get("sites") {
        meta.insert("sites".into(), s.clone());
    }
    meta.insert(
        "parts".into(),
        parts
            .iter()
            .map(|(_, t)| t.clone())
            .collect::<Vec<_>>()
            .join("|"),
    );
    meta.insert("n_samples".into(), samples.len().to_string());
    Dataset::new(first.feature_names.clone(), samples, meta)
}

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `<path>` (CSV) and `<path>.meta` (key = value sidecar).
pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    let has_prov = dataset.samples.iter().any(|s| s.provenance.is_some());
    if let Some(bad) = dataset
        .samples
        .iter()
        .filter_map(|s| s.provenance.as_deref())
        .find(|p| p.contains(',') || p.contains('\n'))
    {
        return Err(Error::InvalidArgument(format!(
            "provenance tag '{bad}' cannot contain commas or newlines"
        )));
    }
    let mut out = String::new();
    for name in &dataset.feature_names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("xc,yc,zc");
    if has_prov {
        out.push_str(",provenance");
    }
    out.push('\n');
    for s in &dataset.samples {
        for v in &s.features {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        let _ = write!(
            out,
            "{},{},{}",
            fmt_f64(s.label[0]),
            fmt_f64(s.label[1]),
            fmt_f64(s.label[2])
        );
        if has_prov {
            out.push(',');
            out.push_str(s.provenance.as_deref().unwrap_or(""));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))?;

    let mut meta = String::new();
    for (k, v) in &dataset.meta {
        let _ = writeln!(meta, "{k} = {v}");
    }
    let meta_path = sidecar_path(path);
    std::fs::write(&meta_path, meta).map_err(|e| Error::io(meta_path, e))?;
    Ok(())
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut p = csv_path.as_os_str().to_owned();
    p.push(".meta");
    PathBuf::from(p)
}

/// Read a dataset CSV (and its sidecar when present).
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: "empty file".into(),
        });
    };
    let cols: Vec<&str> = header.split(',').collect();
    let has_prov = cols.last() == Some(&"provenance");
    let label_at = cols.len() - 3 - usize::from(has_prov);
    if cols.get(label_at..label_at + 3) != Some(&["xc", "yc", "zc"]) {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: "header must end with xc,yc,zc[,provenance]".into(),
        });
    }
    let feature_names: Vec<String> = cols[..label_at].iter().map(|s| s.to_string()).collect();

    let mut samples = Vec::new();
    for (line_no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                path: path.into(),
                line: line_no + 1,
                msg: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                path: path.into(),
                line: line_no + 1,
                msg: format!("bad float '{s}'"),
            })
        };
        let features = fields[..label_at]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<f64>>>()?;
        let label = [
            parse(fields[label_at])?,
            parse(fields[label_at + 1])?,
            parse(fields[label_at + 2])?,
        ];
        let provenance = if has_prov {
            let p = fields[cols.len() - 1];
            (!p.is_empty()).then(|| p.to_string())
        } else {
            None
        };
        samples.push(Sample {
            features,
            label,
            provenance,
        });
    }

    let meta_path = sidecar_path(path);
    let meta = if meta_path.exists() {
        read_meta(&meta_path)?
    } else {
        BTreeMap::new()
    };
    Dataset::new(feature_names, samples, meta)
}

pub fn read_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut meta = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: "expected 'key = value'".into(),
            });
        };
        meta.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(meta)
}
