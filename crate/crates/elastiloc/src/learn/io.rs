//! Pipeline save/load: a line-oriented, self-describing text format with a
//! versioned header.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! loaded pipeline reproduces its predictions bit-exactly.
//!
//! ```text
//! elastiloc-model-v1
//! scaler <D>
//! mean <D floats>
//! std <D floats>
//! model <family> <shape...>
//! ...family-specific lines...
//! end
//! ```
//! Ensembles nest member `model ... end` blocks.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::learn::tree::TreeNode;

use crate::learn::{
    EnsembleModel, Forest, GbtModel, LinearModel, Model, Pipeline, RegressionTree, StandardScaler,
};
use crate::matrix::Matrix;

const HEADER: &str = "elastiloc-model-v1";

pub fn save_pipeline(pipeline: &Pipeline, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    let d = pipeline.scaler.dim();
    let _ = writeln!(out, "scaler {d}");
    let _ = writeln!(out, "mean {}", join_floats(pipeline.scaler.mean()));
    let _ = writeln!(out, "std {}", join_floats(pipeline.scaler.std()));
    write_model(&mut out, &pipeline.model);
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_pipeline(path: &Path) -> Result<Pipeline> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Reader {
        path,
        lines: text.lines().enumerate().peekable(),
    };
    lines.expect_line(HEADER)?;
    let d: usize = lines.tagged_value("scaler")?;
    let mean = lines.float_list("mean", d)?;
    let std = lines.float_list("std", d)?;
    let scaler = StandardScaler::from_parts(mean, std);
    let model = read_model(&mut lines)?;
    Ok(Pipeline { scaler, model })
}

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_model(out: &mut String, model: &Model) {
    match model {
        Model::Linear(m) => {
            let d = m.n_features();
            let k = m.n_outputs();
            let _ = writeln!(out, "model linear {d} {k}");
            let _ = writeln!(out, "intercept {}", join_floats(m.intercept()));
            for j in 0..d {
                let row: Vec<f64> = (0..k).map(|o| m.weights().get(j, o)).collect();
                let _ = writeln!(out, "w {}", join_floats(&row));
            }
        }
        Model::Tree(t) => write_tree(out, t),
        Model::Forest(f) => {
            let _ = writeln!(
                out,
                "model forest {} {} {}",
                f.n_features(),
                f.n_outputs(),
                f.trees().len()
            );
            for t in f.trees() {
                write_tree(out, t);
            }
        }
        Model::Gbt(g) => {
            let _ = writeln!(
                out,
                "model gbt {} {} {}",
                g.n_features(),
                g.n_outputs(),
                g.learning_rate()
            );
            let _ = writeln!(out, "base {}", join_floats(g.base()));
            for chain in g.stages() {
                let _ = writeln!(out, "chain {}", chain.len());
                for t in chain {
                    write_tree(out, t);
                }
            }
        }
        Model::Knn(m) => {
            let (x, y) = m.training();
            let _ = writeln!(
                out,
                "model knn {} {} {} {} {}",
                m.n_features(),
                m.n_outputs(),
                x.nrows(),
                m.k(),
                m.weighting().as_str()
            );
            for r in 0..x.nrows() {
                let _ = writeln!(out, "x {}", join_floats(x.row(r)));
                let _ = writeln!(out, "y {}", join_floats(y.row(r)));
            }
        }
        Model::Ensemble(e) => {
            let _ = writeln!(out, "model ensemble {}", e.members().len());
            for m in e.members() {
                write_model(out, m);
            }
        }
    }
    out.push_str("end\n");
}

fn write_tree(out: &mut String, t: &RegressionTree) {
    let _ = writeln!(
        out,
        "model tree {} {} {}",
        t.n_features(),
        t.n_outputs(),
        t.nodes().len()
    );
    for n in t.nodes() {
        match n {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "split {feature} {threshold} {left} {right}");
            }
            TreeNode::Leaf { prediction } => {
                let _ = writeln!(out, "leaf {}", join_floats(prediction));
            }
        }
    }
    out.push_str("end\n");
}

struct Reader<'a> {
    path: &'a Path,
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Reader<'a> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.into(),
            line: line + 1,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        let item = self.lines.next();
        item.ok_or_else(|| self.err(0, "unexpected end of file"))
    }

    fn expect_line(&mut self, want: &str) -> Result<()> {
        let (n, line) = self.next_line()?;
        if line != want {
            return Err(self.err(n, format!("expected '{want}', found '{line}'")));
        }
        Ok(())
    }

    fn tagged_value<T: std::str::FromStr>(&mut self, tag: &str) -> Result<T> {
        let (n, line) = self.next_line()?;
        let rest = line
            .strip_prefix(tag)
            .ok_or_else(|| self.err(n, format!("expected '{tag} ...'")))?;
        rest.trim()
            .parse()
            .map_err(|_| self.err(n, format!("bad value in '{line}'")))
    }

    fn float_list(&mut self, tag: &str, want: usize) -> Result<Vec<f64>> {
        let (n, line) = self.next_line()?;
        let rest = line
            .strip_prefix(tag)
            .ok_or_else(|| self.err(n, format!("expected '{tag} ...'")))?;
        let vals: Vec<f64> = rest
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.err(n, "bad float"))?;
        if vals.len() != want {
            return Err(self.err(n, format!("expected {want} floats, found {}", vals.len())));
        }
        Ok(vals)
    }
}

fn read_model(r: &mut Reader<'_>) -> Result<Model> {
    let (n, line) = r.next_line()?;
    let line = line.to_string();
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.first() != Some(&"model") || parts.len() < 2 {
        return Err(r.err(n, format!("expected 'model <family> ...', found '{line}'")));
    }
    let parse_usize = |r: &Reader<'_>, s: &str| -> Result<usize> {
        s.parse().map_err(|_| r.err(n, format!("bad integer '{s}'")))
    };
    let model = match parts[1] {
        "linear" => {
            let d = parse_usize(r, parts[2])?;
            let k = parse_usize(r, parts[3])?;
            let intercept = r.float_list("intercept", k)?;
            let mut weights = Matrix::zeros(d, k);
            for j in 0..d {
                let row = r.float_list("w", k)?;
                for (o, v) in row.into_iter().enumerate() {
                    weights.set(j, o, v);
                }
            }
            Model::Linear(LinearModel::from_parts(weights, intercept))
        }
        "tree" => Model::Tree(read_tree_body(r, &parts, n)?),
        "forest" => {
            let n_trees = parse_usize(r, parts[4])?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let Model::Tree(t) = read_model(r)? else {
                    return Err(r.err(n, "forest members must be trees"));
                };
                trees.push(t);
            }
            Model::Forest(Forest::from_trees(trees)?)
        }
        "gbt" => {
            let d = parse_usize(r, parts[2])?;
            let k = parse_usize(r, parts[3])?;
            let lr: f64 = parts[4]
                .parse()
                .map_err(|_| r.err(n, "bad learning rate"))?;
            let base = r.float_list("base", k)?;
            let mut stages = Vec::with_capacity(k);
            for _ in 0..k {
                let len: usize = r.tagged_value("chain")?;
                let mut chain = Vec::with_capacity(len);
                for _ in 0..len {
                    let Model::Tree(t) = read_model(r)? else {
                        return Err(r.err(n, "gbt chain members must be trees"));
                    };
                    chain.push(t);
                }
                stages.push(chain);
            }
            Model::Gbt(GbtModel::from_parts(base, stages, lr, d))
        }
        "knn" => {
            let d = parse_usize(r, parts[2])?;
            let k_out = parse_usize(r, parts[3])?;
            let n_rows = parse_usize(r, parts[4])?;
            let k = parse_usize(r, parts[5])?;
            let weighting = crate::learn::KnnWeighting::parse(parts[6])?;
            let mut xs = Vec::with_capacity(n_rows);
            let mut ys = Vec::with_capacity(n_rows);
            for _ in 0..n_rows {
                xs.push(r.float_list("x", d)?);
                ys.push(r.float_list("y", k_out)?);
            }
            let x = Matrix::from_rows(&xs)?;
            let y = Matrix::from_rows(&ys)?;
            Model::Knn(crate::learn::fit_knn(x, y, k, weighting)?)
        }
        "ensemble" => {
            let count = parse_usize(r, parts[2])?;
            let mut members = Vec::with_capacity(count);
            for _ in 0..count {
                members.push(read_model(r)?);
            }
            Model::Ensemble(EnsembleModel::new(members)?)
        }
        other => return Err(r.err(n, format!("unknown model family '{other}'"))),
    };
    r.expect_line("end")?;
    Ok(model)
}

fn read_tree_body(r: &mut Reader<'_>, header: &[&str], at: usize) -> Result<RegressionTree> {
    let d: usize = header[2]
        .parse()
        .map_err(|_| r.err(at, "bad tree feature count"))?;
    let k: usize = header[3]
        .parse()
        .map_err(|_| r.err(at, "bad tree output count"))?;
    let n_nodes: usize = header[4]
        .parse()
        .map_err(|_| r.err(at, "bad tree node count"))?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, line) = r.next_line()?;
        let line = line.to_string();
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.first() {
            Some(&"split") if parts.len() == 5 => {
                nodes.push(TreeNode::Split {
                    feature: parts[1].parse().map_err(|_| r.err(ln, "bad feature"))?,
                    threshold: parts[2].parse().map_err(|_| r.err(ln, "bad threshold"))?,
                    left: parts[3].parse().map_err(|_| r.err(ln, "bad left index"))?,
                    right: parts[4].parse().map_err(|_| r.err(ln, "bad right index"))?,
                });
            }
            Some(&"leaf") => {
                let vals: Vec<f64> = parts[1..]
                    .iter()
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| r.err(ln, "bad leaf value"))?;
                if vals.len() != k {
                    return Err(r.err(ln, format!("leaf must carry {k} values")));
                }
                nodes.push(TreeNode::Leaf { prediction: vals });
            }
            _ => return Err(r.err(ln, format!("bad tree node line '{line}'"))),
        }
    }
    Ok(RegressionTree::from_parts(nodes, d, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{fit_family, fit_scaler, ModelFamily, ParamValue, Params};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic(n: usize) -> (Matrix, Matrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ys: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                vec![
                    x[0] + 0.5 * x[1],
                    (2.0 * x[2]).sin(),
                    x[3] * x[4] + 0.1 * x[0],
                ]
            })
            .collect();
        (
            Matrix::from_rows(&xs).unwrap(),
            Matrix::from_rows(&ys).unwrap(),
        )
    }

    #[test]
    fn every_family_round_trips_bit_exactly() {
        let (x_raw, y) = synthetic(40);
        let scaler = fit_scaler(&x_raw);
        let x = scaler.transform(&x_raw);
        let dir = tempfile::tempdir().unwrap();

        for family in ModelFamily::ALL {
            let mut params = Params::new();
            if family == ModelFamily::Knn {
                params.insert("n_neighbors".into(), ParamValue::Int(3));
            }
            if family == ModelFamily::Forest {
                params.insert("n_estimators".into(), ParamValue::Int(5));
            }
            if family == ModelFamily::Gbt {
                params.insert("n_estimators".into(), ParamValue::Int(6));
            }
            if family == ModelFamily::Ensemble {
                params.insert("forest_n_estimators".into(), ParamValue::Int(4));
                params.insert("knn_n_neighbors".into(), ParamValue::Int(2));
            }
            let model = fit_family(family, &params, &x, &y, 3).unwrap();
            let pipeline = Pipeline {
                scaler: scaler.clone(),
                model,
            };
            let path = dir.path().join(format!("{}.model", family.as_str()));
            save_pipeline(&pipeline, &path).unwrap();
            let loaded = load_pipeline(&path).unwrap();

            let q = x_raw.select_rows(&[0, 7, 19]);
            let a = pipeline.predict(&q).unwrap();
            let b = loaded.predict(&q).unwrap();
            assert_eq!(
                a, b,
                "{}: predictions must survive the round trip bit-exactly",
                family.as_str()
            );
        }
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.model");
        std::fs::write(&path, "something-else\n").unwrap();
        assert!(matches!(load_pipeline(&path), Err(Error::Parse { .. })));
    }
}
