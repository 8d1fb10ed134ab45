//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them). Criteria 8-11 share the
//! desk-scale datasets built once in `DESK`.
//!
//! Three criteria encode properties that provably depend on the original
//! experiments' unpublished forward model and do not hold under this
//! artifact's documented physics. They are implemented exactly as stated
//! and left red, with the measured numbers and control experiments in
//! their output:
//!
//! * criterion 3 — the fixed (1,1,1) force direction is not
//!   mirror-equivariant (its y component would have to flip sign under a
//!   y-reflection), so mirrored sources cannot give mirrored features; the
//!   solver itself is mirror-exact for y-free load directions.
//! * criterion 8 — with the broad eps=0.01 source the feature map is
//!   near-linearly invertible, making linear regression the strongest
//!   model rather than the weakest; the ordering emerges at eps=0.001.
//! * criterion 9 — pooling configurations mixes in under-resolved
//!   eps=0.001 coarse-mesh rows and degrades the x coordinate despite 4x
//!   the data (y stays within its bound); the pure volume effect holds
//!   when the configuration is fixed.

use std::sync::{Arc, LazyLock};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use elastiloc::cli::{commands, RunConfig};
use elastiloc::datagen::{
    concat_datasets, extract_features, generate_dataset, Dataset, DatasetConfig, SensorLayout,
};
use elastiloc::eval::{
    average_predictions, mean_euclidean_distance, mse, per_coordinate_mean_abs,
    per_coordinate_mse,
};
use elastiloc::fem::{
    assemble, assemble_with_bc, solve, DirichletBc, ForwardSolver, Material, SourceSpec,
    DEFAULT_REL_TOL,
};
use elastiloc::learn::{
    fit_family, fit_knn, train_val_split, KnnWeighting, Model, ModelFamily, ParamValue, Params,
    Pipeline, SplitSpec,
};
use elastiloc::matrix::Matrix;
use elastiloc::mesh::{build_mesh, DomainBounds, HexMesh};
use elastiloc::tune::{grid_search, kfold_indices, ParamGrid};

fn pass(criterion: u32, what: &str) {
    println!("criterion {criterion:02}: PASS — {what}");
}

fn default_mesh() -> Arc<HexMesh> {
    Arc::new(build_mesh((10, 5, 4), DomainBounds::default()).unwrap())
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_01_patch_test() {
    let start = Instant::now();
    let mesh = default_mesh();
    let a = [
        [3.0e-4, -1.0e-4, 2.0e-4],
        [1.0e-4, 5.0e-4, -3.0e-4],
        [-2.0e-4, 2.0e-4, 4.0e-4],
    ];
    let c = [2.0e-4, -1.0e-4, 3.0e-5];
    let exact = move |p: [f64; 3]| {
        [
            a[0][0] * p[0] + a[0][1] * p[1] + a[0][2] * p[2] + c[0],
            a[1][0] * p[0] + a[1][1] * p[1] + a[1][2] * p[2] + c[1],
            a[2][0] * p[0] + a[2][1] * p[1] + a[2][2] * p[2] + c[2],
        ]
    };
    let zero = SourceSpec::new([0.15, 0.0, 0.025], 0.0, 0.01).unwrap();
    let bc = DirichletBc::on_all_boundary_nodes(&mesh, exact);
    let system = assemble_with_bc(&mesh, &Material::default(), &zero, bc);
    let (field, _) = solve(&system, 1e-12).unwrap();

    let scale = field.max_abs();
    let mut worst: f64 = 0.0;
    for (n, u) in field.nodal().iter().enumerate() {
        let want = exact(mesh.node(n));
        for d in 0..3 {
            worst = worst.max((u[d] - want[d]).abs() / scale);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst < 1e-9, "patch test relative error {worst:.3e}");
    assert!(elapsed < 1.0, "patch test took {elapsed:.2}s");
    pass(1, &format!("affine field reproduced to {worst:.1e} in {elapsed:.2}s"));
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_02_gradient_matches_finite_differences() {
    let mesh = default_mesh();
    let source = SourceSpec::new([0.19, -0.012, 0.031], 1.0, 0.01).unwrap();
    let system = assemble(&mesh, &Material::default(), &source).unwrap();
    let (field, _) = solve(&system, DEFAULT_REL_TOL).unwrap();

    let step = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let e = rng.random_range(0..mesh.element_count());
        let xi = [
            rng.random_range(-0.9..0.9),
            rng.random_range(-0.9..0.9),
            rng.random_range(-0.9..0.9),
        ];
        let x = mesh.local_to_global(e, xi);
        let g = field.eval_gradient(x).unwrap();
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += step;
            xm[j] -= step;
            let up = field.eval_displacement(xp).unwrap();
            let um = field.eval_displacement(xm).unwrap();
            for i in 0..3 {
                let fd = (up[i] - um[i]) / (2.0 * step);
                worst = worst.max((g[i][j] - fd).abs());
            }
        }
    }
    assert!(worst < 1e-4, "worst |grad - fd| = {worst:.3e}");
    pass(2, &format!("20 random interior points, worst deviation {worst:.1e}"));
}

// ---------------------------------------------------------------- 3

/// Microphone site permutation under y -> -y (0<->3, 1<->4, 2 fixed) and
/// the per-feature reflection signs (u2 and the mixed y gradient entries
/// flip).
const MIRROR_SITE_PERM: [usize; 5] = [3, 4, 2, 0, 1];
const MIRROR_SIGNS: [f64; 12] = [
    1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0,
];

fn mirror_features(features: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; features.len()];
    for s in 0..5 {
        let sp = MIRROR_SITE_PERM[s];
        for f in 0..12 {
            out[12 * s + f] = MIRROR_SIGNS[f] * features[12 * sp + f];
        }
    }
    out
}

#[test]
fn criterion_03_mirrored_sources_give_mirrored_features() {
    let mesh = default_mesh();
    let solver = ForwardSolver::new(Arc::clone(&mesh), &Material::default(), DEFAULT_REL_TOL)
        .unwrap();
    let layout = SensorLayout::microphones();

    let mut worst: f64 = 0.0;
    for center in [[0.15, 0.02, 0.03], [0.11, -0.034, 0.012], [0.22, 0.005, 0.041]] {
        let mirrored = [center[0], -center[1], center[2]];
        let fa = {
            let (field, _) = solver
                .solve_source(&SourceSpec::new(center, 1.0, 0.01).unwrap())
                .unwrap();
            extract_features(&field, &layout).unwrap()
        };
        let fb = {
            let (field, _) = solver
                .solve_source(&SourceSpec::new(mirrored, 1.0, 0.01).unwrap())
                .unwrap();
            extract_features(&field, &layout).unwrap()
        };
        let mapped = mirror_features(&fb);
        let max_mag = fa.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = fa
            .iter()
            .zip(&mapped)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(diff / max_mag);
    }

    if worst < 1e-6 {
        pass(3, &format!("mirrored features agree to {worst:.1e}"));
    } else {
        println!(
            "criterion 03: FAIL — mirror violation {worst:.3e} (threshold 1e-6). Known \
             formulation defect: the body force direction (1,1,1) is fixed, but a y-reflected \
             problem needs its y component negated, so mirrored sources cannot produce mirrored \
             features under any feature sign map. The solver itself is mirror-exact for y-free \
             load directions (violation ~1e-12 in the library's symmetry test)."
        );
    }
    assert!(
        worst < 1e-6,
        "mirror violation {worst:.3e} exceeds 1e-6: the (1,1,1) force direction is not \
         mirror-equivariant (its y component would need to flip sign under reflection); \
         see the decisions ledger and the fem symmetry unit test"
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_doubling_amplitude_doubles_features() {
    let mesh = default_mesh();
    let solver = ForwardSolver::new(Arc::clone(&mesh), &Material::default(), DEFAULT_REL_TOL)
        .unwrap();
    let layout = SensorLayout::microphones();
    let center = [0.13, 0.021, 0.018];

    let f1 = {
        let (field, _) = solver
            .solve_source(&SourceSpec::new(center, 1.0, 0.01).unwrap())
            .unwrap();
        extract_features(&field, &layout).unwrap()
    };
    let f2 = {
        let (field, _) = solver
            .solve_source(&SourceSpec::new(center, 2.0, 0.01).unwrap())
            .unwrap();
        extract_features(&field, &layout).unwrap()
    };
    let scale = f1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for (a, b) in f1.iter().zip(&f2) {
        worst = worst.max((2.0 * a - b).abs() / scale);
    }
    assert!(worst <= 1e-9, "linearity violation {worst:.3e}");
    pass(4, &format!("every feature doubles to {worst:.1e} relative"));
}

// ---------------------------------------------------------------- 5

/// Published (overall, per-coordinate) MSE rows in 1e-5 m^2 units:
/// the six implemented-model rows of the single-file table, the four
/// per-eps rows and the two universal rows.
const TABLE_ROWS: &[(&str, f64, [f64; 3])] = &[
    ("linear-regression", 27.1, [66.1, 9.66, 5.53]),
    ("xgboost", 6.77, [8.02, 3.73, 8.56]),
    ("decision-tree", 5.86, [8.10, 2.49, 6.99]),
    ("knn", 1.62, [1.01, 0.57, 3.27]),
    ("random-forest", 2.53, [3.72, 0.72, 3.15]),
    ("ensemble", 1.69, [1.85, 0.37, 2.84]),
    ("per-eps-0.01-mic", 1.44, [0.49, 0.29, 3.55]),
    ("per-eps-0.01-acc", 1.33, [0.45, 0.28, 3.26]),
    ("per-eps-0.001-mic", 1.53, [0.59, 0.29, 3.71]),
    ("per-eps-0.001-acc", 1.36, [0.43, 0.26, 3.40]),
    ("universal-mic", 1.00, [0.31, 0.18, 2.53]),
    ("universal-acc", 0.92, [0.27, 0.17, 2.31]),
];

/// The published neural-network row is internally inconsistent
/// ((1450 + 172 + 46.6) / 3 = 556.2, printed overall 3.14) and that model
/// family is out of scope; reported, not asserted.
const INCONSISTENT_NN_ROW: (f64, [f64; 3]) = (3.14, [1450.0, 172.0, 46.6]);

fn printed_half_ulp(v: f64) -> f64 {
    let s = format!("{v}");
    match s.split_once('.') {
        Some((_, frac)) => 0.5 * 10f64.powi(-(frac.len() as i32)),
        None => 0.5,
    }
}

#[test]
fn criterion_05_metric_identity_and_published_rows() {
    // Identity on random data to 1e-12.
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let rnd = |rng: &mut ChaCha8Rng, n: usize| {
        Matrix::from_rows(
            &(0..n)
                .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect::<Vec<Vec<f64>>>(),
        )
        .unwrap()
    };
    for n in [1, 7, 100] {
        let t = rnd(&mut rng, n);
        let p = rnd(&mut rng, n);
        let per = per_coordinate_mse(&t, &p).unwrap();
        let mean = per.iter().sum::<f64>() / 3.0;
        let overall = mse(&t, &p).unwrap();
        assert!(
            (mean - overall).abs() < 1e-12,
            "identity violated: {mean} vs {overall}"
        );
    }

    // Published rows: identity within the rounding of the printed values.
    for (label, overall, coords) in TABLE_ROWS {
        let mean = coords.iter().sum::<f64>() / 3.0;
        let tol = printed_half_ulp(*overall)
            + coords.iter().map(|c| printed_half_ulp(*c)).sum::<f64>() / 3.0;
        assert!(
            (mean - overall).abs() <= tol,
            "{label}: mean {mean:.4} vs printed {overall} (tolerance {tol:.4})"
        );
    }

    let (nn_overall, nn_coords) = INCONSISTENT_NN_ROW;
    let nn_mean = nn_coords.iter().sum::<f64>() / 3.0;
    println!(
        "criterion 05: note — neural-network row is inconsistent as printed \
         (coordinate mean {nn_mean:.1} vs overall {nn_overall}); reported, not asserted"
    );
    pass(
        5,
        "overall MSE = mean of per-coordinate MSEs (1e-12) and 12/12 published rows check out",
    );
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_06_learner_oracles() {
    // kNN with k = 1 memorizes its training set.
    let x = Matrix::from_rows(&[
        vec![0.1, 0.9],
        vec![0.4, -0.2],
        vec![-0.7, 0.3],
        vec![0.8, 0.8],
    ])
    .unwrap();
    let y = Matrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 1.0, 1.0],
    ])
    .unwrap();
    let knn = fit_knn(x.clone(), y.clone(), 1, KnnWeighting::Uniform).unwrap();
    for r in 0..x.nrows() {
        assert_eq!(knn.predict_row(x.row(r)), y.row(r).to_vec());
    }

    // Ensemble output is the exact mean of its members' outputs.
    let params: Params = [
        ("forest_n_estimators".to_string(), ParamValue::Int(7)),
        ("knn_n_neighbors".to_string(), ParamValue::Int(2)),
    ]
    .into();
    let Model::Ensemble(ens) =
        fit_family(ModelFamily::Ensemble, &params, &x, &y, 1).unwrap()
    else {
        panic!("expected an ensemble")
    };
    let q = [0.2, 0.1];
    let members: Vec<Vec<f64>> = ens.members().iter().map(|m| m.predict_row(&q)).collect();
    let expect: Vec<f64> = (0..3)
        .map(|o| members.iter().map(|p| p[o]).sum::<f64>() / members.len() as f64)
        .collect();
    assert_eq!(ens.predict_row(&q), expect);

    // GBT training loss is monotone non-increasing in rounds.
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let gx = Matrix::from_rows(
        &(0..50)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let gy = Matrix::from_rows(
        &(0..50)
            .map(|r| {
                let row = gx.row(r);
                vec![row[0] * row[1], (3.0 * row[0]).sin(), row[1]]
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let gbt_params = elastiloc::learn::GbtParams {
        n_estimators: 20,
        max_depth: 2,
        learning_rate: 0.4,
        min_samples_leaf: 1,
    };
    let gbt = elastiloc::learn::fit_gbt(&gx, &gy, &gbt_params).unwrap();
    let mut last = f64::INFINITY;
    for rounds in 0..=20 {
        let preds = Matrix::from_rows(
            &(0..gx.nrows())
                .map(|r| gbt.predict_row_truncated(gx.row(r), rounds))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let loss = mse(&gy, &preds).unwrap();
        assert!(loss <= last + 1e-12, "round {rounds}: {loss} > {last}");
        last = loss;
    }

    // grid_search equals an independent brute-force re-evaluation (2x2).
    let grid = ParamGrid::new(ModelFamily::Tree)
        .add("max_depth", vec![ParamValue::Int(0), ParamValue::Int(3)])
        .add(
            "min_samples_leaf",
            vec![ParamValue::Int(1), ParamValue::Int(4)],
        );
    let result = grid_search(&grid, &gx, &gy, 4, 9).unwrap();
    let folds = kfold_indices(gx.nrows(), 4, 9).unwrap();
    let mut best: Option<(f64, Params)> = None;
    for combo in grid.combinations() {
        let mut total = 0.0;
        for held in 0..folds.len() {
            let tr: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(f, _)| *f != held)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            let p = Pipeline::fit(
                ModelFamily::Tree,
                &combo,
                &gx.select_rows(&tr),
                &gy.select_rows(&tr),
                9,
            )
            .unwrap();
            let pred = p.predict(&gx.select_rows(&folds[held])).unwrap();
            total += mse(&gy.select_rows(&folds[held]), &pred).unwrap();
        }
        let mean = total / folds.len() as f64;
        if best.as_ref().is_none_or(|(b, _)| mean < *b) {
            best = Some((mean, combo));
        }
    }
    let (brute_mse, brute_params) = best.unwrap();
    assert_eq!(result.best, brute_params);
    assert!((result.best_mean_mse - brute_mse).abs() < 1e-15);

    // Tree split on the 4-point set matches exhaustive search.
    let tx = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    let ty = Matrix::from_rows(&[vec![0.0], vec![0.0], vec![1.0], vec![1.0]]).unwrap();
    let tree = elastiloc::learn::fit_tree(&tx, &ty, 1, 1).unwrap();
    // Exhaustive candidates: 0.5, 1.5, 2.5; SSE costs 2/3, 0, 2/3.
    let mut best_threshold = f64::NAN;
    let mut best_cost = f64::INFINITY;
    for t in [0.5, 1.5, 2.5] {
        let (mut ls, mut ln, mut rs, mut rn) = (0.0, 0.0, 0.0, 0.0);
        for r in 0..4 {
            if tx.get(r, 0) <= t {
                ls += ty.get(r, 0);
                ln += 1.0;
            } else {
                rs += ty.get(r, 0);
                rn += 1.0;
            }
        }
        let (lm, rm) = (ls / ln, rs / rn);
        let cost: f64 = (0..4)
            .map(|r| {
                let m = if tx.get(r, 0) <= t { lm } else { rm };
                (ty.get(r, 0) - m).powi(2)
            })
            .sum();
        if cost < best_cost {
            best_cost = cost;
            best_threshold = t;
        }
    }
    assert_eq!(best_threshold, 1.5);
    match &tree.nodes()[0] {
        elastiloc::learn::tree::TreeNode::Split { threshold, .. } => {
            assert_eq!(*threshold, best_threshold)
        }
        other => panic!("expected a root split, got {other:?}"),
    }
    assert_eq!(tree.predict_row(&[0.4]), vec![0.0]);
    assert_eq!(tree.predict_row(&[2.9]), vec![1.0]);

    pass(6, "kNN memorization, exact ensemble mean, GBT monotonicity, grid-search brute force, tree split");
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_07_full_pipeline_is_deterministic() {
    let start = Instant::now();
    let sets: Vec<(String, String)> = vec![
        ("n_samples".into(), "200".into()),
        ("seed".into(), "7".into()),
        ("forest_n_estimators".into(), "25".into()),
        ("gbt_n_estimators".into(), "25".into()),
    ];
    let cfg = RunConfig::load(None, false, &sets).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let ds = commands::cmd_generate(&cfg, &out).unwrap();
        commands::cmd_train(&cfg, &ds, &out).unwrap();
        commands::cmd_evaluate(
            &cfg,
            &[(out.join("model_ensemble.mdl"), ds.clone())],
            &out.join("eval"),
        )
        .unwrap();
        reports.push((
            std::fs::read(out.join("train_report.csv")).unwrap(),
            std::fs::read(out.join("eval/eval_report.csv")).unwrap(),
            std::fs::read(&ds).unwrap(),
            std::fs::read(out.join("model_ensemble.mdl")).unwrap(),
        ));
    }
    assert_eq!(reports[0].0, reports[1].0, "train reports differ");
    assert_eq!(reports[0].1, reports[1].1, "eval reports differ");
    assert_eq!(reports[0].2, reports[1].2, "datasets differ");
    assert_eq!(reports[0].3, reports[1].3, "model files differ");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "pipeline took {elapsed:.0}s (budget 300s)");
    pass(
        7,
        &format!("two 200-sample pipeline runs byte-identical in {elapsed:.1}s total"),
    );
}

// ------------------------------------------------------- shared desk data

struct DeskData {
    mic_single: Dataset,
    mic_universal: Dataset,
    acc_universal: Dataset,
}

const DESK_SEED: u64 = 100;
const UNIVERSAL_SEED: u64 = 200;

fn universal(layout: SensorLayout) -> Dataset {
    // Both eps values x both refinements, 2000 samples per part: the
    // per-configuration density matches the 2000-sample single-file
    // baseline, with 4x the total volume. Part seeds derive from one master
    // so microphone and accelerometer sets share source sequences.
    let mut parts = Vec::new();
    for (i, (eps, mesh)) in [
        (0.01, (10, 5, 4)),
        (0.01, (20, 10, 8)),
        (0.001, (10, 5, 4)),
        (0.001, (20, 10, 8)),
    ]
    .into_iter()
    .enumerate()
    {
        let mut dc = DatasetConfig::new(
            eps,
            mesh,
            layout.clone(),
            2000,
            UNIVERSAL_SEED.wrapping_add(i as u64),
        );
        dc.rel_tol = DEFAULT_REL_TOL;
        let tag = dc.tag();
        parts.push((generate_dataset(&dc).unwrap(), tag));
    }
    concat_datasets(&parts).unwrap()
}

static DESK: LazyLock<DeskData> = LazyLock::new(|| {
    let t0 = Instant::now();
    let mic_single = generate_dataset(&DatasetConfig::new(
        0.01,
        (10, 5, 4),
        SensorLayout::microphones(),
        2000,
        DESK_SEED,
    ))
    .unwrap();
    let mic_universal = universal(SensorLayout::microphones());
    let acc_universal = universal(SensorLayout::accelerometers());
    eprintln!(
        "[desk data: 2000 single + 2x8000 universal samples in {:.0}s]",
        t0.elapsed().as_secs_f64()
    );
    DeskData {
        mic_single,
        mic_universal,
        acc_universal,
    }
});

const SPLIT: SplitSpec = SplitSpec {
    train_fraction: 0.7,
    seed: 11,
};

fn desk_params(family: ModelFamily) -> Params {
    // Desk-scale defaults: forest 100 x depth 25, kNN k=4 inverse-distance.
    match family {
        ModelFamily::Ensemble => [
            ("forest_n_estimators".to_string(), ParamValue::Int(100)),
            ("forest_max_depth".to_string(), ParamValue::Int(25)),
            ("knn_n_neighbors".to_string(), ParamValue::Int(4)),
            (
                "knn_weights".to_string(),
                ParamValue::Text("distance".into()),
            ),
        ]
        .into(),
        ModelFamily::Knn => [
            ("n_neighbors".to_string(), ParamValue::Int(4)),
            (
                "weights".to_string(),
                ParamValue::Text("distance".into()),
            ),
        ]
        .into(),
        _ => Params::new(),
    }
}

fn fit_and_eval(family: ModelFamily, dataset: &Dataset) -> (f64, Vec<f64>, f64, Vec<f64>) {
    let (train, val) = train_val_split(dataset, &SPLIT).unwrap();
    let pipeline = Pipeline::fit(
        family,
        &desk_params(family),
        &train.features_matrix(),
        &train.labels_matrix(),
        DESK_SEED,
    )
    .unwrap();
    let y_val = val.labels_matrix();
    let pred = pipeline.predict(&val.features_matrix()).unwrap();
    (
        mse(&y_val, &pred).unwrap(),
        per_coordinate_mse(&y_val, &pred).unwrap(),
        mean_euclidean_distance(&y_val, &pred).unwrap(),
        per_coordinate_mean_abs(&y_val, &pred).unwrap(),
    )
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_model_ranking_at_desk_scale() {
    let data = &*DESK;
    let (lr, ..) = fit_and_eval(ModelFamily::Linear, &data.mic_single);
    let (tree, ..) = fit_and_eval(ModelFamily::Tree, &data.mic_single);
    let (knn, ..) = fit_and_eval(ModelFamily::Knn, &data.mic_single);
    let (ens, ..) = fit_and_eval(ModelFamily::Ensemble, &data.mic_single);

    println!(
        "criterion 08: validation MSEs — linear {lr:.3e}, tree {tree:.3e}, knn {knn:.3e}, \
         ensemble {ens:.3e}"
    );
    if !(knn <= lr / 3.0 && ens <= lr / 3.0) {
        // Control: the same pipeline at the narrower source, where the
        // feature-to-position map stops being linearly invertible.
        let control = generate_dataset(&DatasetConfig::new(
            0.001,
            (10, 5, 4),
            SensorLayout::microphones(),
            2000,
            DESK_SEED,
        ))
        .unwrap();
        let (lr_c, ..) = fit_and_eval(ModelFamily::Linear, &control);
        let (knn_c, ..) = fit_and_eval(ModelFamily::Knn, &control);
        println!(
            "criterion 08: FAIL — linear regression is the strongest model here, not the \
             weakest. With the broad eps=0.01 source this forward model produces smooth, \
             noise-free features that 60-column least squares inverts almost exactly \
             (train {lr:.1e} vs validation {lr:.1e}: no overfit), while neighbour methods \
             are pinned to the N=2000 sample-spacing floor (~3e-5 m^2); a 3x margin over \
             linear would need <{:.1e} m^2, which no amount of tuning can reach. Control \
             at eps=0.001 (same pipeline): linear {lr_c:.3e} vs knn {knn_c:.3e} — the \
             expected ordering emerges once the map sharpens.",
            lr / 3.0
        );
    }
    assert!(knn <= tree, "knn {knn:.3e} vs tree {tree:.3e}");
    assert!(ens <= tree, "ensemble {ens:.3e} vs tree {tree:.3e}");
    assert!(
        knn <= lr / 3.0,
        "knn {knn:.3e} exceeds linear/3 {:.3e}: the eps=0.01 forward map is near-linearly \
         invertible under this artifact's physics (see the decisions ledger)",
        lr / 3.0
    );
    assert!(ens <= lr / 3.0, "ensemble {ens:.3e} vs linear/3 {:.3e}", lr / 3.0);
    pass(8, "ensemble and kNN beat linear by >3x and the single tree");
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_09_universal_recipe_improves_x_and_y() {
    let data = &*DESK;
    let (single_all, single_per, ..) = fit_and_eval(ModelFamily::Ensemble, &data.mic_single);
    let (uni_all, uni_per, ..) = fit_and_eval(ModelFamily::Ensemble, &data.mic_universal);

    println!(
        "criterion 09: ensemble per-coordinate MSE — single (x {:.3e}, y {:.3e}), \
         universal 4x2000 (x {:.3e}, y {:.3e}); overall {single_all:.3e} vs {uni_all:.3e}",
        single_per[0], single_per[1], uni_per[0], uni_per[1]
    );

    let ok_x = uni_per[0] <= 1.1 * single_per[0];
    let ok_y = uni_per[1] <= 1.1 * single_per[1];
    if !(ok_x && ok_y) {
        // Control: the pure data-volume effect with the configuration held
        // fixed — half the single-file rows vs all of them.
        let half = data.mic_single.select_rows(&(0..1000).collect::<Vec<_>>());
        let (_, half_per, ..) = fit_and_eval(ModelFamily::Ensemble, &half);
        println!(
            "criterion 09: FAIL — x {} (ratio {:.2}), y {} (ratio {:.2}) against the 1.1x \
             bound, with per-configuration density matched to the baseline (2000 rows each) \
             and 4x the total volume. The narrow eps=0.001 rows are under-resolved on the \
             coarse mesh by design, so their features differ systematically from the \
             eps=0.01 ones and the pooled validation mix is harder along x. Volume control \
             at a fixed configuration: 1000 rows give x {:.3e} / y {:.3e}, 2000 rows give \
             x {:.3e} / y {:.3e} — more data does help when the configuration mix is held \
             fixed.",
            if ok_x { "within" } else { "exceeds" },
            uni_per[0] / single_per[0],
            if ok_y { "within" } else { "exceeds" },
            uni_per[1] / single_per[1],
            half_per[0],
            half_per[1],
            single_per[0],
            single_per[1]
        );
    }
    assert!(
        uni_per[0] <= 1.1 * single_per[0],
        "x: universal {:.3e} vs 1.1 x single {:.3e}; the pooled-configuration gain assumes \
         near-interchangeable features across eps and mesh, which this forward model does \
         not provide (see the decisions ledger)",
        uni_per[0],
        1.1 * single_per[0]
    );
    assert!(
        uni_per[1] <= 1.1 * single_per[1],
        "y: universal {:.3e} vs 1.1 x single {:.3e}",
        uni_per[1],
        1.1 * single_per[1]
    );
    pass(9, "universal-data ensemble x/y MSEs within 10% of (or better than) single-file");
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_prediction_averaging() {
    let data = &*DESK;

    let predict = |dataset: &Dataset| {
        let (train, val) = train_val_split(dataset, &SPLIT).unwrap();
        let pipeline = Pipeline::fit(
            ModelFamily::Ensemble,
            &desk_params(ModelFamily::Ensemble),
            &train.features_matrix(),
            &train.labels_matrix(),
            DESK_SEED,
        )
        .unwrap();
        let y_val = val.labels_matrix();
        let pred = pipeline.predict(&val.features_matrix()).unwrap();
        (y_val, pred)
    };
    let (mic_labels, mic_pred) = predict(&data.mic_universal);
    let (acc_labels, acc_pred) = predict(&data.acc_universal);
    assert_eq!(
        mic_labels, acc_labels,
        "microphone and accelerometer validation labels must align"
    );

    let avg = average_predictions(&mic_pred, &acc_pred).unwrap();
    let mse_mic = mse(&mic_labels, &mic_pred).unwrap();
    let mse_acc = mse(&mic_labels, &acc_pred).unwrap();
    let mse_avg = mse(&mic_labels, &avg).unwrap();
    println!(
        "criterion 10: MSE — microphone {mse_mic:.3e}, accelerometer {mse_acc:.3e}, \
         averaged {mse_avg:.3e}"
    );
    // Magnitude yardstick only: millimetre-order per-coordinate deviations.
    let mad = per_coordinate_mean_abs(&mic_labels, &avg).unwrap();
    println!(
        "criterion 10: info — averaged prediction MAD (x {:.2} mm, y {:.2} mm, z {:.2} mm)",
        1e3 * mad[0],
        1e3 * mad[1],
        1e3 * mad[2]
    );
    assert!(mse_avg <= mse_mic.max(mse_acc) + 1e-15);
    pass(10, "averaged mic/acc prediction no worse than the worse member");
}

// ---------------------------------------------------------------- 11

#[test]
fn criterion_11_more_sensors_are_more_accurate() {
    let data = &*DESK;
    // Nested subsets growing outward from the central site: {2}, {0,1,2}.
    let one = elastiloc::datagen::restrict_sensors(&data.mic_single, &[2]).unwrap();
    let three = elastiloc::datagen::restrict_sensors(&data.mic_single, &[0, 1, 2]).unwrap();

    let (_, _, dist_one, mad_one) = fit_and_eval(ModelFamily::Ensemble, &one);
    let (_, _, dist_three, mad_three) = fit_and_eval(ModelFamily::Ensemble, &three);

    println!(
        "criterion 11: mean distance — 1 sensor {dist_one:.3e} m, 3 sensors {dist_three:.3e} m"
    );
    println!(
        "criterion 11: info — per-coordinate MAD with 3 sensors (x {:.3e}, y {:.3e}, z {:.3e}); \
         coordinate anisotropy reported, not asserted (depends on the chosen boundary \
         conditions); 1-sensor MAD (x {:.3e}, y {:.3e}, z {:.3e})",
        mad_three[0], mad_three[1], mad_three[2], mad_one[0], mad_one[1], mad_one[2]
    );
    assert!(
        dist_one >= 0.9 * dist_three,
        "1-sensor distance {dist_one:.3e} vs 0.9 x 3-sensor {:.3e}",
        0.9 * dist_three
    );
    pass(11, "1-sensor mean distance >= 3-sensor mean distance (10% slack)");
}
