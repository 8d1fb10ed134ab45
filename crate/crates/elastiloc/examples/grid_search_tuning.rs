//! Grid-search forest and kNN hyperparameters with 5-fold cross-validation.
//!
//! Run with: cargo run --release --example grid_search_tuning

use elastiloc::datagen::{generate_dataset, DatasetConfig, SensorLayout};
use elastiloc::learn::{ModelFamily, ParamValue};
use elastiloc::tune::{grid_search, ParamGrid};

fn main() -> elastiloc::Result<()> {
    let config = DatasetConfig::new(0.01, (10, 5, 4), SensorLayout::microphones(), 400, 7);
    println!("generating {} samples...", config.n_samples);
    let dataset = generate_dataset(&config)?;
    let x = dataset.features_matrix();
    let y = dataset.labels_matrix();

    let forest_grid = ParamGrid::new(ModelFamily::Forest)
        .add("n_estimators", vec![ParamValue::Int(50), ParamValue::Int(100)])
        .add("max_depth", vec![ParamValue::Int(10), ParamValue::Int(25)]);
    let knn_grid = ParamGrid::new(ModelFamily::Knn)
        .add(
            "n_neighbors",
            vec![ParamValue::Int(3), ParamValue::Int(4), ParamValue::Int(8)],
        )
        .add(
            "weights",
            vec![
                ParamValue::Text("uniform".into()),
                ParamValue::Text("distance".into()),
            ],
        );

    for grid in [forest_grid, knn_grid] {
        let family = grid.family();
        println!("\ntuning {} over {} combinations:", family.as_str(), grid.combinations().len());
        let result = grid_search(&grid, &x, &y, 5, 42)?;
        for s in &result.scores {
            let desc: Vec<String> = s.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let marker = if s.params == result.best { " <- best" } else { "" };
            println!("  {:<40} mean CV mse {:.4e}{marker}", desc.join(", "), s.mean_mse);
        }
    }
    Ok(())
}
