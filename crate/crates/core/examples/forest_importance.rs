//! Random forest on data where three of twelve features carry signal,
//! with the importance ranking the forest assigns.
//!
//! Run with `cargo run --release --example forest_importance`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use valuecast::forest::fit_forest_matrix;
use valuecast::{ForestConfig, Regressor, Result};

pub fn run_example() -> Result<Vec<(String, f64)>> {
    let (n, d) = (600, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Array2::from_shape_fn((n, d), |_| rng.random::<f64>());
    let y: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| 4.0 * r[0] + 2.0 * (r[1] > 0.5) as u8 as f64 + r[2] * r[2] + 0.1 * rng.random::<f64>())
        .collect();
    let columns: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    let cfg = ForestConfig {
        n_trees: 50,
        ..ForestConfig::with_seed(7)
    };
    let forest = fit_forest_matrix(x.view(), &y, &columns, &cfg)?;
    let ranked = forest.ranked_importance();
    for (name, value) in ranked.iter().take(5) {
        println!("{name:<4} {value:.4}");
    }
    let fitted = forest.predict(x.view())?;
    let mse = fitted.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64;
    println!("training mse {mse:.4}");
    Ok(ranked)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
