//! Lasso on a small planted problem: the active set along a penalty path,
//! the KKT residual of each fit, and the penalty that keeps a chosen
//! number of features.
//!
//! Run with `cargo run --example lasso_path`.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use valuecast::lasso::{fit_lasso_matrix, lambda_max, LassoProblem};
use valuecast::{LassoConfig, ObjectiveScaling, Result};

pub struct PathPoint {
    pub lambda: f64,
    pub n_active: usize,
    pub kkt: f64,
}

pub fn run_example() -> Result<Vec<PathPoint>> {
    let (n, d) = (200, 8);
    let truth = [2.0, -1.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let normal = Normal::new(0.0, 1.0).expect("valid sd");
    let x = Array2::from_shape_fn((n, d), |_| normal.sample(&mut rng));
    let y: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| 3.0 + r.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() + 0.3 * normal.sample(&mut rng))
        .collect();

    let scaling = ObjectiveScaling::Mean;
    let top = lambda_max(x.view(), &y, scaling)?;
    let problem = LassoProblem::new(x.view(), &y)?;
    let mut path = Vec::new();
    println!("{:>10}  {:>6}  {:>10}", "lambda", "active", "kkt");
    for step in 0..8 {
        let lambda = top * 0.5f64.powi(step);
        let model = fit_lasso_matrix(x.view(), &y, None, &LassoConfig::new(lambda))?;
        let kkt = problem.kkt_violation(&model.coefficients, lambda, scaling);
        println!("{lambda:>10.5}  {:>6}  {kkt:>10.2e}", model.n_active());
        path.push(PathPoint {
            lambda,
            n_active: model.n_active(),
            kkt,
        });
    }
    let loose = fit_lasso_matrix(x.view(), &y, None, &LassoConfig::new(top * 1e-3))?;
    println!("intercept {:.3}, coefficients {:.3?}", loose.intercept, loose.coefficients);
    Ok(path)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
