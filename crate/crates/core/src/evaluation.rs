//! k-fold cross-validation, cross-validated R² and grid search.
//!
//! Normalization statistics are refit on every training fold and applied
//! to the held-out fold, so held-out rows never influence their own
//! transform. R² uses the population variance of the whole target vector.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{normalize, FeatureTable};
use crate::forest::{fit_forest, ForestConfig};
use crate::lasso::{fit_lasso, select_lambda_for_sparsity, LassoConfig, ObjectiveScaling};
use crate::model::Regressor;
use crate::tree::{fit_tree, TreeConfig};

/// Model family and hyperparameters evaluated by [`cross_validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Lasso(LassoConfig),
    /// Lasso whose penalty is the largest one giving an active set of
    /// `lo..=hi` features on the whole (normalized) table.
    LassoSparsity {
        lo: usize,
        hi: usize,
        scaling: ObjectiveScaling,
    },
    Forest(ForestConfig),
    Tree { config: TreeConfig, seed: u64 },
    /// Predicts the training mean.
    Mean,
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Lasso(_) | ModelSpec::LassoSparsity { .. } => "lasso",
            ModelSpec::Forest(_) => "forest",
            ModelSpec::Tree { .. } => "tree",
            ModelSpec::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub position: String,
    pub model_kind: String,
    pub lambda: Option<f64>,
    pub mse_cv: f64,
    pub r2_cv: f64,
    pub fold_mses: Vec<f64>,
    pub fold_sizes: Vec<usize>,
    /// Mean squared error on the training folds, weighted like `mse_cv`.
    pub train_mse: f64,
    pub n_samples: usize,
    /// Lasso active set of a refit on all rows, or the forest's most
    /// important features averaged over folds (at most ten).
    pub selected_features: Vec<String>,
}

/// Shuffled folds whose sizes differ by at most one. Indices within a
/// fold are sorted.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || n < k {
        return Err(Error::TooFewSamples { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = idx[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// Population variance.
pub fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

pub fn mse(truth: &[f64], predicted: &[f64]) -> f64 {
    sse(truth, predicted) / truth.len() as f64
}

fn sse(truth: &[f64], predicted: &[f64]) -> f64 {
    truth.iter().zip(predicted).map(|(t, p)| (t - p).powi(2)).sum()
}

struct FoldResult {
    test_sse: f64,
    test_n: usize,
    train_sse: f64,
    train_n: usize,
    importance: Option<Vec<f64>>,
}

struct MeanModel {
    mean: f64,
    d: usize,
}

impl Regressor for MeanModel {
    fn n_features(&self) -> usize {
        self.d
    }

    fn predict_row(&self, _row: &[f64]) -> Result<f64> {
        Ok(self.mean)
    }
}

enum Fitted {
    Model(Box<dyn Regressor + Send + Sync>),
    Forest(crate::forest::ForestModel),
}

fn fit_fold(train: &FeatureTable, spec: &ModelSpec, lambda: Option<f64>) -> Result<Fitted> {
    Ok(match spec {
        ModelSpec::Lasso(cfg) => Fitted::Model(Box::new(fit_lasso(train, cfg)?)),
        ModelSpec::LassoSparsity { scaling, .. } => {
            let cfg = LassoConfig::new(lambda.expect("penalty chosen up front")).with_scaling(*scaling);
            Fitted::Model(Box::new(fit_lasso(train, &cfg)?))
        }
        ModelSpec::Forest(cfg) => Fitted::Forest(fit_forest(train, cfg)?),
        ModelSpec::Tree { config, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Fitted::Model(Box::new(fit_tree(train.x.view(), &train.y, config, &mut rng)?))
        }
        ModelSpec::Mean => Fitted::Model(Box::new(MeanModel {
            mean: train.y.iter().sum::<f64>() / train.y.len() as f64,
            d: train.n_cols(),
        })),
    })
}

impl Fitted {
    fn predict(&self, x: ndarray::ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        match self {
            Fitted::Model(m) => m.predict(x),
            Fitted::Forest(f) => f.predict(x),
        }
    }
}

/// k-fold cross-validation of `spec` on a raw (unnormalized) table.
pub fn cross_validate(table: &FeatureTable, spec: &ModelSpec, k: usize, seed: u64) -> Result<CvReport> {
    let n = table.n_rows();
    let folds = kfold_split(n, k, seed)?;
    let (lambda, mut selected) = match spec {
        ModelSpec::Lasso(cfg) => {
            let full = fit_lasso(&normalize(table)?, cfg)?;
            (Some(cfg.lambda), full.active_set)
        }
        ModelSpec::LassoSparsity { lo, hi, scaling } => {
            let full = normalize(table)?;
            let choice = select_lambda_for_sparsity(&full, (*lo, *hi), *scaling)?;
            let model = fit_lasso(&full, &LassoConfig::new(choice.lambda).with_scaling(*scaling))?;
            (Some(choice.lambda), model.active_set)
        }
        _ => (None, Vec::new()),
    };

    let results = folds
        .par_iter()
        .map(|test_idx| -> Result<FoldResult> {
            let mut in_test = vec![false; n];
            test_idx.iter().for_each(|&i| in_test[i] = true);
            let train_idx: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let train = normalize(&table.select_rows(&train_idx))?;
            let stats = train.norm_stats.as_ref().expect("normalized");
            let test = table.select_rows(test_idx);
            let test_x = stats.apply(test.x.view())?;
            let model = fit_fold(&train, spec, lambda)?;
            let test_pred = model.predict(test_x.view())?;
            let train_pred = model.predict(train.x.view())?;
            Ok(FoldResult {
                test_sse: sse(&test.y, &test_pred),
                test_n: test.y.len(),
                train_sse: sse(&train.y, &train_pred),
                train_n: train.y.len(),
                importance: match &model {
                    Fitted::Forest(f) if !f.no_splits => Some(f.importance.clone()),
                    _ => None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let total_sse: f64 = results.iter().map(|r| r.test_sse).sum();
    let mse_cv = total_sse / n as f64;
    let train_mse =
        results.iter().map(|r| r.train_sse).sum::<f64>() / results.iter().map(|r| r.train_n).sum::<usize>() as f64;
    let var = population_variance(&table.y);

    let importances: Vec<&Vec<f64>> = results.iter().filter_map(|r| r.importance.as_ref()).collect();
    if !importances.is_empty() {
        let mut mean = vec![0.0; table.n_cols()];
        for imp in &importances {
            mean.iter_mut().zip(imp.iter()).for_each(|(m, v)| *m += v);
        }
        let mut ranked: Vec<(usize, f64)> = mean.into_iter().enumerate().filter(|(_, v)| *v > 0.0).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        selected = ranked.iter().take(10).map(|(j, _)| table.columns[*j].clone()).collect();
    }

    Ok(CvReport {
        position: table.label(),
        model_kind: spec.kind().to_string(),
        lambda,
        mse_cv,
        r2_cv: 1.0 - mse_cv / var,
        fold_mses: results.iter().map(|r| r.test_sse / r.test_n as f64).collect(),
        fold_sizes: results.iter().map(|r| r.test_n).collect(),
        train_mse,
        n_samples: n,
        selected_features: selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best_index: usize,
    pub best: ModelSpec,
    pub reports: Vec<CvReport>,
}

/// Cross-validates every grid point with the same folds and keeps the one
/// with the highest R² (first one on ties).
pub fn grid_search(table: &FeatureTable, grid: &[ModelSpec], k: usize, seed: u64) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
    }
    let reports = grid
        .par_iter()
        .map(|spec| cross_validate(table, spec, k, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut best_index = 0;
    for (i, r) in reports.iter().enumerate() {
        if r.r2_cv > reports[best_index].r2_cv {
            best_index = i;
        }
    }
    Ok(GridResult {
        best_index,
        best: grid[best_index].clone(),
        reports,
    })
}
