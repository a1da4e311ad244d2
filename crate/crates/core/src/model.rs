use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// A fitted model that maps one feature row to a predicted log value.
pub trait Regressor {
    fn n_features(&self) -> usize;

    fn predict_row(&self, row: &[f64]) -> Result<f64>;

    fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        x.rows()
            .into_iter()
            .map(|row| match row.as_slice() {
                Some(s) => self.predict_row(s),
                None => self.predict_row(&row.to_vec()),
            })
            .collect()
    }
}

/// Either fitted model family, with the normalization it was trained on.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedModel {
    Lasso(crate::lasso::LassoModel),
    Forest(crate::forest::ForestModel),
}

impl FittedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            FittedModel::Lasso(_) => "lasso",
            FittedModel::Forest(_) => "forest",
        }
    }

    pub fn columns(&self) -> &[String] {
        match self {
            FittedModel::Lasso(m) => &m.columns,
            FittedModel::Forest(m) => &m.columns,
        }
    }

    pub fn norm_stats(&self) -> Option<&crate::features::NormStats> {
        match self {
            FittedModel::Lasso(m) => m.norm_stats.as_ref(),
            FittedModel::Forest(m) => m.norm_stats.as_ref(),
        }
    }

    /// Predictions for the rows of a raw table, normalized with the
    /// model's own statistics first.
    pub fn predict_raw(&self, table: &crate::features::FeatureTable) -> Result<Vec<f64>> {
        if table.columns.as_slice() != self.columns() {
            return Err(Error::DimensionMismatch {
                expected: self.columns().len(),
                found: table.n_cols(),
            });
        }
        let x = match self.norm_stats() {
            Some(stats) => stats.apply(table.x.view())?,
            None => table.x.clone(),
        };
        self.predict(x.view())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut doc = match self {
            FittedModel::Lasso(m) => m.to_json(),
            FittedModel::Forest(m) => m.to_json(),
        };
        doc["kind"] = serde_json::Value::from(self.kind());
        doc
    }
}

impl Regressor for FittedModel {
    fn n_features(&self) -> usize {
        self.columns().len()
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Lasso(m) => m.predict_row(row),
            FittedModel::Forest(m) => m.predict_row(row),
        }
    }
}
