//! Bagged regression forests and impurity-decrease feature importance.

use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureTable, NormStats};
use crate::model::Regressor;
use crate::tree::{fit_tree_on_rows, predict_tree, Tree, TreeConfig, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Depth and leaf-size limits of each tree. Its own
    /// `feature_subset_size` is ignored in favour of the forest's.
    pub tree: TreeConfig,
    /// Candidate features per node; `None` means `ceil(d / 3)`.
    pub feature_subset_size: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            tree: TreeConfig::default(),
            feature_subset_size: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn subset_size(&self, d: usize) -> usize {
        self.feature_subset_size.unwrap_or(d.div_ceil(3))
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.tree.validate()?;
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        let k = self.subset_size(d);
        if k == 0 || k > d {
            return Err(Error::InvalidConfig(format!(
                "feature_subset_size must lie in [1, {d}], got {k}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub columns: Vec<String>,
    pub trees: Vec<Tree>,
    /// Row `k` is the normalized importance within tree `k` (zeros for a
    /// tree without splits).
    pub per_tree_importance: Vec<Vec<f64>>,
    pub importance: Vec<f64>,
    /// True when no tree split; `importance` is then all zeros.
    pub no_splits: bool,
    pub norm_stats: Option<NormStats>,
}

impl ForestModel {
    /// `(name, importance)` sorted by decreasing importance, ties by name.
    pub fn ranked_importance(&self) -> Vec<(String, f64)> {
        let mut out: Vec<_> = self.columns.iter().cloned().zip(self.importance.iter().copied()).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// JSON document `{config, seed, trees, importance: [{name, value}], ...}`.
    pub fn to_json(&self) -> serde_json::Value {
        let importance: Vec<_> = self
            .columns
            .iter()
            .zip(&self.importance)
            .map(|(name, value)| serde_json::json!({ "name": name, "value": value }))
            .collect();
        serde_json::json!({
            "config": self.config,
            "seed": self.config.seed,
            "columns": self.columns,
            "trees": self.trees,
            "importance": importance,
            "no_splits": self.no_splits,
            "norm_stats": self.norm_stats,
        })
    }
}

impl Regressor for ForestModel {
    fn n_features(&self) -> usize {
        self.columns.len()
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        predict_forest(self, row)
    }
}

/// Mean of the tree predictions, summed left to right.
pub fn predict_forest(model: &ForestModel, row: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for tree in &model.trees {
        sum += predict_tree(tree, row)?;
    }
    Ok(sum / model.trees.len() as f64)
}

/// `w_n V_n - w_l V_l - w_r V_r`, with weights relative to `total_samples`.
pub fn node_importance(node: &TreeNode, total_samples: usize) -> Result<f64> {
    match node {
        TreeNode::Leaf { .. } => Err(Error::LeafNode),
        TreeNode::Inner {
            n_samples,
            impurity,
            left,
            right,
            ..
        } => {
            let total = total_samples as f64;
            let w = |n: usize| n as f64 / total;
            Ok(w(*n_samples) * impurity
                - w(left.n_samples()) * left.impurity()
                - w(right.n_samples()) * right.impurity())
        }
    }
}

/// Share of the total impurity decrease attributed to each feature.
pub fn tree_feature_importance(tree: &Tree) -> Result<Vec<f64>> {
    let total_samples = tree.root.n_samples();
    let mut out = vec![0.0; tree.n_features];
    let mut any = false;
    for node in tree.root.nodes() {
        if let TreeNode::Inner { feature, .. } = node {
            out[*feature] += node_importance(node, total_samples)?;
            any = true;
        }
    }
    if !any {
        return Err(Error::NoSplits);
    }
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|v| *v /= total);
    }
    Ok(out)
}

/// Sum of per-tree importances, renormalized to one.
pub fn forest_feature_importance(per_tree: &[Vec<f64>], d: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; d];
    for row in per_tree {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoSplits);
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

pub fn fit_forest(table: &FeatureTable, cfg: &ForestConfig) -> Result<ForestModel> {
    let mut model = fit_forest_matrix(table.x.view(), &table.y, &table.columns, cfg)?;
    model.norm_stats = table.norm_stats.clone();
    Ok(model)
}

pub fn fit_forest_matrix(x: ArrayView2<'_, f64>, y: &[f64], columns: &[String], cfg: &ForestConfig) -> Result<ForestModel> {
    let (n, d) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if columns.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: columns.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, found: n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    cfg.validate(d)?;
    let tree_cfg = TreeConfig {
        feature_subset_size: Some(cfg.subset_size(d)),
        ..cfg.tree
    };
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.n_trees).map(|_| master.random()).collect();
    let trees = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let rows: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_on_rows(x, y, &rows, &tree_cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_tree_importance: Vec<Vec<f64>> = trees
        .iter()
        .map(|t| tree_feature_importance(t).unwrap_or_else(|_| vec![0.0; d]))
        .collect();
    let (importance, no_splits) = match forest_feature_importance(&per_tree_importance, d) {
        Ok(v) => (v, false),
        Err(_) => (vec![0.0; d], true),
    };
    Ok(ForestModel {
        config: *cfg,
        columns: columns.to_vec(),
        trees,
        per_tree_importance,
        importance,
        no_splits,
        norm_stats: None,
    })
}
