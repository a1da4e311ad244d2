//! CART regression trees with variance impurity.
//!
//! Samples with `x[feature] < threshold` go left. Candidate thresholds are
//! midpoints of consecutive distinct values, a split must strictly lower
//! the weighted child variance, and ties go to the lowest feature index,
//! then the lowest threshold.

use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Regressor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `usize::MAX` means unlimited.
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    /// Number of candidate features drawn per node; `None` uses all.
    pub feature_subset_size: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self::with_depth(6)
    }
}

impl TreeConfig {
    pub fn with_depth(max_depth: usize) -> Self {
        Self {
            max_depth,
            min_samples_leaf: 5,
            min_samples_split: 10,
            feature_subset_size: None,
        }
    }

    /// Fully grown tree with single-sample leaves.
    pub fn memorize() -> Self {
        Self {
            max_depth: usize::MAX,
            min_samples_leaf: 1,
            min_samples_split: 2,
            feature_subset_size: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig("min_samples_leaf must be >= 1".into()));
        }
        if self.feature_subset_size == Some(0) {
            return Err(Error::InvalidConfig("feature_subset_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Inner {
        feature: usize,
        threshold: f64,
        n_samples: usize,
        impurity: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        prediction: f64,
        n_samples: usize,
        impurity: f64,
    },
}

impl TreeNode {
    pub fn leaf(prediction: f64, n_samples: usize, impurity: f64) -> Self {
        TreeNode::Leaf {
            prediction,
            n_samples,
            impurity,
        }
    }

    /// Inner node whose sample count is the sum of its children's.
    pub fn split(feature: usize, threshold: f64, impurity: f64, left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Inner {
            feature,
            threshold,
            n_samples: left.n_samples() + right.n_samples(),
            impurity,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn n_samples(&self) -> usize {
        match self {
            TreeNode::Inner { n_samples, .. } | TreeNode::Leaf { n_samples, .. } => *n_samples,
        }
    }

    pub fn impurity(&self) -> f64 {
        match self {
            TreeNode::Inner { impurity, .. } | TreeNode::Leaf { impurity, .. } => *impurity,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Inner { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Pre-order traversal.
    pub fn nodes(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            if let TreeNode::Inner { left, right, .. } = node {
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        self.nodes().into_iter().filter(|n| n.is_leaf()).collect()
    }

    pub fn n_inner(&self) -> usize {
        self.nodes().iter().filter(|n| !n.is_leaf()).count()
    }

    /// The leaf a row is routed to. No dimension check.
    pub fn route(&self, row: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Inner {
            feature,
            threshold,
            left,
            right,
            ..
        } = node
        {
            node = if row[*feature] < *threshold { left } else { right };
        }
        node
    }

    fn max_feature(&self) -> Option<usize> {
        self.nodes()
            .into_iter()
            .filter_map(|n| match n {
                TreeNode::Inner { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .max()
    }
}

/// A fitted tree together with the width of the rows it accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub root: TreeNode,
    pub n_features: usize,
}

impl Tree {
    pub fn new(root: TreeNode, n_features: usize) -> Result<Self> {
        if let Some(f) = root.max_feature() {
            if f >= n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    found: f + 1,
                });
            }
        }
        Ok(Self { root, n_features })
    }
}

impl Regressor for Tree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        predict_tree(self, row)
    }
}

pub fn predict_tree(tree: &Tree, row: &[f64]) -> Result<f64> {
    if row.len() != tree.n_features {
        return Err(Error::DimensionMismatch {
            expected: tree.n_features,
            found: row.len(),
        });
    }
    match tree.root.route(row) {
        TreeNode::Leaf { prediction, .. } => Ok(*prediction),
        TreeNode::Inner { .. } => unreachable!("route ends at a leaf"),
    }
}

/// Population variance.
pub fn impurity(targets: &[f64]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    Ok(targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Sample-weighted mean of the two child variances.
    pub weighted_impurity: f64,
}

/// Best legal split of all rows of `x` over `candidates`, or `None` when
/// no split strictly lowers the impurity.
pub fn best_split(x: ArrayView2<'_, f64>, y: &[f64], candidates: &[usize], cfg: &TreeConfig) -> Result<Option<Split>> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if let Some(&f) = candidates.iter().find(|f| **f >= x.ncols()) {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: f + 1,
        });
    }
    if y.is_empty() {
        return Ok(None);
    }
    let builder = Builder::new(x, y, &(0..y.len()).collect::<Vec<_>>());
    let all: Vec<usize> = (0..builder.m).collect();
    let mut sorted = builder.presort();
    let mut candidates = candidates.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    Ok(builder.best_split(&all, &mut sorted, 0, builder.m, &candidates, cfg))
}

/// Fits on every row of `x`.
pub fn fit_tree<R: Rng + ?Sized>(x: ArrayView2<'_, f64>, y: &[f64], cfg: &TreeConfig, rng: &mut R) -> Result<Tree> {
    let rows: Vec<usize> = (0..x.nrows()).collect();
    fit_tree_on_rows(x, y, &rows, cfg, rng)
}

/// Fits on the multiset of rows `rows` (repeats allowed, as in a bootstrap).
pub fn fit_tree_on_rows<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    rows: &[usize],
    cfg: &TreeConfig,
    rng: &mut R,
) -> Result<Tree> {
    cfg.validate()?;
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyTargets);
    }
    if rows.iter().any(|&r| r >= x.nrows()) {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: rows.iter().max().copied().unwrap_or(0) + 1,
        });
    }
    if rows.iter().any(|&r| !y[r].is_finite() || x.row(r).iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteInput);
    }
    let builder = Builder::new(x, y, rows);
    let mut sorted = builder.presort();
    let samples: Vec<usize> = (0..builder.m).collect();
    let root = builder.grow(&samples, &mut sorted, 0, builder.m, 0, cfg, rng);
    Ok(Tree {
        root,
        n_features: x.ncols(),
    })
}

/// Training state for one tree. Samples are positions `0..m` into the
/// (possibly repeated) row list; `sorted[f][lo..hi]` holds the current
/// node's samples ordered by feature `f`.
struct Builder {
    m: usize,
    d: usize,
    cols: Vec<Vec<f64>>,
    ys: Vec<f64>,
}

impl Builder {
    fn new(x: ArrayView2<'_, f64>, y: &[f64], rows: &[usize]) -> Self {
        let d = x.ncols();
        let cols = (0..d)
            .map(|f| rows.iter().map(|&r| x[[r, f]]).collect())
            .collect();
        Self {
            m: rows.len(),
            d,
            cols,
            ys: rows.iter().map(|&r| y[r]).collect(),
        }
    }

    fn presort(&self) -> Vec<Vec<u32>> {
        self.cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..self.m as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect()
    }

    fn node_stats(&self, samples: &[usize]) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&s| self.ys[s]).sum::<f64>() / n;
        let var = samples.iter().map(|&s| (self.ys[s] - mean).powi(2)).sum::<f64>() / n;
        (mean, var)
    }

    fn best_split(
        &self,
        samples: &[usize],
        sorted: &mut [Vec<u32>],
        lo: usize,
        hi: usize,
        candidates: &[usize],
        cfg: &TreeConfig,
    ) -> Option<Split> {
        let m = hi - lo;
        let leaf = cfg.min_samples_leaf.max(1);
        if m < 2 || m < 2 * leaf {
            return None;
        }
        let (mean, node_var) = self.node_stats(samples);
        if node_var <= 0.0 {
            return None;
        }
        let tol = 1e-12 * node_var;
        let total_sum: f64 = samples.iter().map(|&s| self.ys[s] - mean).sum();
        let total_sq: f64 = samples.iter().map(|&s| (self.ys[s] - mean).powi(2)).sum();
        let mf = m as f64;
        let mut best: Option<Split> = None;
        let mut best_value = node_var - tol;
        for &f in candidates {
            let col = &self.cols[f];
            let order = &sorted[f][lo..hi];
            let (mut ls, mut lq) = (0.0, 0.0);
            for i in 1..m {
                let prev = order[i - 1] as usize;
                let yv = self.ys[prev] - mean;
                ls += yv;
                lq += yv * yv;
                if i < leaf || m - i < leaf {
                    continue;
                }
                let a = col[prev];
                let b = col[order[i] as usize];
                if a == b {
                    continue;
                }
                let (nl, nr) = (i as f64, (m - i) as f64);
                let rs = total_sum - ls;
                let rq = total_sq - lq;
                let sse = (lq - ls * ls / nl).max(0.0) + (rq - rs * rs / nr).max(0.0);
                let value = sse / mf;
                if value < best_value {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold <= a {
                        threshold = b;
                    }
                    best_value = value - tol;
                    best = Some(Split {
                        feature: f,
                        threshold,
                        weighted_impurity: value,
                    });
                }
            }
        }
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn grow<R: Rng + ?Sized>(
        &self,
        samples: &[usize],
        sorted: &mut [Vec<u32>],
        lo: usize,
        hi: usize,
        depth: usize,
        cfg: &TreeConfig,
        rng: &mut R,
    ) -> TreeNode {
        let (mean, var) = self.node_stats(samples);
        let leaf = || TreeNode::leaf(mean, samples.len(), var);
        if depth >= cfg.max_depth || samples.len() < cfg.min_samples_split.max(2) || var <= 0.0 {
            return leaf();
        }
        let candidates: Vec<usize> = match cfg.feature_subset_size {
            Some(k) if k < self.d => {
                let mut c = rand::seq::index::sample(rng, self.d, k).into_vec();
                c.sort_unstable();
                c
            }
            _ => (0..self.d).collect(),
        };
        let Some(split) = self.best_split(samples, sorted, lo, hi, &candidates, cfg) else {
            return leaf();
        };
        let col = &self.cols[split.feature];
        let goes_left = |s: usize| col[s] < split.threshold;
        let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&s| goes_left(s));
        let mid = lo + left_samples.len();
        let mut buf: Vec<u32> = Vec::with_capacity(hi - lo);
        for order in sorted.iter_mut() {
            buf.clear();
            let slice = &mut order[lo..hi];
            buf.extend(slice.iter().copied().filter(|&s| !goes_left(s as usize)));
            let mut w = 0;
            for i in 0..slice.len() {
                if goes_left(slice[i] as usize) {
                    slice[w] = slice[i];
                    w += 1;
                }
            }
            slice[w..].copy_from_slice(&buf);
        }
        let left = self.grow(&left_samples, sorted, lo, mid, depth + 1, cfg, rng);
        let right = self.grow(&right_samples, sorted, mid, hi, depth + 1, cfg, rng);
        TreeNode::Inner {
            feature: split.feature,
            threshold: split.threshold,
            n_samples: samples.len(),
            impurity: var,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}
