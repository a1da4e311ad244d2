//! L1-penalized least squares solved by cyclic coordinate descent.
//!
//! The solver minimizes, over an unpenalized intercept `a` and weights `b`,
//!
//! ```text
//! Sum:   sum_i (y_i - a - x_i.b)^2          + lambda * |b|_1
//! Mean:  sum_i (y_i - a - x_i.b)^2 / (2n)   + lambda * |b|_1
//! ```
//!
//! `Sum` is the textbook Lagrangian form. `Mean` is the default because it
//! keeps useful penalties in the 1e-3..1e-2 range independently of the
//! sample count. Columns are centered internally, so the intercept is
//! `mean(y) - mean(x).b` and equals `mean(y)` on centered designs.
//!
//! Coordinate descent runs on the centered Gram matrix, so one sweep costs
//! `O(d^2)` regardless of `n`. Sweeps start from `b = 0` and visit columns
//! in their input order; the result is deterministic.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureTable, NormStats};
use crate::model::Regressor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveScaling {
    Sum,
    #[default]
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub lambda: f64,
    pub max_sweeps: usize,
    /// Convergence threshold on both the largest coefficient change in a
    /// sweep and the largest optimality-condition violation.
    pub tol: f64,
    pub objective_scaling: ObjectiveScaling,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            max_sweeps: 1000,
            tol: 1e-7,
            objective_scaling: ObjectiveScaling::Mean,
        }
    }
}

impl LassoConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn with_scaling(mut self, scaling: ObjectiveScaling) -> Self {
        self.objective_scaling = scaling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub columns: Vec<String>,
    pub lambda: f64,
    pub objective_scaling: ObjectiveScaling,
    /// Names of the columns with nonzero coefficients.
    pub active_set: Vec<String>,
    pub converged: bool,
    pub sweeps_used: usize,
    pub norm_stats: Option<NormStats>,
}

impl LassoModel {
    pub fn n_active(&self) -> usize {
        self.active_set.len()
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|j| self.coefficients[j])
    }

    /// JSON document `{lambda, intercept, coefficients: [{name, value}], norm_stats, ...}`.
    pub fn to_json(&self) -> serde_json::Value {
        let coefficients: Vec<_> = self
            .columns
            .iter()
            .zip(&self.coefficients)
            .map(|(name, value)| serde_json::json!({ "name": name, "value": value }))
            .collect();
        serde_json::json!({
            "lambda": self.lambda,
            "objective_scaling": self.objective_scaling,
            "intercept": self.intercept,
            "coefficients": coefficients,
            "active_set": self.active_set,
            "converged": self.converged,
            "sweeps_used": self.sweeps_used,
            "norm_stats": self.norm_stats,
        })
    }
}

impl Regressor for LassoModel {
    fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    fn predict_row(&self, row: &[f64]) -> Result<f64> {
        predict_lasso(self, row)
    }
}

/// `sign(z) * max(|z| - gamma, 0)`.
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Centered sufficient statistics of a least-squares problem.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    n: usize,
    x_means: Vec<f64>,
    y_mean: f64,
    gram: Array2<f64>,
    xty: Vec<f64>,
    yty: f64,
}

/// Result of one coordinate-descent run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub beta: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    /// Objective value before the first sweep and after each sweep.
    pub objective_trace: Vec<f64>,
}

impl Solution {
    pub fn n_active(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }
}

impl LassoProblem {
    pub fn new(x: ArrayView2<'_, f64>, y: &[f64]) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if n < 2 {
            return Err(Error::TooFewRows { needed: 2, found: n });
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let x_means = x.mean_axis(Axis(0)).expect("n >= 2").to_vec();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let mut xc = x.to_owned();
        for mut row in xc.axis_iter_mut(Axis(0)) {
            for (v, m) in row.iter_mut().zip(&x_means) {
                *v -= m;
            }
        }
        let yc: ndarray::Array1<f64> = y.iter().map(|v| v - y_mean).collect();
        let gram = xc.t().dot(&xc);
        let xty = xc.t().dot(&yc).to_vec();
        let yty = yc.dot(&yc);
        Ok(Self {
            n,
            x_means,
            y_mean,
            gram,
            xty,
            yty,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.xty.len()
    }

    pub fn intercept(&self, beta: &[f64]) -> f64 {
        self.y_mean - beta.iter().zip(&self.x_means).map(|(b, m)| b * m).sum::<f64>()
    }

    /// Smallest penalty at which `b = 0` is optimal.
    pub fn lambda_max(&self, scaling: ObjectiveScaling) -> f64 {
        let max = self.xty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match scaling {
            ObjectiveScaling::Sum => 2.0 * max,
            ObjectiveScaling::Mean => max / self.n as f64,
        }
    }

    /// `X'r` for the residual of `beta`, recomputed from scratch.
    fn correlations(&self, beta: &[f64]) -> Vec<f64> {
        let mut c = self.xty.clone();
        for (k, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (cj, g) in c.iter_mut().zip(self.gram.column(k)) {
                    *cj -= g * b;
                }
            }
        }
        c
    }

    fn rss_from(&self, beta: &[f64], c: &[f64]) -> f64 {
        let bx: f64 = beta.iter().zip(&self.xty).map(|(b, v)| b * v).sum();
        let bc: f64 = beta.iter().zip(c).map(|(b, v)| b * v).sum();
        (self.yty - bx - bc).max(0.0)
    }

    pub fn objective(&self, beta: &[f64], lambda: f64, scaling: ObjectiveScaling) -> f64 {
        let c = self.correlations(beta);
        self.objective_from(beta, &c, lambda, scaling)
    }

    fn objective_from(&self, beta: &[f64], c: &[f64], lambda: f64, scaling: ObjectiveScaling) -> f64 {
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        let rss = self.rss_from(beta, c);
        match scaling {
            ObjectiveScaling::Sum => rss + lambda * l1,
            ObjectiveScaling::Mean => rss / (2.0 * self.n as f64) + lambda * l1,
        }
    }

    fn gradient_from(&self, c: &[f64], scaling: ObjectiveScaling) -> Vec<f64> {
        let factor = match scaling {
            ObjectiveScaling::Sum => -2.0,
            ObjectiveScaling::Mean => -1.0 / self.n as f64,
        };
        c.iter().map(|v| factor * v).collect()
    }

    /// Gradient of the smooth (least-squares) part with respect to `beta`.
    pub fn smooth_gradient(&self, beta: &[f64], scaling: ObjectiveScaling) -> Vec<f64> {
        self.gradient_from(&self.correlations(beta), scaling)
    }

    fn kkt_from(beta: &[f64], grad: &[f64], lambda: f64) -> f64 {
        beta.iter()
            .zip(grad)
            .map(|(&b, &g)| {
                if b != 0.0 {
                    (g + lambda * b.signum()).abs()
                } else {
                    (g.abs() - lambda).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of the subgradient optimality conditions.
    pub fn kkt_violation(&self, beta: &[f64], lambda: f64, scaling: ObjectiveScaling) -> f64 {
        Self::kkt_from(beta, &self.smooth_gradient(beta, scaling), lambda)
    }

    pub fn solve(&self, cfg: &LassoConfig) -> Result<Solution> {
        cfg.validate()?;
        let d = self.n_features();
        let scaling = cfg.objective_scaling;
        let threshold = match scaling {
            ObjectiveScaling::Sum => cfg.lambda / 2.0,
            ObjectiveScaling::Mean => cfg.lambda * self.n as f64,
        };
        let mut beta = vec![0.0; d];
        let mut c = self.xty.clone();
        let mut trace = vec![self.objective_from(&beta, &c, cfg.lambda, scaling)];
        let mut converged = false;
        let mut sweeps = 0;
        while sweeps < cfg.max_sweeps {
            sweeps += 1;
            let mut max_delta = 0.0f64;
            for j in 0..d {
                let gjj = self.gram[[j, j]];
                if gjj <= 0.0 {
                    continue;
                }
                let z = c[j] + gjj * beta[j];
                let next = soft_threshold(z, threshold) / gjj;
                let delta = next - beta[j];
                if delta != 0.0 {
                    for (ck, g) in c.iter_mut().zip(self.gram.column(j)) {
                        *ck -= g * delta;
                    }
                    beta[j] = next;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            c = self.correlations(&beta);
            trace.push(self.objective_from(&beta, &c, cfg.lambda, scaling));
            let kkt = Self::kkt_from(&beta, &self.gradient_from(&c, scaling), cfg.lambda);
            if max_delta <= cfg.tol && kkt <= cfg.tol {
                converged = true;
                break;
            }
        }
        Ok(Solution {
            beta,
            converged,
            sweeps,
            objective_trace: trace,
        })
    }
}

/// Penalty above which every coefficient is zero.
pub fn lambda_max(x: ArrayView2<'_, f64>, y: &[f64], scaling: ObjectiveScaling) -> Result<f64> {
    Ok(LassoProblem::new(x, y)?.lambda_max(scaling))
}

fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

fn model_from(problem: &LassoProblem, sol: Solution, cfg: &LassoConfig, columns: Vec<String>) -> LassoModel {
    let active_set = columns
        .iter()
        .zip(&sol.beta)
        .filter(|(_, b)| **b != 0.0)
        .map(|(c, _)| c.clone())
        .collect();
    LassoModel {
        intercept: problem.intercept(&sol.beta),
        coefficients: sol.beta,
        columns,
        lambda: cfg.lambda,
        objective_scaling: cfg.objective_scaling,
        active_set,
        converged: sol.converged,
        sweeps_used: sol.sweeps,
        norm_stats: None,
    }
}

/// Fits on a raw matrix; `columns` defaults to `x0, x1, ...`.
pub fn fit_lasso_matrix(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    columns: Option<&[String]>,
    cfg: &LassoConfig,
) -> Result<LassoModel> {
    let problem = LassoProblem::new(x, y)?;
    let sol = problem.solve(cfg)?;
    let names = columns.map_or_else(|| default_names(x.ncols()), <[String]>::to_vec);
    Ok(model_from(&problem, sol, cfg, names))
}

/// Fits on a feature table, normally one that went through
/// [`crate::features::normalize`]; its statistics travel with the model.
pub fn fit_lasso(table: &FeatureTable, cfg: &LassoConfig) -> Result<LassoModel> {
    let mut model = fit_lasso_matrix(table.x.view(), &table.y, Some(&table.columns), cfg)?;
    model.norm_stats = table.norm_stats.clone();
    Ok(model)
}

pub fn predict_lasso(model: &LassoModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: model.coefficients.len(),
            found: row.len(),
        });
    }
    Ok(model.intercept
        + model
            .coefficients
            .iter()
            .zip(row)
            .map(|(b, x)| b * x)
            .sum::<f64>())
}

/// Outcome of [`select_lambda_for_sparsity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityChoice {
    pub lambda: f64,
    pub n_active: usize,
    /// False when no penalty produced an active set inside the range; the
    /// returned penalty then gives the closest achievable count.
    pub in_range: bool,
}

const BISECTION_STEPS: usize = 60;
const LAMBDA_FLOOR: f64 = 1e-8;
const FALLBACK_GRID: usize = 400;

/// Largest penalty whose active-set size lies in `[lo, hi]`.
///
/// Bisects (geometrically) on the point where the active set shrinks below
/// `lo`; if the active set jumps past `hi` there, scans a grid from
/// `lambda_max` downwards instead.
pub fn select_lambda_for_sparsity(
    table: &FeatureTable,
    (lo, hi): (usize, usize),
    scaling: ObjectiveScaling,
) -> Result<SparsityChoice> {
    if lo > hi {
        return Err(Error::InvalidConfig(format!("empty sparsity range [{lo}, {hi}]")));
    }
    let problem = LassoProblem::new(table.x.view(), &table.y)?;
    let lmax = problem.lambda_max(scaling);
    let count = |lambda: f64| -> Result<usize> {
        Ok(problem
            .solve(&LassoConfig::new(lambda).with_scaling(scaling))?
            .n_active())
    };
    if lo == 0 || lmax == 0.0 {
        return Ok(SparsityChoice {
            lambda: lmax,
            n_active: 0,
            in_range: lo == 0,
        });
    }

    let mut a = lmax * LAMBDA_FLOOR;
    let mut count_a = count(a)?;
    if count_a < lo {
        return Ok(SparsityChoice {
            lambda: a,
            n_active: count_a,
            in_range: false,
        });
    }
    let mut b = lmax;
    for _ in 0..BISECTION_STEPS {
        if b / a < 1.0 + 1e-9 {
            break;
        }
        let m = (a * b).sqrt();
        let cm = count(m)?;
        if cm >= lo {
            a = m;
            count_a = cm;
        } else {
            b = m;
        }
    }
    if count_a <= hi {
        return Ok(SparsityChoice {
            lambda: a,
            n_active: count_a,
            in_range: true,
        });
    }

    let ratio = LAMBDA_FLOOR.powf(1.0 / (FALLBACK_GRID - 1) as f64);
    let mut best: Option<(usize, f64, usize)> = None;
    let mut lambda = lmax;
    for _ in 0..FALLBACK_GRID {
        let c = count(lambda)?;
        if (lo..=hi).contains(&c) {
            return Ok(SparsityChoice {
                lambda,
                n_active: c,
                in_range: true,
            });
        }
        let gap = if c < lo { lo - c } else { c - hi };
        if best.is_none_or(|(g, _, _)| gap < g) {
            best = Some((gap, lambda, c));
        }
        lambda *= ratio;
    }
    let (_, lambda, n_active) = best.expect("grid is non-empty");
    Ok(SparsityChoice {
        lambda,
        n_active,
        in_range: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(seed: u64, n: usize, d: usize) -> (Array2<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
        let y = (0..n)
            .map(|i| x.row(i).iter().enumerate().map(|(j, v)| v * (j as f64 - 1.5)).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        (x, y)
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(2.0, 0.5), 1.5);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
    }

    #[test]
    fn lambda_max_examples() {
        let x = array![[-1.0], [1.0]];
        assert_eq!(lambda_max(x.view(), &[-1.0, 1.0], ObjectiveScaling::Sum).unwrap(), 4.0);
        assert_eq!(lambda_max(x.view(), &[-1.0, 1.0], ObjectiveScaling::Mean).unwrap(), 1.0);
        assert_eq!(lambda_max(x.view(), &[3.0, 3.0], ObjectiveScaling::Sum).unwrap(), 0.0);
    }

    #[test]
    fn one_dimensional_closed_form() {
        // min (b+1)^2 + (b-1)^2 + lambda |b| = 2b^2 - 4b + 2 + lambda |b|
        // gives b = max(0, 1 - lambda / 4).
        let x = array![[-1.0], [1.0]];
        for lambda in [0.0, 1.0, 2.0, 3.9, 4.0, 5.0] {
            let m = fit_lasso_matrix(
                x.view(),
                &[-1.0, 1.0],
                None,
                &LassoConfig::new(lambda).with_scaling(ObjectiveScaling::Sum),
            )
            .unwrap();
            assert_abs_diff_eq!(m.coefficients[0], (1.0 - lambda / 4.0).max(0.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn above_lambda_max_gives_zero() {
        let (x, y) = random_problem(3, 25, 6);
        for scaling in [ObjectiveScaling::Sum, ObjectiveScaling::Mean] {
            let lmax = lambda_max(x.view(), &y, scaling).unwrap();
            let m = fit_lasso_matrix(x.view(), &y, None, &LassoConfig::new(1.01 * lmax).with_scaling(scaling)).unwrap();
            assert!(m.coefficients.iter().all(|b| *b == 0.0));
            assert_eq!(m.intercept, y.iter().sum::<f64>() / y.len() as f64);
            assert!(m.active_set.is_empty());
            let m = fit_lasso_matrix(x.view(), &y, None, &LassoConfig::new(0.9 * lmax).with_scaling(scaling)).unwrap();
            assert!(m.n_active() > 0);
        }
    }

    #[test]
    fn predict_examples() {
        let model = LassoModel {
            intercept: 3.0,
            coefficients: vec![1.0, -2.0],
            columns: vec!["a".into(), "b".into()],
            lambda: 0.1,
            objective_scaling: ObjectiveScaling::Mean,
            active_set: vec!["a".into(), "b".into()],
            converged: true,
            sweeps_used: 1,
            norm_stats: None,
        };
        assert_eq!(predict_lasso(&model, &[0.5, 0.25]).unwrap(), 3.0);
        assert_eq!(predict_lasso(&model, &[0.0, 0.0]).unwrap(), 3.0);
        assert!(matches!(
            predict_lasso(&model, &[0.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        let zero = LassoModel {
            coefficients: vec![0.0, 0.0],
            ..model
        };
        assert_eq!(predict_lasso(&zero, &[7.0, -4.0]).unwrap(), 3.0);
    }

    #[test]
    fn rejects_non_finite_input() {
        let x = array![[1.0], [f64::NAN]];
        assert!(matches!(
            fit_lasso_matrix(x.view(), &[1.0, 2.0], None, &LassoConfig::new(0.1)),
            Err(Error::NonFiniteInput)
        ));
    }

    #[test]
    fn exhausted_sweeps_are_reported() {
        let (x, y) = random_problem(5, 30, 8);
        let cfg = LassoConfig {
            max_sweeps: 1,
            ..LassoConfig::new(1e-4)
        };
        let m = fit_lasso_matrix(x.view(), &y, None, &cfg).unwrap();
        assert!(!m.converged);
        assert_eq!(m.sweeps_used, 1);
    }

    #[test]
    fn sparsity_targets() {
        let (x, y) = random_problem(11, 60, 6);
        let table = crate::features::FeatureTable {
            position: None,
            columns: default_names(6),
            kinds: vec![crate::features::ColumnKind::Continuous; 6],
            x,
            y,
            player_ids: (0..60).map(crate::ingest::PlayerId).collect(),
            norm_stats: None,
            degenerate_columns: vec![],
        };
        let all = select_lambda_for_sparsity(&table, (6, 6), ObjectiveScaling::Mean).unwrap();
        assert!(all.in_range);
        assert_eq!(all.n_active, 6);
        let lmax = lambda_max(table.x.view(), &table.y, ObjectiveScaling::Mean).unwrap();
        assert!(all.lambda < lmax);
        let none = select_lambda_for_sparsity(&table, (0, 0), ObjectiveScaling::Mean).unwrap();
        assert!(none.lambda >= lmax);
        let two = select_lambda_for_sparsity(&table, (2, 3), ObjectiveScaling::Mean).unwrap();
        assert!(two.in_range && (2..=3).contains(&two.n_active));
        // slightly larger penalties drop below the range
        let more = fit_lasso(&table, &LassoConfig::new(two.lambda * 1.01)).unwrap();
        assert!(more.n_active() < 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn objective_never_increases_and_kkt_holds(seed in 0u64..10_000, n in 8usize..40, d in 1usize..8, frac in 0.0f64..0.9) {
            let (x, y) = random_problem(seed, n, d);
            for scaling in [ObjectiveScaling::Sum, ObjectiveScaling::Mean] {
                let problem = LassoProblem::new(x.view(), &y).unwrap();
                let lambda = frac * problem.lambda_max(scaling);
                let cfg = LassoConfig::new(lambda).with_scaling(scaling);
                let sol = problem.solve(&cfg).unwrap();
                for w in sol.objective_trace.windows(2) {
                    prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
                }
                if sol.converged {
                    prop_assert!(problem.kkt_violation(&sol.beta, lambda, scaling) <= 10.0 * cfg.tol);
                }
            }
        }

        #[test]
        fn scaling_target_scales_solution(seed in 0u64..10_000, c in 0.1f64..10.0, frac in 0.05f64..0.8) {
            let (x, y) = random_problem(seed, 30, 5);
            let lmax = lambda_max(x.view(), &y, ObjectiveScaling::Sum).unwrap();
            let lambda = frac * lmax;
            let cfg = |l: f64| LassoConfig { tol: 1e-10, max_sweeps: 100_000, ..LassoConfig::new(l).with_scaling(ObjectiveScaling::Sum) };
            let base = fit_lasso_matrix(x.view(), &y, None, &cfg(lambda)).unwrap();
            let yc: Vec<f64> = y.iter().map(|v| v * c).collect();
            let scaled = fit_lasso_matrix(x.view(), &yc, None, &cfg(lambda * c)).unwrap();
            prop_assert!((scaled.intercept - c * base.intercept).abs() < 1e-6 * c.max(1.0));
            for (a, b) in base.coefficients.iter().zip(&scaled.coefficients) {
                prop_assert!((b - c * a).abs() < 1e-6 * c.max(1.0), "{b} vs {}", c * a);
            }
        }

        #[test]
        fn permuting_columns_permutes_coefficients(seed in 0u64..10_000, frac in 0.0f64..0.8, rot in 1usize..5) {
            let (x, y) = random_problem(seed, 30, 5);
            let perm: Vec<usize> = (0..5).map(|j| (j + rot) % 5).collect();
            let xp = x.select(Axis(1), &perm);
            let lambda = frac * lambda_max(x.view(), &y, ObjectiveScaling::Mean).unwrap();
            let cfg = LassoConfig { tol: 1e-11, max_sweeps: 100_000, ..LassoConfig::new(lambda) };
            let a = fit_lasso_matrix(x.view(), &y, None, &cfg).unwrap();
            let b = fit_lasso_matrix(xp.view(), &y, None, &cfg).unwrap();
            for (k, &j) in perm.iter().enumerate() {
                prop_assert!((b.coefficients[k] - a.coefficients[j]).abs() < 1e-7);
            }
        }
    }
}
