//! Acceptance criteria. Each test prints one `ACn PASS|FAIL` line before
//! asserting, and every tolerance is pinned in a constant next to it.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use ndarray::{array, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use valuecast::config::{ModelKind, RunConfig};
use valuecast::evaluation::{cross_validate, ModelSpec};
use valuecast::features::{normalize, AGE_SQ_FEATURE};
use valuecast::forest::{fit_forest_matrix, predict_forest};
use valuecast::lasso::{fit_lasso, fit_lasso_matrix, lambda_max};
use valuecast::pipeline::{cmd_importance, load_inputs, position_tables, write_synth};
use valuecast::ranking::kendall_tau;
use valuecast::synth::{AgeBell, SynthSpec};
use valuecast::tree::{best_split, fit_tree, impurity, predict_tree, Tree, TreeNode};
use valuecast::{ForestConfig, LassoConfig, ObjectiveScaling, PositionCode, Regressor, TreeConfig};

fn report(id: &str, pass: bool, detail: &str) {
    println!("{id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Array2::from_shape_fn((n, d), |_| normal.sample(rng))
}

/// Centered design and target as nalgebra values.
fn centered(x: &Array2<f64>, y: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let (n, d) = x.dim();
    let mut xc = DMatrix::from_fn(n, d, |i, j| x[[i, j]]);
    for j in 0..d {
        let m = xc.column(j).mean();
        xc.column_mut(j).add_scalar_mut(-m);
    }
    let ym = y.iter().sum::<f64>() / n as f64;
    (xc, DVector::from_iterator(n, y.iter().map(|v| v - ym)))
}

/// `RSS/(2n) + lambda * |b|_1` on centered data.
fn mean_objective(xc: &DMatrix<f64>, yc: &DVector<f64>, b: &DVector<f64>, lambda: f64) -> f64 {
    let r = yc - xc * b;
    r.norm_squared() / (2.0 * xc.nrows() as f64) + lambda * b.abs().sum()
}

/// Exact minimizer by enumerating every sign pattern: on a fixed pattern
/// the objective is a smooth quadratic with a closed-form stationary
/// point, and the global minimum is the best sign-consistent one.
fn brute_force_lasso(xc: &DMatrix<f64>, yc: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let (n, d) = (xc.nrows() as f64, xc.ncols());
    let mut best = DVector::zeros(d);
    let mut best_obj = mean_objective(xc, yc, &best, lambda);
    for code in 0..3usize.pow(d as u32) {
        let mut signs = vec![0.0; d];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = [0.0, 1.0, -1.0][c % 3];
            c /= 3;
        }
        let active: Vec<usize> = (0..d).filter(|&j| signs[j] != 0.0).collect();
        if active.is_empty() {
            continue;
        }
        let xa = xc.select_columns(&active);
        let rhs = xa.transpose() * yc - DVector::from_iterator(active.len(), active.iter().map(|&j| n * lambda * signs[j]));
        let Some(ba) = (xa.transpose() * &xa).lu().solve(&rhs) else {
            continue;
        };
        if active.iter().zip(ba.iter()).any(|(&j, b)| b.signum() != signs[j] || *b == 0.0) {
            continue;
        }
        let mut b = DVector::zeros(d);
        for (&j, v) in active.iter().zip(ba.iter()) {
            b[j] = *v;
        }
        let obj = mean_objective(xc, yc, &b, lambda);
        if obj < best_obj {
            best_obj = obj;
            best = b;
        }
    }
    best
}

/// Largest violation of the subgradient optimality conditions.
fn kkt_residual(xc: &DMatrix<f64>, yc: &DVector<f64>, b: &DVector<f64>, lambda: f64) -> f64 {
    let g = -(xc.transpose() * (yc - xc * b)) / xc.nrows() as f64;
    g.iter()
        .zip(b.iter())
        .map(|(gj, bj)| {
            if *bj != 0.0 {
                (gj + lambda * bj.signum()).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

#[test]
fn ac1_lasso_matches_brute_force_minimizer() {
    const PROBLEMS: usize = 50;
    const COEF_TOL: f64 = 1e-5;
    const KKT_FACTOR: f64 = 10.0;
    const BUDGET: Duration = Duration::from_secs(10);

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg_tol = LassoConfig::default().tol;
    let (mut worst_coef, mut worst_kkt, mut unconverged) = (0.0f64, 0.0f64, 0);
    for _ in 0..PROBLEMS {
        let n = rng.random_range(10..=30);
        let d = rng.random_range(3..=8);
        let x = gaussian_matrix(&mut rng, n, d);
        let truth: Vec<f64> = (0..d)
            .map(|_| if rng.random_bool(0.5) { rng.random_range(-2.0..2.0) } else { 0.0 })
            .collect();
        let y: Vec<f64> = x
            .rows()
            .into_iter()
            .map(|r| 1.0 + r.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() + 0.5 * rng.random::<f64>())
            .collect();
        let (xc, yc) = centered(&x, &y);
        let lmax = (xc.transpose() * &yc).amax() / n as f64;
        let lambda = lmax * rng.random_range(0.02..0.9);

        let model = fit_lasso_matrix(x.view(), &y, None, &LassoConfig::new(lambda)).unwrap();
        let oracle = brute_force_lasso(&xc, &yc, lambda);
        let fitted = DVector::from_vec(model.coefficients.clone());
        worst_coef = worst_coef.max((&fitted - &oracle).amax());
        if model.converged {
            worst_kkt = worst_kkt.max(kkt_residual(&xc, &yc, &fitted, lambda));
        } else {
            unconverged += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_coef <= COEF_TOL && worst_kkt <= KKT_FACTOR * cfg_tol && elapsed < BUDGET;
    report(
        "AC1",
        pass,
        &format!(
            "{PROBLEMS} problems, max coef error {worst_coef:.2e} (tol {COEF_TOL:.0e}), max KKT {worst_kkt:.2e} \
             (tol {:.0e}), {unconverged} unconverged, {elapsed:.2?}",
            KKT_FACTOR * cfg_tol
        ),
    );
    assert!(pass);
}

#[test]
fn ac2_lasso_boundaries() {
    const OLS_TOL: f64 = 1e-6;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (n, d) = (60, 6);
    let x = gaussian_matrix(&mut rng, n, d);
    let y: Vec<f64> = x
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, r)| 2.0 + r.sum() * 0.7 + (i as f64 * 0.37).sin())
        .collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let lmax = lambda_max(x.view(), &y, ObjectiveScaling::Mean).unwrap();
    let mut zero_ok = true;
    for factor in [1.0, 1.5, 10.0] {
        let m = fit_lasso_matrix(x.view(), &y, None, &LassoConfig::new(lmax * factor)).unwrap();
        zero_ok &= m.coefficients.iter().all(|b| *b == 0.0) && m.intercept == y_mean;
    }

    // Normal equations with an intercept column.
    let design = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let target = DVector::from_vec(y.clone());
    let ols = (design.transpose() * &design)
        .lu()
        .solve(&(design.transpose() * &target))
        .expect("full rank");
    let m = fit_lasso_matrix(x.view(), &y, None, &LassoConfig::new(0.0)).unwrap();
    let err = m
        .coefficients
        .iter()
        .enumerate()
        .map(|(j, b)| (b - ols[j + 1]).abs())
        .fold((m.intercept - ols[0]).abs(), f64::max);

    let pass = zero_ok && err <= OLS_TOL;
    report(
        "AC2",
        pass,
        &format!("beta = 0 and intercept = mean(y) at lambda >= lambda_max: {zero_ok}; lambda = 0 vs OLS max error {err:.2e} (tol {OLS_TOL:.0e})"),
    );
    assert!(pass);
}

/// The example tree predicting log value from the log league average
/// (`x0`) and minutes played (`x1`).
fn example_tree() -> Tree {
    let leaf = |v: f64| TreeNode::leaf(v, 1, 0.0);
    let split = |f: usize, t: f64, l: TreeNode, r: TreeNode| TreeNode::split(f, t, 0.0, l, r);
    let root = split(
        0,
        15.75,
        split(0, 13.25, split(1, 970.0, leaf(12.60), leaf(13.24)), split(1, 790.0, leaf(13.21), leaf(14.13))),
        split(1, 2120.0, split(1, 450.0, leaf(12.22), leaf(15.02)), split(1, 3100.0, leaf(16.15), leaf(17.24))),
    );
    Tree::new(root, 2).unwrap()
}

#[test]
fn ac3_cart_worked_examples() {
    const BUDGET: Duration = Duration::from_secs(1);
    let start = Instant::now();

    let var = impurity(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let cfg = TreeConfig {
        min_samples_leaf: 1,
        min_samples_split: 2,
        ..TreeConfig::with_depth(1)
    };
    let x = array![[1.0], [2.0], [3.0], [4.0]];
    let y = [0.0, 0.0, 10.0, 10.0];
    let split = best_split(x.view(), &y, &[0], &cfg).unwrap().expect("a split exists");
    let tree = fit_tree(x.view(), &y, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let fitted_ok = match &tree.root {
        TreeNode::Inner { threshold, left, right, .. } => {
            *threshold == 2.5 && left.is_leaf() && right.is_leaf() && predict_tree(&tree, &[1.0]).unwrap() == 0.0
                && predict_tree(&tree, &[4.0]).unwrap() == 10.0
        }
        TreeNode::Leaf { .. } => false,
    };

    let fig = example_tree();
    let a = predict_tree(&fig, &[14.0, 500.0]).unwrap();
    let b = predict_tree(&fig, &[16.0, 2500.0]).unwrap();
    let elapsed = start.elapsed();

    let pass = var == 1.25
        && split.threshold == 2.5
        && split.weighted_impurity == 0.0
        && fitted_ok
        && a == 13.21
        && b == 16.15
        && elapsed < BUDGET;
    report(
        "AC3",
        pass,
        &format!(
            "impurity {var}, split threshold {} (child impurity {}), fitted tree ok {fitted_ok}, \
             example tree (14, 500) -> {a}, (16, 2500) -> {b}, {elapsed:.2?}",
            split.threshold, split.weighted_impurity
        ),
    );
    assert!(pass);
}

#[test]
fn ac4_forest_axioms() {
    const IMPORTANCE_SUM_TOL: f64 = 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (n, d) = (300, 6);
    let x = gaussian_matrix(&mut rng, n, d);
    let y: Vec<f64> = x.rows().into_iter().map(|r| r[0] * 2.0 + (r[1] > 0.0) as u8 as f64 + 0.2 * r[2] * r[3]).collect();
    let columns: Vec<String> = (0..d).map(|j| format!("c{j}")).collect();

    let forest = fit_forest_matrix(x.view(), &y, &columns, &ForestConfig { n_trees: 40, ..ForestConfig::with_seed(5) }).unwrap();
    let mut mean_ok = true;
    for row in x.rows() {
        let row = row.to_vec();
        let mut sum = 0.0;
        for t in &forest.trees {
            sum += predict_tree(t, &row).unwrap();
        }
        mean_ok &= predict_forest(&forest, &row).unwrap() == sum / forest.trees.len() as f64;
    }
    let imp_sum: f64 = forest.importance.iter().sum();
    let imp_ok = forest.importance.iter().all(|v| *v >= 0.0) && (imp_sum - 1.0).abs() <= IMPORTANCE_SUM_TOL;

    let tree_cfg = TreeConfig::with_depth(5);
    let degenerate = ForestConfig {
        n_trees: 1,
        tree: tree_cfg,
        feature_subset_size: Some(d),
        bootstrap: false,
        seed: 9,
    };
    let single = fit_forest_matrix(x.view(), &y, &columns, &degenerate).unwrap();
    let cart = fit_tree(x.view(), &y, &tree_cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let cart_ok = single.predict(x.view()).unwrap() == cart.predict(x.view()).unwrap();

    let pass = mean_ok && imp_ok && cart_ok;
    report(
        "AC4",
        pass,
        &format!("mean identity {mean_ok}, importance >= 0 with sum {imp_sum} ({imp_ok}), degenerate forest equals CART {cart_ok}"),
    );
    assert!(pass);
}

#[test]
fn ac5_planted_signal_importance() {
    const SEEDS: u64 = 20;
    const REQUIRED: usize = 19;
    const BUDGET: Duration = Duration::from_secs(60);
    let (n, informative, noise) = (2000, 5, 20);
    let weights = [1.0, 0.9, 0.8, 0.7, 0.6];

    let start = Instant::now();
    let columns: Vec<String> = (0..informative + noise).map(|j| format!("f{j}")).collect();
    let mut separated = 0;
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x = Array2::from_shape_fn((n, informative + noise), |_| rng.random::<f64>());
        let y: Vec<f64> = x
            .rows()
            .into_iter()
            .map(|r| weights.iter().enumerate().map(|(j, w)| w * r[j]).sum::<f64>() + 0.1 * rng.random::<f64>())
            .collect();
        let forest = fit_forest_matrix(x.view(), &y, &columns, &ForestConfig::with_seed(seed)).unwrap();
        let weakest_signal = forest.importance[..informative].iter().copied().fold(f64::INFINITY, f64::min);
        let strongest_noise = forest.importance[informative..].iter().copied().fold(0.0, f64::max);
        if weakest_signal > strongest_noise {
            separated += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = separated >= REQUIRED && elapsed < BUDGET;
    report(
        "AC5",
        pass,
        &format!("informative features above all noise features in {separated}/{SEEDS} seeds (need {REQUIRED}), {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn ac6_pipeline_recovers_signal_fraction() {
    const SIGNAL: f64 = 0.55;
    const R2_RANGE: (f64, f64) = (0.48, 0.58);
    const ACTIVE_RANGE: (usize, usize) = (10, 15);
    const MIN_ROWS: usize = 5000;
    const BUDGET: Duration = Duration::from_secs(300);

    let start = Instant::now();
    let spec = SynthSpec {
        n_players: 5200,
        seed: 2,
        position_weights: Some(BTreeMap::from([(PositionCode::CD, 1.0)])),
        second_position_prob: 0.1,
        target_signal_fraction: Some(SIGNAL),
        league_effect_sd: 0.9,
        true_coefficients: BTreeMap::from([
            ("total_minutes_on_field".to_string(), 0.3),
            ("is_top_20".to_string(), 0.36),
            ("passes_per_minute".to_string(), 0.06),
            ("interceptions_per_minute".to_string(), 0.06),
            ("ratio_passes".to_string(), 0.045),
        ]),
        ..SynthSpec::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let synth = write_synth(&spec, dir.path()).unwrap();

    let mut cfg = RunConfig::load(&dir.path().join("valuecast.toml")).unwrap();
    cfg.position = Some(PositionCode::CD);
    let inputs = load_inputs(&cfg).unwrap();
    let tables = position_tables(&cfg, &inputs).unwrap();
    let table = &tables[&PositionCode::CD];
    let lasso = ModelSpec::LassoSparsity {
        lo: ACTIVE_RANGE.0,
        hi: ACTIVE_RANGE.1,
        scaling: ObjectiveScaling::Mean,
    };
    let lasso = cross_validate(table, &lasso, cfg.k, cfg.seed).unwrap();
    let forest = cross_validate(table, &ModelSpec::Forest(cfg.forest.config(cfg.seed)), cfg.k, cfg.seed).unwrap();
    let elapsed = start.elapsed();

    let inside = |r: f64| (R2_RANGE.0..=R2_RANGE.1).contains(&r);
    let n_active = lasso.selected_features.len();
    let pass = table.n_rows() >= MIN_ROWS
        && inside(lasso.r2_cv)
        && inside(forest.r2_cv)
        && (ACTIVE_RANGE.0..=ACTIVE_RANGE.1).contains(&n_active)
        && elapsed < BUDGET;
    report(
        "AC6",
        pass,
        &format!(
            "n = {}, planted fraction {SIGNAL} ({}), lasso r2 {:.4} with {n_active} active at lambda {:.5}, \
             forest r2 {:.4}, range {R2_RANGE:?}, {elapsed:.2?}",
            table.n_rows(),
            synth.summary,
            lasso.r2_cv,
            lasso.lambda.unwrap_or(f64::NAN),
            forest.r2_cv
        ),
    );
    assert!(pass);
}

fn read_age_curve(path: &Path) -> Vec<(u32, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# valuecast config_hash="));
    assert_eq!(lines.next(), Some("age,log_value"));
    lines
        .map(|l| {
            let (a, v) = l.split_once(',').unwrap();
            (a.parse().unwrap(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn ac7_age_curve_shape() {
    let spec = SynthSpec {
        n_players: 3000,
        seed: 1,
        position_weights: Some(BTreeMap::from([(PositionCode::MD, 1.0)])),
        second_position_prob: 0.05,
        noise_sd: 0.4,
        league_effect_sd: 0.1,
        age_bell: Some(AgeBell {
            peak: 24.0,
            curvature: 0.01,
        }),
        true_coefficients: BTreeMap::from([
            ("total_minutes_on_field".to_string(), 0.1),
            ("assists_per_minute".to_string(), 0.1),
        ]),
        ..SynthSpec::default()
    };
    let dir = tempfile::tempdir().unwrap();
    write_synth(&spec, dir.path()).unwrap();
    let mut cfg = RunConfig::load(&dir.path().join("valuecast.toml")).unwrap();
    cfg.position = Some(PositionCode::MD);
    cfg.model = Some(ModelKind::Lasso);
    cfg.lasso.age_curve_lambda = 1e-4;
    cmd_importance(&cfg).unwrap();
    let curve = read_age_curve(&cfg.output_path("age_curve_MD.csv"));

    let ages: Vec<u32> = curve.iter().map(|p| p.0).collect();
    let values: Vec<f64> = curve.iter().map(|p| p.1).collect();
    let concave = values.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] < 0.0);
    let (argmax, _) = curve.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let interior = argmax > ages[0] && argmax < *ages.last().unwrap();

    // Large penalty: half of the smallest penalty that zeroes everything.
    let inputs = load_inputs(&cfg).unwrap();
    let table = normalize(&position_tables(&cfg, &inputs).unwrap()[&PositionCode::MD]).unwrap();
    let lmax = lambda_max(table.x.view(), &table.y, ObjectiveScaling::Mean).unwrap();
    let large = fit_lasso(&table, &LassoConfig::new(0.5 * lmax)).unwrap();
    let age_sq = large.coefficient(AGE_SQ_FEATURE).unwrap();
    let only_age_sq = large.active_set == [AGE_SQ_FEATURE.to_string()] && age_sq < 0.0;

    let pass = ages == (16..=40).collect::<Vec<_>>() && concave && interior && only_age_sq;
    report(
        "AC7",
        pass,
        &format!(
            "lambda 1e-4 curve concave {concave}, maximum at age {argmax} (planted 24); \
             lambda {:.4} active {:?} with age_sq coefficient {age_sq:.4}",
            large.lambda, large.active_set
        ),
    );
    assert!(pass);
}

fn pair_count_tau(a: &[u32], b: &[u32]) -> f64 {
    let pos = |r: &[u32], v: u32| r.iter().position(|x| *x == v).unwrap();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let (u, v) = (a[i], a[j]);
            if (pos(a, u) < pos(a, v)) == (pos(b, u) < pos(b, v)) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n = a.len() as i64;
    (concordant - discordant) as f64 / (n * (n - 1) / 2) as f64
}

#[test]
fn ac8_kendall_tau_matches_pair_counting() {
    const PAIRS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    let mut extremes_ok = true;
    for _ in 0..PAIRS {
        let n = rng.random_range(2..=8u32);
        let mut a: Vec<u32> = (0..n).collect();
        let mut b = a.clone();
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        if kendall_tau(&a, &b).unwrap() != pair_count_tau(&a, &b) {
            mismatches += 1;
        }
        let reversed: Vec<u32> = a.iter().rev().copied().collect();
        extremes_ok &= kendall_tau(&a, &a).unwrap() == 1.0 && kendall_tau(&a, &reversed).unwrap() == -1.0;
    }
    let pass = mismatches == 0 && extremes_ok;
    report(
        "AC8",
        pass,
        &format!("{mismatches} mismatches over {PAIRS} permutation pairs, identical/reversed give +1/-1: {extremes_ok}"),
    );
    assert!(pass);
}

fn run_cli(args: &[&str], cwd: &Path) {
    let out = Command::new(env!("CARGO_BIN_EXE_valuecast")).args(args).current_dir(cwd).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn ac9_end_to_end_runs_are_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    let spec = "n_players = 1200\nseed = 17\nnoise_sd = 0.4\n\n[true_coefficients]\ntotal_minutes_on_field = 0.3\n\n\
                [age_bell]\npeak = 25.0\ncurvature = 0.01\n";
    std::fs::write(root.path().join("spec.toml"), spec).unwrap();
    let mut snapshots = Vec::new();
    for run in ["a", "b"] {
        let data = format!("data_{run}");
        run_cli(&["synth", "--config", "spec.toml", "--out", &data], root.path());
        let config = root.path().join(&data).join("valuecast.toml");
        let mut text = std::fs::read_to_string(&config).unwrap();
        text.push_str("\n[forest]\nn_trees = 25\n");
        std::fs::write(&config, text).unwrap();
        let config = format!("{data}/valuecast.toml");
        let out = format!("out_{run}");
        for cmd in ["ingest", "features", "train", "evaluate", "importance", "rank"] {
            run_cli(&[cmd, "--config", &config, "--position", "WG", "--out", &out, "--seed", "3"], root.path());
        }
        let mut files = snapshot(&root.path().join(&data));
        files.extend(snapshot(&root.path().join(&out)).into_iter().map(|(k, v)| (format!("out/{k}"), v)));
        snapshots.push(files);
    }
    let names: Vec<&String> = snapshots[0].keys().collect();
    let differing: Vec<&String> = names.iter().copied().filter(|k| snapshots[1].get(*k) != snapshots[0].get(*k)).collect();
    let has_models = names.iter().any(|k| k.starts_with("out/model_WG_"));
    let pass = differing.is_empty() && snapshots[0].len() == snapshots[1].len() && has_models;
    report(
        "AC9",
        pass,
        &format!("{} artifacts compared across two runs, {} differ {differing:?}", names.len(), differing.len()),
    );
    assert!(pass);
}
