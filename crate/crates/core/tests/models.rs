//! Model-level checks against planted structure.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use valuecast::evaluation::{grid_search, ModelSpec};
use valuecast::features::{build_position_tables, normalize, FeatureContext, FeatureTable, AGE_FEATURE, AGE_SQ_FEATURE};
use valuecast::lasso::fit_lasso;
use valuecast::synth::{generate_synthetic_corpus, SynthSpec};
use valuecast::tree::{fit_tree, predict_tree, TreeNode};
use valuecast::{LassoConfig, PositionCode, TreeConfig, WindowSpec};

/// Leaf value of the example partition: first on `x0 < 15.75`, then on
/// the minutes thresholds of each side.
fn partition_value(x0: f64, x1: f64) -> f64 {
    if x0 < 15.75 {
        if x0 < 13.25 {
            if x1 < 970.0 { 12.60 } else { 13.24 }
        } else if x1 < 790.0 {
            13.21
        } else {
            14.13
        }
    } else if x1 < 2120.0 {
        if x1 < 450.0 { 12.22 } else { 15.02 }
    } else if x1 < 3100.0 {
        16.15
    } else {
        17.24
    }
}

fn collect_splits(node: &TreeNode, out: &mut Vec<(usize, f64)>) {
    if let TreeNode::Inner { feature, threshold, left, right, .. } = node {
        out.push((*feature, *threshold));
        collect_splits(left, out);
        collect_splits(right, out);
    }
}

#[test]
fn tree_recovers_example_partition() {
    // 20 x 20 points in every cell, strictly inside the cell boundaries.
    let x0_cells = [(11.0, 13.25), (13.25, 15.75), (15.75, 18.0)];
    let x1_cells: [&[(f64, f64)]; 3] = [
        &[(0.0, 970.0), (970.0, 4000.0)],
        &[(0.0, 790.0), (790.0, 4000.0)],
        &[(0.0, 450.0), (450.0, 2120.0), (2120.0, 3100.0), (3100.0, 4000.0)],
    ];
    let grid = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * (k as f64 + 0.5) / 20.0;
    let mut rows = Vec::new();
    for (c0, cells) in x0_cells.iter().zip(x1_cells) {
        for c1 in cells {
            for a in 0..20 {
                for b in 0..20 {
                    rows.push([grid(c0.0, c0.1, a), grid(c1.0, c1.1, b)]);
                }
            }
        }
    }
    let x = Array2::from_shape_fn((rows.len(), 2), |(i, j)| rows[i][j]);
    let y: Vec<f64> = rows.iter().map(|r| partition_value(r[0], r[1])).collect();
    // Greedy splitting need not reproduce the example's split order, so
    // the tree may grow as deep as it needs.
    let tree = fit_tree(x.view(), &y, &TreeConfig::memorize(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();

    for (r, target) in rows.iter().zip(&y) {
        assert_eq!(predict_tree(&tree, r).unwrap(), *target);
    }
    let mut splits = Vec::new();
    collect_splits(&tree.root, &mut splits);
    assert!(splits.len() >= 7);
    // Each generating boundary is recovered to within half a grid step.
    let boundaries = [(0, 15.75), (0, 13.25), (1, 970.0), (1, 790.0), (1, 2120.0), (1, 450.0), (1, 3100.0)];
    for (f, b) in boundaries {
        let step = if f == 0 { 0.2 } else { 100.0 };
        assert!(
            splits.iter().any(|(sf, t)| *sf == f && (t - b).abs() < step),
            "boundary x{f} = {b} not recovered: {splits:?}"
        );
    }
}

#[test]
fn grid_search_ranks_planted_depth_near_top() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 600;
    let x = Array2::from_shape_fn((n, 4), |_| rng.random::<f64>());
    let y: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| {
            let step = match (r[0] < 0.5, r[1] < 0.3) {
                (true, true) => 1.0,
                (true, false) => 2.0,
                (false, true) => 4.0,
                (false, false) => 3.0,
            };
            step + 0.3 * (rng.random::<f64>() - 0.5)
        })
        .collect();
    let table = FeatureTable {
        position: None,
        columns: (0..4).map(|j| format!("x{j}")).collect(),
        kinds: vec![valuecast::features::ColumnKind::Continuous; 4],
        x,
        y,
        player_ids: (0..n as u64).map(valuecast::PlayerId).collect(),
        norm_stats: None,
        degenerate_columns: Vec::new(),
    };
    let depths = [0, 1, 2, 8];
    let grid: Vec<ModelSpec> = depths
        .iter()
        .map(|&d| ModelSpec::Tree {
            config: TreeConfig::with_depth(d),
            seed: 0,
        })
        .chain([ModelSpec::Tree {
            config: TreeConfig::memorize(),
            seed: 0,
        }])
        .collect();
    let result = grid_search(&table, &grid, 5, 3).unwrap();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|a, b| result.reports[*b].r2_cv.total_cmp(&result.reports[*a].r2_cv));
    let oracle = 2; // depth 2 generated the data
    assert!(order[..2].contains(&oracle), "order {order:?}");
    assert!(result.reports[oracle].r2_cv > 0.9);
}

fn position_table(spec: &SynthSpec, code: PositionCode) -> (valuecast::synth::SynthCorpus, FeatureTable) {
    let synth = generate_synthetic_corpus(spec).unwrap();
    let ctx = FeatureContext::new(&synth.corpus, synth.top20_clubs.clone());
    let mut tables = build_position_tables(&synth.corpus, &WindowSpec::default(), &ctx).unwrap();
    let table = tables.tables.remove(&code).unwrap();
    (synth, table)
}

#[test]
fn noiseless_target_is_linear_in_planted_features() {
    let planted = ["total_minutes_on_field", "passes_per_minute", "is_top_20"];
    let spec = SynthSpec {
        n_players: 600,
        n_leagues: 5,
        seed: 3,
        noise_sd: 0.0,
        true_coefficients: planted.iter().map(|c| (c.to_string(), 0.3)).collect(),
        ..SynthSpec::default()
    };
    let (synth, table) = position_table(&spec, PositionCode::CD);
    let leagues: Vec<String> = synth.league_offsets.keys().cloned().collect();
    let cols: Vec<usize> = planted.iter().map(|c| table.column_index(c).unwrap()).collect();
    let n = table.n_rows();
    let width = cols.len() + leagues.len();
    let design = DMatrix::from_fn(n, width, |i, j| {
        if j < cols.len() {
            table.x[[i, cols[j]]]
        } else {
            let league = &synth.corpus.profile(table.player_ids[i]).unwrap().league_id;
            f64::from(u8::from(*league == leagues[j - cols.len()]))
        }
    });
    let y = DVector::from_vec(table.y.clone());
    let coef = design.clone().svd(true, true).solve(&y, 1e-12).unwrap();
    let residual = (&y - &design * coef).amax();
    assert!(residual < 1e-8, "residual {residual}");
}

#[test]
fn tiny_penalty_recovers_negative_age_sq() {
    let spec = SynthSpec {
        n_players: 1500,
        seed: 6,
        position_weights: Some(BTreeMap::from([(PositionCode::FB, 1.0)])),
        second_position_prob: 0.05,
        noise_sd: 0.2,
        true_coefficients: BTreeMap::from([(AGE_SQ_FEATURE.to_string(), -0.5)]),
        ..SynthSpec::default()
    };
    let (_, table) = position_table(&spec, PositionCode::FB);
    let model = fit_lasso(
        &normalize(&table).unwrap(),
        &LassoConfig {
            max_sweeps: 100_000,
            ..LassoConfig::new(1e-4)
        },
    )
    .unwrap();
    let age_sq = model.coefficient(AGE_SQ_FEATURE).unwrap();
    let age = model.coefficient(AGE_FEATURE).unwrap();
    // Both columns scale by their maximum, so the combined quadratic term
    // in raw age carries the sign of the age_sq coefficient.
    assert!(age_sq < 0.0, "age_sq {age_sq}, age {age}");
}
