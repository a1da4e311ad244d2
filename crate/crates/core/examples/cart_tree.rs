//! A single regression tree: best split on a toy table, a fitted tree's
//! structure, routing a row, and the JSON form of the tree.
//!
//! Run with `cargo run --example cart_tree`.

use ndarray::array;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valuecast::tree::{best_split, fit_tree, impurity, predict_tree, TreeNode};
use valuecast::{Result, TreeConfig};

fn describe(node: &TreeNode, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match node {
        TreeNode::Leaf { prediction, n_samples, .. } => {
            out.push_str(&format!("{pad}leaf {prediction:.3} (n={n_samples})\n"));
        }
        TreeNode::Inner { feature, threshold, left, right, .. } => {
            out.push_str(&format!("{pad}x{feature} < {threshold}\n"));
            describe(left, depth + 1, out);
            describe(right, depth + 1, out);
        }
    }
}

pub fn run_example() -> Result<(f64, String)> {
    let x = array![[1.0], [2.0], [3.0], [4.0]];
    let y = [1.0, 2.0, 3.0, 4.0];
    let cfg = TreeConfig {
        min_samples_leaf: 1,
        min_samples_split: 2,
        ..TreeConfig::with_depth(1)
    };
    println!("impurity of y: {}", impurity(&y)?);
    if let Some(split) = best_split(x.view(), &y, &[0], &cfg)? {
        println!("best split: x{} < {}", split.feature, split.threshold);
    }

    // Two features, the second only matters on the right of the first.
    let x = array![
        [1.0, 5.0], [2.0, 1.0], [3.0, 4.0], [4.0, 2.0],
        [6.0, 1.0], [7.0, 2.0], [8.0, 8.0], [9.0, 9.0]
    ];
    let y = [1.0, 1.2, 0.9, 1.1, 3.0, 3.2, 7.0, 7.1];
    let cfg = TreeConfig {
        min_samples_leaf: 1,
        min_samples_split: 2,
        ..TreeConfig::with_depth(2)
    };
    let tree = fit_tree(x.view(), &y, &cfg, &mut ChaCha8Rng::seed_from_u64(0))?;
    let mut text = String::new();
    describe(&tree.root, 0, &mut text);
    print!("{text}");
    let p = predict_tree(&tree, &[8.5, 8.5])?;
    println!("prediction at (8.5, 8.5): {p}");
    let json = serde_json::to_string(&tree)?;
    println!("{} bytes of JSON", json.len());
    Ok((p, text))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
