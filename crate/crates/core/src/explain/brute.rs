//! Shapley values by explicit subset enumeration of the path-dependent game.

use crate::gbdt::{goes_left, GbdtModel, Node, RegressionTree};

/// Conditional expectation of one tree given the features in `known`
/// (a bit mask): known splits follow `x`, unknown ones average both children
/// by cover.
fn tree_value(tree: &RegressionTree, node: usize, x: &[f64], known: u64) -> f64 {
    match tree.nodes[node] {
        Node::Leaf { weight, .. } => weight,
        Node::Split { feature, threshold, left, right, cover, default_left } => {
            if known >> feature & 1 == 1 {
                let next = if goes_left(x[feature], threshold, default_left) { left } else { right };
                tree_value(tree, next, x, known)
            } else {
                let (cl, cr) = (tree.nodes[left].cover(), tree.nodes[right].cover());
                (cl * tree_value(tree, left, x, known) + cr * tree_value(tree, right, x, known)) / cover
            }
        }
    }
}

/// `v(S)` of the whole ensemble for every subset mask of `p` features.
pub(crate) fn game_values(model: &GbdtModel, x: &[f64]) -> Vec<f64> {
    let p = model.n_features();
    (0..1u64 << p)
        .map(|mask| {
            let sum: f64 = model.trees.iter().map(|t| tree_value(t, 0, x, mask)).sum();
            model.base_score + model.learning_rate() * sum
        })
        .collect()
}

/// Shapley values from the full table of game values.
pub(crate) fn shapley_from_game(values: &[f64], p: usize) -> Vec<f64> {
    // weight[s] = s!(p−s−1)!/p!
    let mut fact = vec![1.0f64; p + 1];
    for i in 1..=p {
        fact[i] = fact[i - 1] * i as f64;
    }
    let weight: Vec<f64> = (0..p).map(|s| fact[s] * fact[p - s - 1] / fact[p]).collect();
    let mut phi = vec![0.0; p];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1u64 << i;
        for mask in 0..values.len() as u64 {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                *phi_i += weight[s] * (values[(mask | bit) as usize] - values[mask as usize]);
            }
        }
    }
    phi
}
