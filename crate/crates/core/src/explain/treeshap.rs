//! Path-dependent TreeSHAP.
//!
//! Walking a tree keeps the set of unique features on the current root-to-node
//! path together with, for each subset size, the proportion of feature subsets
//! that reach the node. `zero_fraction` is the cover share flowing along the
//! path when the feature is unknown and `one_fraction` is 1 when `x` itself
//! follows the path. At a leaf, unwinding each feature out of the path gives
//! the Shapley-weighted sum over subsets that exclude it.

use crate::gbdt::{Node, RegressionTree};

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

const NO_FEATURE: usize = usize::MAX;

fn extend_path(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: usize) {
    let depth = path.len();
    path.push(PathElement { feature, zero_fraction, one_fraction, pweight: if depth == 0 { 1.0 } else { 0.0 } });
    let denom = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].pweight += one_fraction * path[i].pweight * (i + 1) as f64 / denom;
        path[i].pweight = zero_fraction * path[i].pweight * (depth - i) as f64 / denom;
    }
}

fn unwind_path(path: &mut Vec<PathElement>, index: usize) {
    let depth = path.len() - 1;
    let PathElement { one_fraction: one, zero_fraction: zero, .. } = path[index];
    let denom = (depth + 1) as f64;
    let mut next_one = path[depth].pweight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].pweight;
            path[i].pweight = next_one * denom / ((i + 1) as f64 * one);
            next_one = tmp - path[i].pweight * zero * (depth - i) as f64 / denom;
        } else {
            path[i].pweight = path[i].pweight * denom / (zero * (depth - i) as f64);
        }
    }
    let kept_weights: Vec<f64> = path[..depth].iter().map(|e| e.pweight).collect();
    path.remove(index);
    for (e, w) in path.iter_mut().zip(kept_weights) {
        e.pweight = w;
    }
}

/// Total permutation weight of the path with element `index` unwound,
/// without modifying the path.
fn unwound_path_sum(path: &[PathElement], index: usize) -> f64 {
    let depth = path.len() - 1;
    let PathElement { one_fraction: one, zero_fraction: zero, .. } = path[index];
    let denom = (depth + 1) as f64;
    let mut next_one = path[depth].pweight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one * denom / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].pweight - tmp * zero * (depth - i) as f64 / denom;
        } else if zero != 0.0 {
            total += path[i].pweight / zero * denom / (depth - i) as f64;
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &RegressionTree,
    node: usize,
    x: &[f64],
    phi: &mut [f64],
    scale: f64,
    mut path: Vec<PathElement>,
    zero_fraction: f64,
    one_fraction: f64,
    feature: usize,
) {
    extend_path(&mut path, zero_fraction, one_fraction, feature);
    match tree.nodes[node] {
        Node::Leaf { weight, .. } => {
            for i in 1..path.len() {
                let w = unwound_path_sum(&path, i);
                let e = path[i];
                phi[e.feature] += w * (e.one_fraction - e.zero_fraction) * weight * scale;
            }
        }
        Node::Split { feature: split, threshold, left, right, cover, default_left } => {
            let (hot, cold) = if crate::gbdt::goes_left(x[split], threshold, default_left) {
                (left, right)
            } else {
                (right, left)
            };
            let (mut incoming_zero, mut incoming_one) = (1.0, 1.0);
            if let Some(k) = (1..path.len()).find(|&k| path[k].feature == split) {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind_path(&mut path, k);
            }
            let hot_frac = tree.nodes[hot].cover() / cover;
            let cold_frac = tree.nodes[cold].cover() / cover;
            recurse(tree, hot, x, phi, scale, path.clone(), hot_frac * incoming_zero, incoming_one, split);
            recurse(tree, cold, x, phi, scale, path, cold_frac * incoming_zero, 0.0, split);
        }
    }
}

/// Add `scale ·` this tree's SHAP values for `x` into `phi`.
pub(crate) fn accumulate(tree: &RegressionTree, x: &[f64], scale: f64, phi: &mut [f64]) {
    let path = Vec::with_capacity(tree.depth() + 2);
    recurse(tree, 0, x, phi, scale, path, 1.0, 1.0, NO_FEATURE);
}
