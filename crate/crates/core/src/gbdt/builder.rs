//! Exact greedy split search, grown level by level.
//!
//! Each feature is indexed once per dataset: its distinct sorted values, the
//! most frequent value (the "default bin") and the rows holding any other
//! value. One-hot columns are almost entirely default, so a level costs
//! O(non-default entries + frontier) per feature instead of O(rows). The
//! default block is inserted at its sorted position during the scan, so the
//! candidate thresholds are exactly the midpoints between consecutive distinct
//! values present in each node.

use super::tree::{goes_left, Node, RegressionTree};
use crate::matrix::DenseMatrix;
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

const NONE: u32 = u32::MAX;

/// Growth constraints for a single tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub max_depth: usize,
    pub reg_lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

struct FeatureColumn {
    values: Vec<f64>,
    default_bin: u32,
    /// (row, bin) for rows whose bin is not `default_bin`, sorted by bin then row.
    entries: Vec<(u32, u32)>,
    /// First index of `entries` whose bin is above `default_bin`.
    split_at: usize,
}

impl FeatureColumn {
    fn build(x: &DenseMatrix, feature: usize) -> Self {
        let n = x.rows();
        let mut order: Vec<(f64, u32)> = (0..n).map(|r| (x.get(r, feature), r as u32)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut values: Vec<f64> = Vec::new();
        let mut bins = Vec::with_capacity(n);
        let mut counts: Vec<usize> = Vec::new();
        for &(v, row) in &order {
            if values.last() != Some(&v) {
                values.push(v);
                counts.push(0);
            }
            let bin = (values.len() - 1) as u32;
            counts[bin as usize] += 1;
            bins.push((row, bin));
        }
        let default_bin = counts
            .iter()
            .enumerate()
            .fold((0usize, 0usize), |best, (i, &c)| if c > best.1 { (i, c) } else { best })
            .0 as u32;
        let entries: Vec<(u32, u32)> = bins.into_iter().filter(|&(_, b)| b != default_bin).collect();
        let split_at = entries.partition_point(|&(_, b)| b < default_bin);
        Self { values, default_bin, entries, split_at }
    }
}

/// Per-feature index of a training matrix, reusable across boosting rounds.
pub struct TreeBuilder<'a> {
    x: &'a DenseMatrix,
    columns: Vec<FeatureColumn>,
}

#[derive(Clone, Copy)]
struct SlotStats {
    node: usize,
    depth: usize,
    g: f64,
    h: f64,
    count: u32,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    g_left: f64,
    h_left: f64,
    count_left: u32,
}

/// Per-node feature subsampling (random-forest style).
pub struct NodeSampling<'r> {
    pub features_per_node: usize,
    pub rng: &'r mut ChaCha8Rng,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(x: &'a DenseMatrix) -> Self {
        let columns = (0..x.cols()).map(|f| FeatureColumn::build(x, f)).collect();
        Self { x, columns }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        self.x
    }

    /// Grow one tree on the rows in `rows` using only the features whose
    /// `col_mask` entry is true.
    ///
    /// Split gain is `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ`; a split
    /// is kept only when the gain is positive and both children carry at least
    /// `min_child_weight` hessian. Ties keep the lowest feature index, then
    /// the lowest threshold. Leaves get weight `−G/(H+λ)`.
    pub fn fit(
        &self,
        gradients: &[f64],
        hessians: &[f64],
        params: &GrowthParams,
        rows: &[usize],
        col_mask: &[bool],
        mut node_sampling: Option<NodeSampling<'_>>,
    ) -> RegressionTree {
        let n = self.x.rows();
        let p = self.x.cols();
        assert_eq!(gradients.len(), n);
        assert_eq!(hessians.len(), n);
        assert_eq!(col_mask.len(), p);
        let lambda = params.reg_lambda;
        let leaf_weight = |g: f64, h: f64| if h + lambda > 0.0 { -g / (h + lambda) } else { 0.0 };

        let mut row_slot = vec![NONE; n];
        let (mut g0, mut h0) = (0.0, 0.0);
        for &r in rows {
            row_slot[r] = 0;
            g0 += gradients[r];
            h0 += hessians[r];
        }
        let mut nodes = vec![Node::Leaf { weight: 0.0, cover: h0 }];
        let mut frontier = vec![SlotStats { node: 0, depth: 0, g: g0, h: h0, count: rows.len() as u32 }];
        let active: Vec<usize> = (0..p).filter(|&f| col_mask[f]).collect();

        let mut nd_g = Vec::new();
        let mut nd_h = Vec::new();
        let mut nd_c: Vec<u32> = Vec::new();
        let mut cum_g = Vec::new();
        let mut cum_h = Vec::new();
        let mut cum_c: Vec<u32> = Vec::new();
        let mut last_bin: Vec<u32> = Vec::new();

        while !frontier.is_empty() {
            let width = frontier.len();
            let splittable: Vec<bool> = frontier
                .iter()
                .map(|s| s.depth < params.max_depth && s.count >= 2 && s.h >= 2.0 * params.min_child_weight)
                .collect();
            let allowed: Option<Vec<bool>> = node_sampling.as_mut().map(|ns| {
                let mut mask = vec![false; width * p];
                let k = ns.features_per_node.clamp(1, active.len().max(1));
                for slot in 0..width {
                    if splittable[slot] && !active.is_empty() {
                        for i in sample(&mut *ns.rng, active.len(), k.min(active.len())) {
                            mask[slot * p + active[i]] = true;
                        }
                    }
                }
                mask
            });
            let mut best: Vec<Option<Candidate>> = vec![None; width];

            if splittable.iter().any(|&s| s) {
                nd_g.resize(width, 0.0);
                nd_h.resize(width, 0.0);
                nd_c.resize(width, 0);
                cum_g.resize(width, 0.0);
                cum_h.resize(width, 0.0);
                cum_c.resize(width, 0);
                last_bin.resize(width, NONE);

                for &f in &active {
                    let col = &self.columns[f];
                    if col.values.len() < 2 {
                        continue;
                    }
                    nd_g.fill(0.0);
                    nd_h.fill(0.0);
                    nd_c.fill(0);
                    for &(row, _) in &col.entries {
                        let s = row_slot[row as usize];
                        if s != NONE {
                            let s = s as usize;
                            nd_g[s] += gradients[row as usize];
                            nd_h[s] += hessians[row as usize];
                            nd_c[s] += 1;
                        }
                    }
                    cum_g.fill(0.0);
                    cum_h.fill(0.0);
                    cum_c.fill(0);
                    last_bin.fill(NONE);

                    let mut visit = |s: usize, bin: u32, g: f64, h: f64, c: u32| {
                        let lb = last_bin[s];
                        if lb != NONE && lb != bin {
                            let stats = &frontier[s];
                            let (gl, hl) = (cum_g[s], cum_h[s]);
                            let (gr, hr) = (stats.g - gl, stats.h - hl);
                            if hl >= params.min_child_weight && hr >= params.min_child_weight {
                                let gain = 0.5
                                    * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda)
                                        - stats.g * stats.g / (stats.h + lambda))
                                    - params.gamma;
                                if gain > best[s].map_or(0.0, |b| b.gain) {
                                    let threshold = 0.5 * (col.values[lb as usize] + col.values[bin as usize]);
                                    best[s] = Some(Candidate {
                                        gain,
                                        feature: f,
                                        threshold,
                                        g_left: gl,
                                        h_left: hl,
                                        count_left: cum_c[s],
                                    });
                                }
                            }
                        }
                        cum_g[s] += g;
                        cum_h[s] += h;
                        cum_c[s] += c;
                        last_bin[s] = bin;
                    };
                    let usable = |s: usize| {
                        splittable[s] && allowed.as_ref().is_none_or(|m| m[s * p + f])
                    };

                    for &(row, bin) in &col.entries[..col.split_at] {
                        let s = row_slot[row as usize];
                        if s != NONE && usable(s as usize) {
                            visit(s as usize, bin, gradients[row as usize], hessians[row as usize], 1);
                        }
                    }
                    for s in 0..width {
                        let dc = frontier[s].count - nd_c[s];
                        if dc > 0 && usable(s) {
                            visit(s, col.default_bin, frontier[s].g - nd_g[s], frontier[s].h - nd_h[s], dc);
                        }
                    }
                    for &(row, bin) in &col.entries[col.split_at..] {
                        let s = row_slot[row as usize];
                        if s != NONE && usable(s as usize) {
                            visit(s as usize, bin, gradients[row as usize], hessians[row as usize], 1);
                        }
                    }
                }
            }

            // Materialize this level and assign slots for the next one.
            let mut next = Vec::new();
            let mut child_slots: Vec<Option<(u32, u32, usize, f64)>> = vec![None; width];
            for (s, stats) in frontier.iter().enumerate() {
                match best[s] {
                    Some(c) => {
                        let left = nodes.len();
                        let right = left + 1;
                        let (hl, hr) = (c.h_left, stats.h - c.h_left);
                        nodes[stats.node] = Node::Split {
                            feature: c.feature,
                            threshold: c.threshold,
                            left,
                            right,
                            cover: stats.h,
                            default_left: true,
                        };
                        nodes.push(Node::Leaf { weight: 0.0, cover: hl });
                        nodes.push(Node::Leaf { weight: 0.0, cover: hr });
                        child_slots[s] = Some((next.len() as u32, next.len() as u32 + 1, c.feature, c.threshold));
                        next.push(SlotStats { node: left, depth: stats.depth + 1, g: c.g_left, h: hl, count: c.count_left });
                        next.push(SlotStats {
                            node: right,
                            depth: stats.depth + 1,
                            g: stats.g - c.g_left,
                            h: hr,
                            count: stats.count - c.count_left,
                        });
                    }
                    None => {
                        nodes[stats.node] = Node::Leaf { weight: leaf_weight(stats.g, stats.h), cover: stats.h };
                    }
                }
            }
            for (r, slot) in row_slot.iter_mut().enumerate() {
                let s = *slot;
                if s == NONE {
                    continue;
                }
                *slot = match child_slots[s as usize] {
                    Some((l, rt, f, thr)) => {
                        if goes_left(self.x.get(r, f), thr, true) {
                            l
                        } else {
                            rt
                        }
                    }
                    None => NONE,
                };
            }
            frontier = next;
        }

        RegressionTree { nodes }
    }
}
