use serde::{Deserialize, Serialize};

/// A node of a binary regression tree.
///
/// `cover` is the hessian mass of the training rows that reached the node,
/// which under squared error is the row count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        cover: f64,
        /// Branch taken when the feature value is missing (NaN).
        default_left: bool,
    },
    Leaf {
        weight: f64,
        cover: f64,
    },
}

impl Node {
    pub fn cover(&self) -> f64 {
        match *self {
            Node::Split { cover, .. } | Node::Leaf { cover, .. } => cover,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

/// Direction of `value` at a split: `true` means left.
#[inline]
pub(crate) fn goes_left(value: f64, threshold: f64, default_left: bool) -> bool {
    if value.is_nan() {
        default_left
    } else {
        value < threshold
    }
}

/// Regression tree stored as a node array rooted at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn single_leaf(weight: f64, cover: f64) -> Self {
        Self { nodes: vec![Node::Leaf { weight, cover }] }
    }

    /// Index of the leaf that `x` falls into.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { .. } => return idx,
                Node::Split { feature, threshold, left, right, default_left, .. } => {
                    idx = if goes_left(x[feature], threshold, default_left) { left } else { right };
                }
            }
        }
    }

    /// Leaf weight reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { weight, .. } => weight,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }

    /// Cover-weighted mean leaf weight: the expected output over the
    /// training distribution that built the tree.
    pub fn expected_value(&self) -> f64 {
        fn walk(t: &RegressionTree, i: usize) -> f64 {
            match t.nodes[i] {
                Node::Leaf { weight, .. } => weight,
                Node::Split { left, right, cover, .. } => {
                    let (cl, cr) = (t.nodes[left].cover(), t.nodes[right].cover());
                    if cover > 0.0 {
                        (cl * walk(t, left) + cr * walk(t, right)) / cover
                    } else {
                        0.5 * (walk(t, left) + walk(t, right))
                    }
                }
            }
        }
        walk(self, 0)
    }

    /// Multiply every leaf weight by `factor`.
    pub fn scaled(&self, factor: f64) -> RegressionTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Leaf { weight, cover } => Node::Leaf { weight: weight * factor, cover },
                ref split => split.clone(),
            })
            .collect();
        RegressionTree { nodes }
    }

    /// Check structural invariants: a single rooted tree in which every node
    /// is reachable, covers are positive and add up at every split.
    pub fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if i >= self.nodes.len() {
                return Err(format!("child index {i} out of range"));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(format!("node {i} reached twice"));
            }
            let node = &self.nodes[i];
            if !(node.cover() > 0.0) {
                return Err(format!("node {i} has non-positive cover {}", node.cover()));
            }
            if let Node::Split { left, right, cover, .. } = *node {
                let (cl, cr) = (
                    self.nodes.get(left).map(Node::cover).unwrap_or(f64::NAN),
                    self.nodes.get(right).map(Node::cover).unwrap_or(f64::NAN),
                );
                if !((cl + cr - cover).abs() <= 1e-9 * cover.max(1.0)) {
                    return Err(format!("cover of node {i} ({cover}) != {cl} + {cr}"));
                }
                stack.push(left);
                stack.push(right);
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(format!("node {i} is unreachable"));
        }
        Ok(())
    }
}
