//! CART regression trees with exhaustive squared-error split search.

use super::{check_data, Regressor, SurrogateError};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until the other limits stop it.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: None, min_samples_leaf: 1, min_samples_split: 2, max_features: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub n_features: usize,
    pub params: TreeParams,
    /// Root first.
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

impl Regressor for RegressionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_row(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_of(x)] {
            Node::Leaf { value, .. } => value,
            Node::Split { .. } => unreachable!(),
        }
    }
}

/// Relative cost difference below which two splits count as tied.
const TIE_TOLERANCE: f64 = 1e-10;

struct Best {
    feature: usize,
    threshold: f64,
    cost: f64,
    left_len: usize,
}

struct Builder<'a, R, G> {
    x: &'a [R],
    y: &'a [f64],
    params: TreeParams,
    n_features: usize,
    nodes: Vec<Node>,
    rng: Option<&'a mut G>,
}

impl<R: AsRef<[f64]>, G: Rng> Builder<'_, R, G> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let value = rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf { value, count: rows.len() });
        self.nodes.len() - 1
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < self.n_features => {
                let mut f = sample_indices(rng, self.n_features, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.n_features).collect(),
        }
    }

    /// Lowest total squared error over candidate splits. Among equal costs
    /// the first feature and then the lowest threshold win, because later
    /// candidates must be better by more than rounding noise. The margin is
    /// relative to the node's squared error, so the choice does not change
    /// when the targets are scaled or shifted.
    fn best_split(&mut self, rows: &mut [usize]) -> Option<Best> {
        let n = rows.len();
        let mean = rows.iter().map(|&r| self.y[r]).sum::<f64>() / n as f64;
        let total_sq: f64 = rows.iter().map(|&r| (self.y[r] - mean).powi(2)).sum();
        let margin = TIE_TOLERANCE * total_sq;
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<Best> = None;
        for f in self.candidate_features() {
            let x = self.x;
            rows.sort_by(|&a, &b| x[a].as_ref()[f].total_cmp(&x[b].as_ref()[f]).then(a.cmp(&b)));
            // Centred sums keep the cancellation in `sq - s²/n` small.
            let (mut s, mut sq) = (0.0, 0.0);
            for k in 0..n - 1 {
                let v = self.y[rows[k]] - mean;
                s += v;
                sq += v * v;
                let left = k + 1;
                if left < min_leaf || n - left < min_leaf {
                    continue;
                }
                let a = x[rows[k]].as_ref()[f];
                let b = x[rows[k + 1]].as_ref()[f];
                if a >= b {
                    continue;
                }
                let (sr, sqr) = (-s, total_sq - sq);
                let cost = (sq - s * s / left as f64) + (sqr - sr * sr / (n - left) as f64);
                if best.as_ref().is_none_or(|b| cost < b.cost - margin) {
                    let mid = 0.5 * (a + b);
                    let threshold = if mid < b { mid } else { a };
                    best = Some(Best { feature: f, threshold, cost, left_len: left });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let n = rows.len();
        let first = self.y[rows[0]];
        let constant = rows.iter().all(|&r| self.y[r] == first);
        let too_deep = self.params.max_depth.is_some_and(|d| depth >= d);
        if constant {
            self.nodes.push(Node::Leaf { value: first, count: n });
            return self.nodes.len() - 1;
        }
        if too_deep || n < self.params.min_samples_split.max(2) {
            return self.leaf(rows);
        }
        let Some(best) = self.best_split(rows) else {
            return self.leaf(rows);
        };
        let f = best.feature;
        let x = self.x;
        rows.sort_by(|&a, &b| x[a].as_ref()[f].total_cmp(&x[b].as_ref()[f]).then(a.cmp(&b)));
        debug_assert!(x[rows[best.left_len - 1]].as_ref()[f] <= best.threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0, count: 0 });
        let (l, r) = rows.split_at_mut(best.left_len);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split { feature: f, threshold: best.threshold, left, right };
        at
    }
}

/// Fits a tree on all rows using every feature at every split.
pub fn fit_tree<R: AsRef<[f64]>>(x: &[R], y: &[f64], params: TreeParams) -> Result<RegressionTree, SurrogateError> {
    let rows: Vec<usize> = (0..y.len()).collect();
    fit_tree_rows::<R, rand_chacha::ChaCha8Rng>(x, y, rows, params, None)
}

/// Fits a tree on the given row multiset. With an RNG, `max_features`
/// features are drawn at every split.
pub fn fit_tree_rows<R: AsRef<[f64]>, G: Rng>(
    x: &[R],
    y: &[f64],
    mut rows: Vec<usize>,
    params: TreeParams,
    rng: Option<&mut G>,
) -> Result<RegressionTree, SurrogateError> {
    let n_features = check_data(x, y)?;
    if rows.is_empty() {
        return Err(SurrogateError::EmptyData);
    }
    let mut b = Builder { x, y, params, n_features, nodes: Vec::new(), rng };
    b.grow(&mut rows, 0);
    Ok(RegressionTree { n_features, params, nodes: b.nodes })
}
