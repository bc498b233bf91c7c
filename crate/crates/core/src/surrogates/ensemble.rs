//! Bagged forests and gradient-boosted trees.

use super::tree::{fit_tree_rows, RegressionTree, TreeParams};
use super::{check_data, Regressor, SurrogateError};
use crate::exec::Exec;
use crate::rng::{stream_rng, Domain};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// `max_features: None` is replaced by `ceil(d / 3)` at fit time.
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, bootstrap: true, tree: TreeParams::default(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub trees: Vec<RegressionTree>,
}

impl Regressor for ForestModel {
    fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    fn predict_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Each tree sees a bootstrap resample of size `n` and draws its split
/// candidates from its own stream, so the result does not depend on `exec`.
pub fn fit_forest<R: AsRef<[f64]> + Sync>(
    x: &[R],
    y: &[f64],
    params: ForestParams,
    exec: Exec,
) -> Result<ForestModel, SurrogateError> {
    let d = check_data(x, y)?;
    if params.n_trees == 0 {
        return Err(SurrogateError::InvalidParams("forest needs at least one tree".into()));
    }
    let mut tree_params = params.tree;
    tree_params.max_features.get_or_insert(d.div_ceil(3));
    let n = y.len();
    let trees = exec.map_range(params.n_trees, |t| {
        let mut rng = stream_rng(params.seed, Domain::Tree, t as u64);
        let rows: Vec<usize> = if params.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
        fit_tree_rows(x, y, rows, tree_params, Some(&mut rng))
    });
    let trees = trees.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(ForestModel { params: ForestParams { tree: tree_params, ..params }, trees })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub n_stages: usize,
    pub max_depth: Option<usize>,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbmParams {
    fn default() -> Self {
        GbmParams { n_stages: 300, max_depth: Some(3), learning_rate: 0.05, min_samples_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub params: GbmParams,
    pub initial: f64,
    pub trees: Vec<RegressionTree>,
    /// Training MSE after each stage; entry 0 is the constant model.
    pub train_loss: Vec<f64>,
}

impl BoostedModel {
    /// Prediction after the first `stages` trees.
    pub fn predict_staged(&self, x: &[f64], stages: usize) -> f64 {
        self.initial + self.params.learning_rate * self.trees[..stages].iter().map(|t| t.predict_row(x)).sum::<f64>()
    }
}

impl Regressor for BoostedModel {
    fn n_features(&self) -> usize {
        self.trees.first().map_or(0, |t| t.n_features)
    }

    fn predict_row(&self, x: &[f64]) -> f64 {
        self.predict_staged(x, self.trees.len())
    }
}

/// Squared-error boosting: each stage fits a tree to the current residuals.
pub fn fit_gbm<R: AsRef<[f64]>>(x: &[R], y: &[f64], params: GbmParams) -> Result<BoostedModel, SurrogateError> {
    check_data(x, y)?;
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(SurrogateError::InvalidParams(format!("learning rate {}", params.learning_rate)));
    }
    let n = y.len();
    let initial = y.iter().sum::<f64>() / n as f64;
    let mut f = vec![initial; n];
    let mse = |f: &[f64]| f.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64;
    let mut train_loss = vec![mse(&f)];
    let tree_params =
        TreeParams { max_depth: params.max_depth, min_samples_leaf: params.min_samples_leaf, ..TreeParams::default() };
    let mut trees = Vec::with_capacity(params.n_stages);
    for _ in 0..params.n_stages {
        let residual: Vec<f64> = y.iter().zip(&f).map(|(a, b)| a - b).collect();
        let tree = fit_tree_rows::<R, rand_chacha::ChaCha8Rng>(x, &residual, (0..n).collect(), tree_params, None)?;
        for (fi, xi) in f.iter_mut().zip(x) {
            *fi += params.learning_rate * tree.predict_row(xi.as_ref());
        }
        train_loss.push(mse(&f));
        trees.push(tree);
    }
    Ok(BoostedModel { params, initial, trees, train_loss })
}
