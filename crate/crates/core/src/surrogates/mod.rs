//! Surrogate regressors for the discharge coefficient, their metrics and
//! model files.

pub mod container;
pub mod ensemble;
pub mod importance;
pub mod metrics;
pub mod pointnet;
pub mod tree;

pub use container::{decode_model, encode_model, read_model, write_model, ContainerError};
pub use ensemble::{fit_forest, fit_gbm, BoostedModel, ForestModel, ForestParams, GbmParams};
pub use importance::{permutation_importance, time_single_predictions, Importance, TimingSummary};
pub use metrics::{metrics, MetricReport, ScaledMetrics};
pub use pointnet::{fit_pointnet, CloudExample, PointNetConfig, PointNetMini};
pub use tree::{fit_tree, RegressionTree, TreeParams};

use crate::exec::Exec;
use crate::records::sig9;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error("no training data")]
    EmptyData,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("non-finite loss at epoch {epoch} (train {train}, monitored {monitored})")]
    NonFiniteLoss { epoch: usize, train: f64, monitored: f64 },
}

/// A fitted model on fixed-length feature rows.
pub trait Regressor {
    fn n_features(&self) -> usize;
    fn predict_row(&self, x: &[f64]) -> f64;
}

/// Predictions for every row, in row order.
pub fn predict<M: Regressor + Sync + ?Sized, R: AsRef<[f64]> + Sync>(model: &M, x: &[R], exec: Exec) -> Vec<f64> {
    exec.map(x, |r| model.predict_row(r.as_ref()))
}

/// Checks that `x` and `y` are non-empty, aligned, rectangular and finite;
/// returns the feature count.
pub(crate) fn check_data<R: AsRef<[f64]>>(x: &[R], y: &[f64]) -> Result<usize, SurrogateError> {
    if x.is_empty() || y.is_empty() {
        return Err(SurrogateError::EmptyData);
    }
    if x.len() != y.len() {
        return Err(SurrogateError::ShapeMismatch(format!("{} rows, {} targets", x.len(), y.len())));
    }
    let d = x[0].as_ref().len();
    for (i, r) in x.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != d {
            return Err(SurrogateError::ShapeMismatch(format!("row {i} has {} features, expected {d}", r.len())));
        }
        if r.iter().any(|v| !v.is_finite()) || !y[i].is_finite() {
            return Err(SurrogateError::ShapeMismatch(format!("row {i} is not finite")));
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Tree,
    Forest,
    Gbm,
    PointNet,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Gbm => "gbm",
            ModelKind::PointNet => "pointnet",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [ModelKind::Tree, ModelKind::Forest, ModelKind::Gbm, ModelKind::PointNet].into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any fitted model.
#[derive(Debug, Clone, PartialEq)]
pub enum SurrogateModel {
    Tree(RegressionTree),
    Forest(ForestModel),
    Boosted(BoostedModel),
    PointNet { net: PointNetMini, config: PointNetConfig },
}

impl SurrogateModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            SurrogateModel::Tree(_) => ModelKind::Tree,
            SurrogateModel::Forest(_) => ModelKind::Forest,
            SurrogateModel::Boosted(_) => ModelKind::Gbm,
            SurrogateModel::PointNet { .. } => ModelKind::PointNet,
        }
    }

    /// The parametric model, if this is one.
    pub fn as_regressor(&self) -> Option<&(dyn Regressor + Sync)> {
        match self {
            SurrogateModel::Tree(t) => Some(t),
            SurrogateModel::Forest(f) => Some(f),
            SurrogateModel::Boosted(b) => Some(b),
            SurrogateModel::PointNet { .. } => None,
        }
    }
}

/// One line of a metric report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub split: String,
    pub model: String,
    pub label_source: String,
    pub report: MetricReport,
}

pub const METRIC_COLUMNS: [&str; 12] = [
    "split", "model", "label_source", "n", "MSE", "R2", "MAE", "MaxAE", "MSE_x1e5", "R2_x1e2", "MAE_x1e3", "MaxAE_x1e1",
];

/// Writes metric rows. With `paper_scale` the plain columns carry the
/// scaled values as well.
pub fn write_metric_rows<W: Write>(out: W, rows: &[MetricRow], paper_scale: bool) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRIC_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(sig9).unwrap_or_else(|| "undefined".into());
    for r in rows {
        let m = r.report;
        let s = m.paper_scaled();
        let plain = if paper_scale { s } else { ScaledMetrics { mse: m.mse, r2: m.r2, mae: m.mae, max_ae: m.max_ae } };
        w.write_record([
            r.split.clone(),
            r.model.clone(),
            r.label_source.clone(),
            m.n.to_string(),
            sig9(plain.mse),
            opt(plain.r2),
            sig9(plain.mae),
            sig9(plain.max_ae),
            sig9(s.mse),
            opt(s.r2),
            sig9(s.mae),
            sig9(s.max_ae),
        ])?;
    }
    w.flush()?;
    Ok(())
}
