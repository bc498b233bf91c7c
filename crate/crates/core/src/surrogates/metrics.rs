//! Regression error metrics.

use super::SurrogateError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub mse: f64,
    pub mae: f64,
    pub max_ae: f64,
    /// Undefined when the targets are constant.
    pub r2: Option<f64>,
}

/// The same metrics in reporting units: MSE x1e5, R² x1e2, MAE x1e3,
/// MaxAE x1e1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledMetrics {
    pub mse: f64,
    pub r2: Option<f64>,
    pub mae: f64,
    pub max_ae: f64,
}

impl MetricReport {
    pub fn paper_scaled(&self) -> ScaledMetrics {
        ScaledMetrics {
            mse: self.mse * 1e5,
            r2: self.r2.map(|r| r * 1e2),
            mae: self.mae * 1e3,
            max_ae: self.max_ae * 1e1,
        }
    }
}

pub fn metrics(y: &[f64], y_hat: &[f64]) -> Result<MetricReport, SurrogateError> {
    if y.len() != y_hat.len() {
        return Err(SurrogateError::ShapeMismatch(format!("{} targets, {} predictions", y.len(), y_hat.len())));
    }
    if y.is_empty() {
        return Err(SurrogateError::EmptyData);
    }
    let n = y.len() as f64;
    let (mut sse, mut sae, mut max_ae) = (0.0, 0.0, 0.0f64);
    for (a, b) in y.iter().zip(y_hat) {
        let e = a - b;
        sse += e * e;
        sae += e.abs();
        max_ae = max_ae.max(e.abs());
    }
    let mean = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = (sst > 0.0).then(|| 1.0 - sse / sst);
    Ok(MetricReport { n: y.len(), mse: sse / n, mae: sae / n, max_ae, r2 })
}
