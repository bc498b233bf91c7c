//! Permutation feature importance and inference timing.

use super::{Regressor, SurrogateError};
use crate::exec::Exec;
use crate::rng::{stream_rng, Domain};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::hint::black_box;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: usize,
    /// Mean increase of the MSE over the repeats.
    pub score: f64,
    pub std: f64,
}

fn mse<M: Regressor + ?Sized>(model: &M, rows: &[Vec<f64>], y: &[f64]) -> f64 {
    rows.iter().zip(y).map(|(r, t)| (model.predict_row(r) - t).powi(2)).sum::<f64>() / y.len() as f64
}

/// Shuffles one column at a time and records how much the MSE grows.
/// Repeat `r` of feature `j` shuffles with stream `j · repeats + r`.
pub fn permutation_importance<M: Regressor + Sync + ?Sized, R: AsRef<[f64]>>(
    model: &M,
    x: &[R],
    y: &[f64],
    seed: u64,
    repeats: usize,
    exec: Exec,
) -> Result<Vec<Importance>, SurrogateError> {
    let d = super::check_data(x, y)?;
    if d != model.n_features() {
        return Err(SurrogateError::ShapeMismatch(format!("model takes {} features, data has {d}", model.n_features())));
    }
    let repeats = repeats.max(1);
    let rows: Vec<Vec<f64>> = x.iter().map(|r| r.as_ref().to_vec()).collect();
    let base = mse(model, &rows, y);
    let scores = exec.map_range(d, |j| {
        let mut shuffled = rows.clone();
        let mut column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let increases: Vec<f64> = (0..repeats)
            .map(|r| {
                column.shuffle(&mut stream_rng(seed, Domain::Importance, (j * repeats + r) as u64));
                for (row, v) in shuffled.iter_mut().zip(&column) {
                    row[j] = *v;
                }
                mse(model, &shuffled, y) - base
            })
            .collect();
        let mean = increases.iter().sum::<f64>() / repeats as f64;
        let var = increases.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / repeats as f64;
        Importance { feature: j, score: mean, std: var.sqrt() }
    });
    Ok(scores)
}

/// Feature indices ordered by decreasing score.
pub fn ranking(scores: &[Importance]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].score.total_cmp(&scores[a].score).then(a.cmp(&b)));
    idx.into_iter().map(|i| scores[i].feature).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub calls: usize,
    pub median_ns: f64,
    pub mean_ns: f64,
    pub min_ns: f64,
    pub max_ns: f64,
}

impl TimingSummary {
    pub fn from_samples(mut ns: Vec<f64>) -> Self {
        ns.sort_by(f64::total_cmp);
        let n = ns.len();
        let median = if n == 0 {
            f64::NAN
        } else if n % 2 == 1 {
            ns[n / 2]
        } else {
            0.5 * (ns[n / 2 - 1] + ns[n / 2])
        };
        TimingSummary {
            calls: n,
            median_ns: median,
            mean_ns: ns.iter().sum::<f64>() / n.max(1) as f64,
            min_ns: ns.first().copied().unwrap_or(f64::NAN),
            max_ns: ns.last().copied().unwrap_or(f64::NAN),
        }
    }
}

/// Times `calls` single-sample predictions on rows drawn at random from `x`.
/// Returns the predictions alongside the timing summary.
pub fn time_single_predictions<M: Regressor + ?Sized, R: AsRef<[f64]>>(
    model: &M,
    x: &[R],
    calls: usize,
    seed: u64,
) -> Result<(Vec<f64>, TimingSummary), SurrogateError> {
    if x.is_empty() {
        return Err(SurrogateError::EmptyData);
    }
    let mut rng = stream_rng(seed, Domain::Timing, 0);
    let picks: Vec<usize> = (0..calls).map(|_| rng.random_range(0..x.len())).collect();
    let mut out = Vec::with_capacity(calls);
    let mut ns = Vec::with_capacity(calls);
    for &i in &picks {
        let row = black_box(x[i].as_ref());
        let start = Instant::now();
        let v = black_box(model.predict_row(row));
        ns.push(start.elapsed().as_nanos() as f64);
        out.push(v);
    }
    Ok((out, TimingSummary::from_samples(ns)))
}

#[cfg(test)]
mod tests {
    use super::super::tree::{fit_tree, TreeParams};
    use super::*;

    #[test]
    fn constant_column_scores_zero() {
        let x: Vec<[f64; 3]> = (0..50).map(|i| [i as f64, 1.0, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 0.1).collect();
        let t = fit_tree(&x, &y, TreeParams::default()).unwrap();
        let s = permutation_importance(&t, &x, &y, 1, 5, Exec::Serial).unwrap();
        assert_eq!(s[1].score, 0.0);
        assert!(s[0].score > 0.0);
        assert_eq!(ranking(&s)[0], 0);
        assert_eq!(s, permutation_importance(&t, &x, &y, 1, 5, Exec::Parallel).unwrap());
    }

    #[test]
    fn median_definition() {
        assert_eq!(TimingSummary::from_samples(vec![3.0, 1.0, 2.0]).median_ns, 2.0);
        assert_eq!(TimingSummary::from_samples(vec![4.0, 1.0, 2.0, 3.0]).median_ns, 2.5);
    }
}
