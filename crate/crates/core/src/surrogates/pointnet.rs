//! Small point-cloud regressor: a shared per-point MLP, a channel-wise max
//! over points and a dense head. Gradients are written out by hand.
//!
//! Each point enters as `(x, y, z, q̂)` with the cloud in the unit cube and
//! `q̂` the discharge scaled from [50, 250] l/s to [0, 1]. Layer widths are
//! 4 → 64 → 64 → 128, max over points, then 128 → 64 → 1, with ReLU after
//! every hidden layer.

use super::SurrogateError;
use crate::exec::Exec;
use crate::rng::{stream_rng, Domain};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

const IN: usize = 4;
const H1: usize = 64;
const H2: usize = 64;
const H3: usize = 128;
const H4: usize = 64;

const W1: usize = 0;
const B1: usize = W1 + H1 * IN;
const W2: usize = B1 + H1;
const B2: usize = W2 + H2 * H1;
const W3: usize = B2 + H2;
const B3: usize = W3 + H3 * H2;
const W4: usize = B3 + H3;
const B4: usize = W4 + H4 * H3;
const W5: usize = B4 + H4;
const B5: usize = W5 + H4;

/// Number of trainable parameters.
pub const PARAMETER_COUNT: usize = B5 + 1;

/// Discharge in l/s mapped from [50, 250] to [0, 1].
pub fn normalize_discharge(q_lps: f64) -> f64 {
    (q_lps - 50.0) / 200.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointNetConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Epochs without a new best monitored loss before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for PointNetConfig {
    fn default() -> Self {
        PointNetConfig {
            max_epochs: 500,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            patience: 20,
            seed: 0,
        }
    }
}

/// One training target: an index into the cloud list, the normalized
/// discharge and the value to predict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudExample {
    pub cloud: usize,
    pub q_hat: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub train_loss: Vec<f64>,
    /// Loss used for early stopping: validation when given, else training.
    pub monitored_loss: Vec<f64>,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointNetMini {
    pub params: Vec<f64>,
}

#[inline]
fn dense<const I: usize, const O: usize>(p: &[f64], w: usize, b: usize, x: &[f64; I], z: &mut [f64; O]) {
    for (o, zo) in z.iter_mut().enumerate() {
        let row = &p[w + o * I..w + (o + 1) * I];
        *zo = p[b + o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

#[inline]
fn relu<const N: usize>(z: &[f64; N]) -> [f64; N] {
    z.map(|v| v.max(0.0))
}

/// Activations of one point.
struct PointPass {
    input: [f64; IN],
    z1: [f64; H1],
    h1: [f64; H1],
    z2: [f64; H2],
    h2: [f64; H2],
    z3: [f64; H3],
}

struct Forward {
    pooled: [f64; H3],
    argmax: [usize; H3],
    z4: [f64; H4],
    h4: [f64; H4],
    out: f64,
}

impl PointNetMini {
    /// He-uniform weights for ReLU layers, LeCun-uniform for the output
    /// weights, zero biases except the output bias, which starts at
    /// `output_bias`.
    pub fn new(seed: u64, output_bias: f64) -> Self {
        let mut rng = stream_rng(seed, Domain::Network, 0);
        let mut params = vec![0.0; PARAMETER_COUNT];
        for (w, len, fan_in, gain) in
            [(W1, H1 * IN, IN, 6.0), (W2, H2 * H1, H1, 6.0), (W3, H3 * H2, H2, 6.0), (W4, H4 * H3, H3, 6.0), (W5, H4, H4, 3.0)]
        {
            let bound = (gain / fan_in as f64).sqrt();
            for v in &mut params[w..w + len] {
                *v = rng.random_range(-bound..bound);
            }
        }
        params[B5] = output_bias;
        PointNetMini { params }
    }

    fn point(&self, p: [f64; 3], q_hat: f64) -> PointPass {
        let input = [p[0], p[1], p[2], q_hat];
        let mut z1 = [0.0; H1];
        dense(&self.params, W1, B1, &input, &mut z1);
        let h1 = relu(&z1);
        let mut z2 = [0.0; H2];
        dense(&self.params, W2, B2, &h1, &mut z2);
        let h2 = relu(&z2);
        let mut z3 = [0.0; H3];
        dense(&self.params, W3, B3, &h2, &mut z3);
        PointPass { input, z1, h1, z2, h2, z3 }
    }

    fn forward(&self, points: &[[f64; 3]], q_hat: f64) -> Forward {
        let mut pooled = [f64::NEG_INFINITY; H3];
        let mut argmax = [0usize; H3];
        for (i, &p) in points.iter().enumerate() {
            let pass = self.point(p, q_hat);
            for c in 0..H3 {
                let h = pass.z3[c].max(0.0);
                // Strict comparison keeps the lowest index on ties.
                if h > pooled[c] {
                    pooled[c] = h;
                    argmax[c] = i;
                }
            }
        }
        let mut z4 = [0.0; H4];
        dense(&self.params, W4, B4, &pooled, &mut z4);
        let h4 = relu(&z4);
        let out = self.params[B5] + self.params[W5..W5 + H4].iter().zip(&h4).map(|(a, b)| a * b).sum::<f64>();
        Forward { pooled, argmax, z4, h4, out }
    }

    pub fn predict(&self, points: &[[f64; 3]], q_hat: f64) -> f64 {
        self.forward(points, q_hat).out
    }

    /// Adds `scale · ∂out/∂θ` to `grad` and returns the output.
    fn accumulate_gradient(&self, points: &[[f64; 3]], q_hat: f64, scale: impl Fn(f64) -> f64, grad: &mut [f64]) -> f64 {
        let p = &self.params;
        let f = self.forward(points, q_hat);
        let dout = scale(f.out);
        grad[B5] += dout;
        let mut dz4 = [0.0; H4];
        for o in 0..H4 {
            grad[W5 + o] += dout * f.h4[o];
            dz4[o] = if f.z4[o] > 0.0 { dout * p[W5 + o] } else { 0.0 };
        }
        let mut dpooled = [0.0; H3];
        for o in 0..H4 {
            if dz4[o] == 0.0 {
                continue;
            }
            grad[B4 + o] += dz4[o];
            for c in 0..H3 {
                grad[W4 + o * H3 + c] += dz4[o] * f.pooled[c];
                dpooled[c] += p[W4 + o * H3 + c] * dz4[o];
            }
        }
        // Route each channel to its argmax point; points owning several
        // channels are processed once.
        let mut owners: Vec<usize> = f.argmax.to_vec();
        owners.sort_unstable();
        owners.dedup();
        for &i in &owners {
            let pass = self.point(points[i], q_hat);
            let mut dz3 = [0.0; H3];
            for c in 0..H3 {
                if f.argmax[c] == i && pass.z3[c] > 0.0 {
                    dz3[c] = dpooled[c];
                }
            }
            let mut dh2 = [0.0; H2];
            for c in 0..H3 {
                if dz3[c] == 0.0 {
                    continue;
                }
                grad[B3 + c] += dz3[c];
                for k in 0..H2 {
                    grad[W3 + c * H2 + k] += dz3[c] * pass.h2[k];
                    dh2[k] += p[W3 + c * H2 + k] * dz3[c];
                }
            }
            let mut dh1 = [0.0; H1];
            for k in 0..H2 {
                if pass.z2[k] <= 0.0 || dh2[k] == 0.0 {
                    continue;
                }
                let dz = dh2[k];
                grad[B2 + k] += dz;
                for j in 0..H1 {
                    grad[W2 + k * H1 + j] += dz * pass.h1[j];
                    dh1[j] += p[W2 + k * H1 + j] * dz;
                }
            }
            for j in 0..H1 {
                if pass.z1[j] <= 0.0 || dh1[j] == 0.0 {
                    continue;
                }
                let dz = dh1[j];
                grad[B1 + j] += dz;
                for (m, x) in pass.input.iter().enumerate() {
                    grad[W1 + j * IN + m] += dz * x;
                }
            }
        }
        f.out
    }

    /// Squared error `(out − target)²` of one example and its gradient.
    pub fn loss_and_gradient(&self, points: &[[f64; 3]], q_hat: f64, target: f64) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; PARAMETER_COUNT];
        let out = self.accumulate_gradient(points, q_hat, |out| 2.0 * (out - target), &mut grad);
        ((out - target).powi(2), grad)
    }

    /// Mean squared error over `examples`.
    pub fn mse(&self, clouds: &[Vec<[f64; 3]>], examples: &[CloudExample], exec: Exec) -> f64 {
        let errs = exec.map(examples, |e| (self.predict(&clouds[e.cloud], e.q_hat) - e.target).powi(2));
        errs.iter().sum::<f64>() / examples.len().max(1) as f64
    }

    pub fn predict_examples(&self, clouds: &[Vec<[f64; 3]>], examples: &[CloudExample], exec: Exec) -> Vec<f64> {
        exec.map(examples, |e| self.predict(&clouds[e.cloud], e.q_hat))
    }
}

fn check_examples(clouds: &[Vec<[f64; 3]>], examples: &[CloudExample]) -> Result<(), SurrogateError> {
    for e in examples {
        let cloud = clouds
            .get(e.cloud)
            .ok_or_else(|| SurrogateError::ShapeMismatch(format!("cloud {} of {}", e.cloud, clouds.len())))?;
        if cloud.is_empty() {
            return Err(SurrogateError::ShapeMismatch(format!("cloud {} is empty", e.cloud)));
        }
        if !e.q_hat.is_finite() || !e.target.is_finite() {
            return Err(SurrogateError::ShapeMismatch("non-finite discharge or target".into()));
        }
    }
    Ok(())
}

/// Mini-batch Adam on the mean squared error with early stopping; returns
/// the weights of the best monitored epoch.
pub fn fit_pointnet(
    clouds: &[Vec<[f64; 3]>],
    train: &[CloudExample],
    val: &[CloudExample],
    config: PointNetConfig,
    exec: Exec,
) -> Result<(PointNetMini, TrainingHistory), SurrogateError> {
    if train.is_empty() {
        return Err(SurrogateError::EmptyData);
    }
    if config.batch_size == 0 {
        return Err(SurrogateError::InvalidParams("batch size 0".into()));
    }
    check_examples(clouds, train)?;
    check_examples(clouds, val)?;
    let mean = train.iter().map(|e| e.target).sum::<f64>() / train.len() as f64;
    let mut model = PointNetMini::new(config.seed, mean);
    let mut m = vec![0.0; PARAMETER_COUNT];
    let mut v = vec![0.0; PARAMETER_COUNT];
    let mut step = 0i32;
    let monitor = if val.is_empty() { train } else { val };
    let mut best = (model.mse(clouds, monitor, exec), model.clone(), 0);
    let mut history = TrainingHistory { train_loss: Vec::new(), monitored_loss: Vec::new(), best_epoch: 0 };
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut stream_rng(config.seed, Domain::Network, epoch as u64));
        let mut epoch_sse = 0.0;
        for batch in order.chunks(config.batch_size) {
            let scale = 2.0 / batch.len() as f64;
            let parts = exec.map(batch, |&k| {
                let e = train[k];
                let mut g = vec![0.0; PARAMETER_COUNT];
                let out = model.accumulate_gradient(&clouds[e.cloud], e.q_hat, |o| scale * (o - e.target), &mut g);
                ((out - e.target).powi(2), g)
            });
            let mut grad = vec![0.0; PARAMETER_COUNT];
            for (sq, g) in &parts {
                epoch_sse += sq;
                for (a, b) in grad.iter_mut().zip(g) {
                    *a += b;
                }
            }
            step += 1;
            let c1 = 1.0 - config.beta1.powi(step);
            let c2 = 1.0 - config.beta2.powi(step);
            for i in 0..PARAMETER_COUNT {
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
                model.params[i] -= config.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + config.epsilon);
            }
        }
        let train_loss = epoch_sse / train.len() as f64;
        let monitored = if val.is_empty() { model.mse(clouds, train, exec) } else { model.mse(clouds, val, exec) };
        if !train_loss.is_finite() || !monitored.is_finite() {
            return Err(SurrogateError::NonFiniteLoss { epoch, train: train_loss, monitored });
        }
        history.train_loss.push(train_loss);
        history.monitored_loss.push(monitored);
        if monitored < best.0 {
            best = (monitored, model.clone(), epoch);
        } else if epoch - best.2 >= config.patience {
            break;
        }
    }
    history.best_epoch = best.2;
    Ok((best.1, history))
}
