//! Soft-margin linear SVM trained by stochastic subgradient descent.
//!
//! The primal `1/2 |w|^2 + C sum_k h(y_k (w.x_k + w0))` with hinge
//! `h(z) = max(0, 1 - z)` equals `C N` times
//! `lambda/2 |w|^2 + 1/N sum_k h(...)` for `lambda = 1/(C N)`, which is
//! minimized with steps `1/(lambda t)` over a seeded per-epoch shuffle.
//! Weights are kept as `scale * v` so each step costs O(nonzeros), and the
//! returned model averages the iterates of the second half of training.
//! The unpenalized bias is not part of the stochastic steps: it is set
//! exactly for the current weights at the end of every epoch (and once more
//! for each returned candidate), since large early steps make it drift.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::row::{check_dims, FeatureRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// Passes over the data; each pass takes N single-sample steps.
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            epochs: 50,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: SvmParams,
}

pub fn hinge(z: f64) -> f64 {
    (1.0 - z).max(0.0)
}

/// `1/2 |w|^2 + C sum_k h(y_k (w.x_k + w0))`.
pub fn primal_objective<R: FeatureRow>(weights: &[f64], bias: f64, rows: &[R], labels: &[bool], c: f64) -> f64 {
    let reg = 0.5 * weights.iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| hinge(sign(y) * (x.dot(weights) + bias)))
        .sum();
    reg + c * loss
}

fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// Weight vector stored as `scale * v`, with a lazily accumulated suffix sum.
struct ScaledWeights {
    scale: f64,
    v: Vec<f64>,
    v_norm2: f64,
    // sum over averaged steps of `scale * v_j`, flushed lazily per coordinate
    acc: Vec<f64>,
    // running sum of `scale` over averaged steps, and its value at each coordinate's last flush
    scale_sum: f64,
    flushed_at: Vec<f64>,
}

impl ScaledWeights {
    fn new(dim: usize) -> Self {
        ScaledWeights {
            scale: 1.0,
            v: vec![0.0; dim],
            v_norm2: 0.0,
            acc: vec![0.0; dim],
            scale_sum: 0.0,
            flushed_at: vec![0.0; dim],
        }
    }

    fn dot<R: FeatureRow>(&self, x: &R) -> f64 {
        self.scale * x.dot(&self.v)
    }

    fn flush(&mut self, j: usize) {
        self.acc[j] += self.v[j] * (self.scale_sum - self.flushed_at[j]);
        self.flushed_at[j] = self.scale_sum;
    }

    fn flush_all(&mut self) {
        for j in 0..self.v.len() {
            self.flush(j);
        }
    }

    fn shrink(&mut self, factor: f64) {
        if factor == 0.0 {
            self.flush_all();
            self.v.iter_mut().for_each(|x| *x = 0.0);
            self.v_norm2 = 0.0;
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.flush_all();
            let s = self.scale;
            self.v.iter_mut().for_each(|x| *x *= s);
            self.v_norm2 *= s * s;
            self.scale = 1.0;
        }
    }

    /// `w += step * x`
    fn add<R: FeatureRow>(&mut self, step: f64, x: &R) {
        let delta = step / self.scale;
        x.for_each_nonzero(|j, xj| {
            self.acc[j] += self.v[j] * (self.scale_sum - self.flushed_at[j]);
            self.flushed_at[j] = self.scale_sum;
            let d = delta * xj;
            self.v_norm2 += 2.0 * d * self.v[j] + d * d;
            self.v[j] += d;
        });
    }

    fn norm(&self) -> f64 {
        self.scale * self.v_norm2.max(0.0).sqrt()
    }

    /// Records the current iterate into the running average.
    fn accumulate(&mut self) {
        self.scale_sum += self.scale;
    }

    fn current(&self) -> Vec<f64> {
        self.v.iter().map(|x| x * self.scale).collect()
    }

    fn average(mut self, count: usize) -> Vec<f64> {
        self.flush_all();
        self.acc.iter().map(|a| a / count as f64).collect()
    }
}

/// Bias minimizing `sum_k h(y_k (s_k + b))` for fixed scores `s_k`.
///
/// The loss is convex and piecewise linear with kinks at `b = y_k - s_k`;
/// its slope starts at `-#positives` and rises by one at every kink. When
/// the minimum is a flat stretch, its midpoint is returned.
pub fn refit_bias(scores: &[f64], labels: &[bool]) -> f64 {
    let n_pos = labels.iter().filter(|l| **l).count() as i64;
    let mut kinks: Vec<f64> = scores.iter().zip(labels).map(|(s, &y)| sign(y) - s).collect();
    kinks.sort_by(f64::total_cmp);
    let mut slope = -n_pos;
    for (i, &k) in kinks.iter().enumerate() {
        slope += 1;
        if slope > 0 {
            return k;
        }
        if slope == 0 {
            return match kinks.get(i + 1) {
                Some(&next) => 0.5 * (k + next),
                None => k,
            };
        }
    }
    0.0
}

pub fn train_svm<R: FeatureRow>(rows: &[R], dim: usize, labels: &[bool], params: SvmParams) -> Result<SvmModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    if !(params.c > 0.0) || params.epochs == 0 {
        return Err(Error::Config(format!("invalid SVM parameters {params:?}")));
    }
    check_dims(rows, dim)?;
    let n_pos = labels.iter().filter(|l| **l).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::SingleClass);
    }

    let n = rows.len();
    let lambda = 1.0 / (params.c * n as f64);
    // the optimum satisfies lambda/2 |w|^2 <= objective(0) = 1
    let radius = (2.0 / lambda).sqrt();
    let total_steps = params.epochs * n;
    let average_from = total_steps / 2 + 1;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = ScaledWeights::new(dim);
    let mut bias = 0.0;
    let mut t = 0usize;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = sign(labels[i]);
            let margin = y * (w.dot(&rows[i]) + bias);
            w.shrink(1.0 - 1.0 / t as f64);
            if margin < 1.0 {
                w.add(eta * y, &rows[i]);
            }
            let norm = w.norm();
            if norm > radius {
                w.shrink(radius / norm);
            }
            if t >= average_from {
                w.accumulate();
            }
        }
        let scores: Vec<f64> = rows.iter().map(|x| w.dot(x)).collect();
        bias = refit_bias(&scores, labels);
    }

    let averaged_count = total_steps - average_from + 1;
    let last = w.current();
    let averaged = w.average(averaged_count);
    let zero = vec![0.0; dim];
    // keep whichever candidate has the lowest primal objective
    let (weights, bias) = [averaged, last, zero]
        .into_iter()
        .map(|w| {
            let scores: Vec<f64> = rows.iter().map(|x| x.dot(&w)).collect();
            let b = refit_bias(&scores, labels);
            let obj = primal_objective(&w, b, rows, labels, params.c);
            (obj, w, b)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, w, b)| (w, b))
        .expect("three candidates");
    if !bias.is_finite() || weights.iter().any(|x| !x.is_finite()) {
        return Err(Error::Diverged("non-finite SVM weights".into()));
    }
    Ok(SvmModel {
        weights,
        bias,
        params,
    })
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w.x + w0`; relevant iff `>= 0`.
    pub fn decision<R: FeatureRow>(&self, x: &R) -> Result<f64> {
        if x.min_dim() > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.min_dim() - 1,
            });
        }
        Ok(x.dot(&self.weights) + self.bias)
    }

    pub fn predict<R: FeatureRow>(&self, x: &R) -> Result<bool> {
        Ok(self.decision(x)? >= 0.0)
    }
}

pub fn svm_decision<R: FeatureRow>(m: &SvmModel, x: &R) -> Result<f64> {
    m.decision(x)
}
