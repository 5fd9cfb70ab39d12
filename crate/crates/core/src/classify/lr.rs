//! MAP logistic regression with a Gaussian prior on the weights.
//!
//! Maximizes `sum_k [y_k ln s(z_k) + (1 - y_k) ln(1 - s(z_k))] - (lambda/2) |w|^2`
//! with `z = w.x + w0` (bias unpenalized) by full-batch gradient ascent from
//! `w = 0`. Each step moves by `eta / N` times the gradient, which leaves the
//! maximizer unchanged and keeps one learning rate usable across corpus sizes.

use serde::{Deserialize, Serialize};

use super::row::{check_dims, FeatureRow};
use crate::error::{Error, Result};

/// Probabilities are kept inside `[PROB_FLOOR, 1 - PROB_FLOOR]`.
pub const PROB_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub eta: f64,
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            eta: 0.1,
            lambda: 0.1,
            epochs: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: LrParams,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// Penalized log-likelihood at `(weights, bias)`.
pub fn objective<R: FeatureRow>(weights: &[f64], bias: f64, rows: &[R], labels: &[bool], lambda: f64) -> f64 {
    let ll: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = x.dot(weights) + bias;
            // ln s(z) = -softplus(-z), ln(1 - s(z)) = -softplus(z)
            if y {
                -softplus(-z)
            } else {
                -softplus(z)
            }
        })
        .sum();
    ll - 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`objective`] with respect to `(weights, bias)`.
pub fn gradient<R: FeatureRow>(
    weights: &[f64],
    bias: f64,
    rows: &[R],
    labels: &[bool],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let mut grad: Vec<f64> = weights.iter().map(|w| -lambda * w).collect();
    let mut grad_bias = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let z = x.dot(weights) + bias;
        let p = if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        };
        let r = y as u8 as f64 - p;
        x.add_scaled_to(r, &mut grad);
        grad_bias += r;
    }
    (grad, grad_bias)
}

/// Trains and also returns the objective before the first step and after each step.
pub fn train_lr_traced<R: FeatureRow>(
    rows: &[R],
    dim: usize,
    labels: &[bool],
    params: LrParams,
) -> Result<(LrModel, Vec<f64>)> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::Empty("logistic regression training set".into()));
    }
    if !(params.eta > 0.0) || !(params.lambda >= 0.0) || params.epochs == 0 {
        return Err(Error::Config(format!("invalid logistic regression parameters {params:?}")));
    }
    check_dims(rows, dim)?;

    let step = params.eta / rows.len() as f64;
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut trace = Vec::with_capacity(params.epochs + 1);
    trace.push(objective(&weights, bias, rows, labels, params.lambda));
    for epoch in 0..params.epochs {
        let (grad, grad_bias) = gradient(&weights, bias, rows, labels, params.lambda);
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w += step * g;
        }
        bias += step * grad_bias;
        let obj = objective(&weights, bias, rows, labels, params.lambda);
        if !obj.is_finite() || !bias.is_finite() {
            return Err(Error::Diverged(format!(
                "objective became {obj} after epoch {}; lower eta (currently {})",
                epoch + 1,
                params.eta
            )));
        }
        trace.push(obj);
    }
    Ok((
        LrModel {
            weights,
            bias,
            params,
        },
        trace,
    ))
}

pub fn train_lr<R: FeatureRow>(rows: &[R], dim: usize, labels: &[bool], params: LrParams) -> Result<LrModel> {
    train_lr_traced(rows, dim, labels, params).map(|(m, _)| m)
}

impl LrModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `p(relevant | x)`, strictly inside (0, 1).
    pub fn prob<R: FeatureRow>(&self, x: &R) -> Result<f64> {
        if x.min_dim() > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.min_dim() - 1,
            });
        }
        Ok(sigmoid(x.dot(&self.weights) + self.bias))
    }

    pub fn predict<R: FeatureRow>(&self, x: &R) -> Result<bool> {
        Ok(self.prob(x)? >= 0.5)
    }
}

pub fn lr_prob<R: FeatureRow>(m: &LrModel, x: &R) -> Result<f64> {
    m.prob(x)
}
