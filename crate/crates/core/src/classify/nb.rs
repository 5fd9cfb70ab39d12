//! Bernoulli naive Bayes over binary presence features.
//!
//! Both present and absent terms contribute to the likelihood. Conditionals
//! are smoothed as `(count(x_j = 1, side) + l) / (count(side) + 2l)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::BinaryVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "NbParams", into = "NbParams")]
pub struct NbModel {
    params: NbParams,
    // log-odds of an all-absent input, and the change when term j is present
    absent_base: f64,
    present_delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    /// `[ln p(relevant), ln p(irrelevant)]`
    pub log_prior: [f64; 2],
    /// `p(x_j = 1 | relevant)`
    pub cond_pos: Vec<f64>,
    /// `p(x_j = 1 | irrelevant)`
    pub cond_neg: Vec<f64>,
    pub smoothing: f64,
}

impl From<NbParams> for NbModel {
    fn from(params: NbParams) -> Self {
        let mut absent_base = params.log_prior[0] - params.log_prior[1];
        let present_delta = params
            .cond_pos
            .iter()
            .zip(&params.cond_neg)
            .map(|(&p, &q)| {
                let absent = (1.0 - p).ln() - (1.0 - q).ln();
                absent_base += absent;
                (p.ln() - q.ln()) - absent
            })
            .collect();
        NbModel {
            params,
            absent_base,
            present_delta,
        }
    }
}

impl From<NbModel> for NbParams {
    fn from(m: NbModel) -> Self {
        m.params
    }
}

/// `(count + l) / (total + 2l)`.
pub fn smoothed(count: usize, total: usize, l: f64) -> f64 {
    (count as f64 + l) / (total as f64 + 2.0 * l)
}

pub fn train_nb(rows: &[BinaryVector], dim: usize, labels: &[bool], smoothing: f64) -> Result<NbModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    if !(smoothing > 0.0) {
        return Err(Error::Config(format!("smoothing must be positive, got {smoothing}")));
    }
    super::row::check_dims(rows, dim)?;
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut count_pos = vec![0usize; dim];
    let mut count_neg = vec![0usize; dim];
    for (row, &label) in rows.iter().zip(labels) {
        let counts = if label { &mut count_pos } else { &mut count_neg };
        for &j in row.indices() {
            counts[j] += 1;
        }
    }
    let smooth = |count: usize, total: usize| smoothed(count, total, smoothing);
    let n = labels.len() as f64;
    Ok(NbParams {
        log_prior: [(n_pos as f64 / n).ln(), (n_neg as f64 / n).ln()],
        cond_pos: count_pos.iter().map(|&c| smooth(c, n_pos)).collect(),
        cond_neg: count_neg.iter().map(|&c| smooth(c, n_neg)).collect(),
        smoothing,
    }
    .into())
}

impl NbModel {
    pub fn params(&self) -> &NbParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.cond_pos.len()
    }

    /// `ln p(relevant | x) - ln p(irrelevant | x)`; relevant iff `>= 0`.
    pub fn log_odds(&self, x: &BinaryVector) -> Result<f64> {
        if x.min_dim() > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.min_dim() - 1,
            });
        }
        Ok(self.absent_base + x.indices().iter().map(|&j| self.present_delta[j]).sum::<f64>())
    }

    pub fn predict(&self, x: &BinaryVector) -> Result<bool> {
        Ok(self.log_odds(x)? >= 0.0)
    }
}

pub fn nb_log_odds(m: &NbModel, x: &BinaryVector) -> Result<f64> {
    m.log_odds(x)
}
