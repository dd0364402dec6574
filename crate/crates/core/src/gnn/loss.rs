//! Unsupervised objectives on the probability matrix and the sampler that
//! feeds the policy-gradient estimator.

use alloc::vec::Vec;

use rand::Rng as _;

use super::autodiff::{Tape, Var, LOG_FLOOR};
use crate::error::{param, Result};
use crate::graph::{cut_value, Graph};
use crate::linalg::{Csr, Matrix};
use crate::math::ln;
use crate::rng::{derive, rng_from_seed};
use crate::spin::SpinConfig;

/// `n × 2` matrix with simplex rows; column 0 is `P(x_i = +1)`, column 1 is
/// `P(x_i = −1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix(Matrix);

impl ProbMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.cols != 2 {
            return Err(param("probability matrix must have two columns"));
        }
        for r in 0..m.rows {
            let row = m.row(r);
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return Err(param(alloc::format!("row {r} is not a probability vector")));
            }
        }
        Ok(Self(m))
    }

    /// Rows `(p_i, 1 − p_i)`.
    pub fn from_plus(p: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_vec(p.len(), 2, p.iter().flat_map(|&q| [q, 1.0 - q]).collect()))
    }

    pub fn n(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn plus(&self, i: usize) -> f64 {
        self.0.get(i, 0)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// `¼ (2p − 1)ᵀ ℒ (2p − 1)`, the cut objective at relaxed spins.
pub fn loss_relaxation(pi: &ProbMatrix, g: &Graph) -> Result<f64> {
    if pi.n() != g.n() {
        return Err(param("probability matrix and graph disagree on n"));
    }
    let s: Vec<f64> = (0..pi.n()).map(|i| 2.0 * pi.plus(i) - 1.0).collect();
    Ok(0.25 * g.laplacian_form(&s))
}

/// Tape version of [`loss_relaxation`]. `2p − 1` is computed as `π₊ − π₋`.
pub fn relaxation_on_tape<'a>(tape: &mut Tape<'a>, probs: Var, laplacian: &'a Csr) -> Var {
    let p = tape.column(probs, 0);
    let s = tape.affine(p, 2.0, -1.0);
    let q = tape.quad_form(laplacian, s);
    tape.affine(q, 0.25, 0.0)
}

/// `K` independent configurations with `x_i = +1` w.p. `p_i`. Sample `k` uses
/// the stream `derive(seed, k)`.
pub fn sample_configs(pi: &ProbMatrix, count: usize, seed: u64) -> Vec<SpinConfig> {
    (0..count)
        .map(|k| {
            let mut rng = rng_from_seed(derive(seed, k as u64));
            let x = (0..pi.n()).map(|i| if rng.random::<f64>() < pi.plus(i) { 1 } else { -1 }).collect();
            SpinConfig::new(x).expect("±1 by construction")
        })
        .collect()
}

/// Per-sample rewards `f(x_k) = cut(x_k)` and the weight matrix of the
/// REINFORCE surrogate: `W[i, c] = (1/K) Σ_k (f_k − b)·[x_{k,i} = c]`, where the
/// baseline `b` is the sample mean when `baseline` is set and 0 otherwise.
pub fn policy_weights(samples: &[SpinConfig], g: &Graph, baseline: bool) -> Result<(Vec<f64>, Matrix)> {
    if samples.is_empty() {
        return Err(param("at least one sample is required"));
    }
    let rewards: Vec<f64> = samples.iter().map(|x| cut_value(g, x).map(|c| c as f64)).collect::<Result<_>>()?;
    let b = if baseline { rewards.iter().sum::<f64>() / rewards.len() as f64 } else { 0.0 };
    let k = samples.len() as f64;
    let mut w = Matrix::zeros(g.n(), 2);
    for (x, f) in samples.iter().zip(&rewards) {
        for i in 0..g.n() {
            let c = if x[i] == 1 { 0 } else { 1 };
            w.data[2 * i + c] += (f - b) / k;
        }
    }
    Ok((rewards, w))
}

/// Value of the surrogate `(1/K) Σ_k f(x_k)·log π(x_k)` with
/// `log π(x) = Σ_i log π(x_i)`. The second value counts log terms that hit the
/// `1e−12` floor.
pub fn loss_policy_gradient(pi: &ProbMatrix, samples: &[SpinConfig], g: &Graph) -> Result<(f64, usize)> {
    if pi.n() != g.n() || samples.iter().any(|x| x.len() != g.n()) {
        return Err(param("dimension mismatch in policy-gradient loss"));
    }
    let (_, w) = policy_weights(samples, g, false)?;
    let mut clamped = 0;
    let mut total = 0.0;
    for (p, wv) in pi.matrix().data.iter().zip(&w.data) {
        if *wv == 0.0 {
            continue;
        }
        if *p < LOG_FLOOR {
            clamped += 1;
        }
        total += wv * ln(p.max(LOG_FLOOR));
    }
    Ok((total, clamped))
}
