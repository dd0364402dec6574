//! Forward evaluation, gradients, Adam ascent and decoding.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::autodiff::Tape;
use super::loss::{policy_weights, relaxation_on_tape, sample_configs, ProbMatrix};
use super::model::{forward_on_tape, GnnModel, LossKind};
use crate::error::{param, Error, Result};
use crate::eval::p_value;
use crate::graph::{build_line_graph_operators, cut_value, Graph, Operators};
use crate::linalg::Matrix;
use crate::math::sqrt;
use crate::rng::derive;
use crate::spin::SpinConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Number of training graphs `T`.
    pub training_graphs: usize,
    /// Configurations sampled per graph for the policy gradient.
    pub samples: usize,
    pub learning_rate: f64,
    /// Multiplies the learning rate after every epoch.
    pub lr_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Subtract the mean sample reward in the policy gradient.
    pub baseline: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            training_graphs: 5000,
            samples: 10,
            learning_rate: 1e-3,
            lr_decay: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            batch_size: 1,
            epochs: 1,
            baseline: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(param("samples (K) must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(param("batch_size must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(param("learning_rate must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Row-stochastic output of the network on `g`.
pub fn forward(model: &GnnModel, ops: &Operators) -> Result<ProbMatrix> {
    let mut tape = Tape::new();
    let f = forward_on_tape(model, ops, &mut tape)?;
    ProbMatrix::new(tape.value(f.probs).clone())
}

/// Objective value and its gradient for one graph.
#[derive(Debug, Clone)]
pub struct GraphGradient {
    /// Relaxed cut, or the policy surrogate.
    pub objective: f64,
    /// Gradients in [`GnnModel::params`] order.
    pub grads: Vec<Matrix>,
    pub probs: ProbMatrix,
    /// Mean sampled cut (policy gradient only).
    pub mean_reward: Option<f64>,
    pub clamped_logs: usize,
}

/// Gradient of the model's objective on one graph. `seed` drives the policy
/// samples and is unused for the relaxation loss.
pub fn objective_gradient(model: &GnnModel, g: &Graph, ops: &Operators, samples: usize, baseline: bool, seed: u64) -> Result<GraphGradient> {
    let mut tape = Tape::new();
    let f = forward_on_tape(model, ops, &mut tape)?;
    let probs = ProbMatrix::new(tape.value(f.probs).clone())?;
    let (root, mean_reward, clamped_logs) = match model.config.loss {
        LossKind::Relaxation => (relaxation_on_tape(&mut tape, f.probs, &ops.laplacian), None, 0),
        LossKind::PolicyGradient => {
            let xs = sample_configs(&probs, samples, seed);
            let (rewards, w) = policy_weights(&xs, g, baseline)?;
            let clamped = probs.matrix().data.iter().zip(&w.data).filter(|(p, wv)| **wv != 0.0 && **p < super::autodiff::LOG_FLOOR).count();
            let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
            (tape.weighted_log(f.probs, w), Some(mean), clamped)
        }
    };
    let objective = tape.scalar(root);
    let mut all = tape.backward(root);
    let grads = f
        .params
        .iter()
        .zip(model.params())
        .map(|(v, m)| all[v.0].take().unwrap_or_else(|| Matrix::zeros(m.rows, m.cols)))
        .collect();
    Ok(GraphGradient { objective, grads, probs, mean_reward, clamped_logs })
}

/// Adam moments for ascent.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<Matrix>,
    v: Vec<Matrix>,
    t: i32,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(model: &GnnModel, beta1: f64, beta2: f64) -> Self {
        let zeros: Vec<Matrix> = model.params().map(|p| Matrix::zeros(p.rows, p.cols)).collect();
        Self { m: zeros.clone(), v: zeros, t: 0, beta1, beta2, eps: 1e-8 }
    }

    /// Moves parameters along `+grads` (ascent).
    pub fn step(&mut self, model: &mut GnnModel, grads: &[Matrix], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for (((p, g), m), v) in model.params_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = self.beta1 * m.data[i] + (1.0 - self.beta1) * gi;
                v.data[i] = self.beta2 * v.data[i] + (1.0 - self.beta2) * gi * gi;
                let mh = m.data[i] / c1;
                let vh = v.data[i] / c2;
                p.data[i] += lr * mh / (sqrt(vh) + self.eps);
            }
        }
    }
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_objective: f64,
    /// Mean cut of the threshold decode, measured before each update.
    pub mean_cut: f64,
    pub mean_p: f64,
    pub clamped_logs: usize,
}

/// Stochastic gradient ascent of the model's objective over `graphs`.
///
/// Within a mini-batch, per-graph gradients are summed in graph order and
/// averaged, so results do not depend on scheduling.
pub fn train(mut model: GnnModel, cfg: &TrainConfig, graphs: &[Graph]) -> Result<(GnnModel, Vec<EpochStats>)> {
    cfg.validate()?;
    let first = graphs.first().ok_or_else(|| param("empty training set"))?;
    let (n, d) = (first.n(), first.regular_degree().ok_or_else(|| param("training graphs must be regular"))?);
    if graphs.iter().any(|g| g.n() != n || g.regular_degree() != Some(d)) {
        return Err(param("training graphs must share n and d"));
    }
    let ops: Vec<Operators> = graphs.iter().map(|g| build_line_graph_operators(g, model.hops())).collect::<Result<_>>()?;
    let mut adam = Adam::new(&model, cfg.beta1, cfg.beta2);
    let mut lr = cfg.learning_rate;
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut step = 0usize;
    for epoch in 0..cfg.epochs {
        let (mut obj_sum, mut cut_sum, mut clamped) = (0.0, 0.0, 0usize);
        for (b, batch) in graphs.chunks(cfg.batch_size).enumerate() {
            let base = b * cfg.batch_size;
            let mut acc: Option<Vec<Matrix>> = None;
            for (offset, g) in batch.iter().enumerate() {
                let idx = base + offset;
                let seed = derive(cfg.seed, (epoch * graphs.len() + idx) as u64);
                let gg = objective_gradient(&model, g, &ops[idx], cfg.samples, cfg.baseline, seed)?;
                if !gg.objective.is_finite() || gg.grads.iter().any(|m| m.data.iter().any(|x| !x.is_finite())) {
                    return Err(Error::NonFinite {
                        step,
                        detail: format!("epoch {epoch}, graph {idx}, objective {}", gg.objective),
                    });
                }
                obj_sum += gg.objective;
                cut_sum += cut_value(g, &threshold_decode(&gg.probs))? as f64;
                clamped += gg.clamped_logs;
                match acc.as_mut() {
                    None => acc = Some(gg.grads),
                    Some(a) => a.iter_mut().zip(&gg.grads).for_each(|(x, y)| x.add_assign(y)),
                }
            }
            let mut grads = acc.expect("non-empty batch");
            grads.iter_mut().for_each(|m| m.scale(1.0 / batch.len() as f64));
            adam.step(&mut model, &grads, lr);
            step += 1;
        }
        let count = graphs.len() as f64;
        let mean_cut = cut_sum / count;
        let stats = EpochStats {
            epoch,
            mean_objective: obj_sum / count,
            mean_cut,
            mean_p: p_value(mean_cut, n, d),
            clamped_logs: clamped,
        };
        log::info!("epoch {epoch}: objective {:.4}, mean P {:.4}", stats.mean_objective, stats.mean_p);
        curve.push(stats);
        lr *= cfg.lr_decay;
    }
    Ok((model, curve))
}

/// `x_i = +1` iff `p_i ≥ ½`.
pub fn threshold_decode(pi: &ProbMatrix) -> SpinConfig {
    SpinConfig::new((0..pi.n()).map(|i| if pi.plus(i) >= 0.5 { 1 } else { -1 }).collect()).expect("±1")
}

/// Test-time cut. Relaxation models threshold at ½; policy-gradient models
/// also draw `samples` configurations and keep the best cut, preferring the
/// threshold decode and then earlier samples on ties.
pub fn infer_cut(model: &GnnModel, g: &Graph, samples: usize, seed: u64) -> Result<SpinConfig> {
    let ops = build_line_graph_operators(g, model.hops())?;
    let pi = forward(model, &ops)?;
    let decoded = threshold_decode(&pi);
    if model.config.loss == LossKind::Relaxation {
        return Ok(decoded);
    }
    let mut best_cut = cut_value(g, &decoded)?;
    let mut best = decoded;
    for x in sample_configs(&pi, samples, seed) {
        let c = cut_value(g, &x)?;
        if c > best_cut {
            best_cut = c;
            best = x;
        }
    }
    Ok(best)
}
