//! The line-graph network: coupled updates of node features on `G` and arc
//! features on its non-backtracking line graph.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::graph::Operators;
use crate::linalg::Matrix;
use crate::math::sqrt;
use crate::rng::rng_from_seed;

/// Which unsupervised objective a model is trained with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    #[serde(rename = "relaxation")]
    Relaxation,
    #[serde(rename = "policy-gradient")]
    PolicyGradient,
}

impl LossKind {
    pub fn code(self) -> u8 {
        match self {
            LossKind::Relaxation => 0,
            LossKind::PolicyGradient => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(LossKind::Relaxation),
            1 => Some(LossKind::PolicyGradient),
            _ => None,
        }
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Number of layers `K`.
    pub layers: usize,
    /// Number of saturated adjacency powers `J`.
    pub hops: usize,
    /// Interior width `b_k`; must be even.
    pub width: usize,
    pub loss: LossKind,
    /// Adds the `D·u` term to the node update.
    pub degree_term: bool,
    /// Centers and scales every interior feature channel over the graph.
    pub normalize: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { layers: 30, hops: 3, width: 10, loss: LossKind::Relaxation, degree_term: false, normalize: true }
    }
}

impl ModelConfig {
    pub fn widths(&self) -> Vec<usize> {
        let mut w = alloc::vec![self.width; self.layers + 1];
        w[0] = 1;
        w[self.layers] = 2;
        w
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hops == 0 {
            return Err(Error::Config("layers and hops must be positive".into()));
        }
        if self.layers > 1 && (self.width == 0 || !self.width.is_multiple_of(2)) {
            return Err(Error::Config(format!("interior width {} must be positive and even", self.width)));
        }
        Ok(())
    }
}

/// Parameter blocks are ordered `[self, degree, hop_0 .. hop_{J−1}, pm, pd]`.
pub const SELF: usize = 0;
pub const DEGREE: usize = 1;
pub const FIRST_HOP: usize = 2;

/// Weights of one layer mapping width `b_in` to `b_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Node-update blocks, each `b_in × b_out`.
    pub theta: Vec<Matrix>,
    /// Arc-update blocks: the first `J + 2` are `b_in × b_out`, the two
    /// incidence blocks act on the new node features and are `b_out × b_out`.
    /// Empty for the last layer, whose arc output is never read.
    pub gamma: Vec<Matrix>,
}

/// Parameters `Θ` plus architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    pub config: ModelConfig,
    pub layers: Vec<LayerParams>,
}

impl GnnModel {
    /// Uniform `[−s, s]` initialization with `s = √(6 / (b_in + b_out))`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        Self::build(config, |rows, cols, rng| {
            let s = sqrt(6.0 / (rows + cols) as f64);
            Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-s..=s)).collect())
        }, seed)
    }

    pub fn zeros(config: ModelConfig) -> Result<Self> {
        Self::build(config, |rows, cols, _| Matrix::zeros(rows, cols), 0)
    }

    fn build(config: ModelConfig, mut init: impl FnMut(usize, usize, &mut crate::rng::Rng) -> Matrix, seed: u64) -> Result<Self> {
        config.validate()?;
        let widths = config.widths();
        let mut rng = rng_from_seed(seed);
        let blocks = config.hops + 4;
        let mut layers = Vec::with_capacity(config.layers);
        for k in 0..config.layers {
            let (b_in, b_out) = (widths[k], widths[k + 1]);
            let theta = (0..blocks).map(|_| init(b_in, b_out, &mut rng)).collect();
            let gamma = if k + 1 == config.layers {
                Vec::new()
            } else {
                (0..blocks)
                    .map(|s| if s >= blocks - 2 { init(b_out, b_out, &mut rng) } else { init(b_in, b_out, &mut rng) })
                    .collect()
            };
            layers.push(LayerParams { theta, gamma });
        }
        Ok(Self { config, layers })
    }

    pub fn hops(&self) -> usize {
        self.config.hops
    }

    pub fn params(&self) -> impl Iterator<Item = &Matrix> {
        self.layers.iter().flat_map(|l| l.theta.iter().chain(l.gamma.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut Matrix> {
        self.layers.iter_mut().flat_map(|l| l.theta.iter_mut().chain(l.gamma.iter_mut()))
    }

    pub fn param_count(&self) -> usize {
        self.params().map(|m| m.data.len()).sum()
    }

    /// Checks that parameter shapes agree with the configuration.
    pub fn check_shapes(&self) -> Result<()> {
        self.config.validate()?;
        let widths = self.config.widths();
        let blocks = self.config.hops + 4;
        if self.layers.len() != self.config.layers {
            return Err(Error::Config("layer count mismatch".into()));
        }
        for (k, l) in self.layers.iter().enumerate() {
            let (b_in, b_out) = (widths[k], widths[k + 1]);
            let last = k + 1 == self.config.layers;
            let theta_ok = l.theta.len() == blocks && l.theta.iter().all(|m| m.shape() == (b_in, b_out));
            let gamma_ok = if last {
                l.gamma.is_empty()
            } else {
                l.gamma.len() == blocks
                    && l.gamma.iter().enumerate().all(|(s, m)| m.shape() == if s >= blocks - 2 { (b_out, b_out) } else { (b_in, b_out) })
            };
            if !theta_ok || !gamma_ok {
                return Err(Error::Config(format!("parameter shapes of layer {k} do not match widths")));
            }
        }
        Ok(())
    }
}

/// Tape handles produced by [`forward_on_tape`].
pub struct Forward {
    /// Parameter leaves in [`GnnModel::params`] order.
    pub params: Vec<Var>,
    /// Row-stochastic `n × 2` probabilities; column 0 is `P(x_i = +1)`.
    pub probs: Var,
}

/// Records a forward pass. Inputs are vertex degrees on `G` and
/// non-backtracking degrees on the line graph.
pub fn forward_on_tape<'a>(model: &GnnModel, ops: &'a Operators, tape: &mut Tape<'a>) -> Result<Forward> {
    model.check_shapes()?;
    let cfg = &model.config;
    if ops.hops < cfg.hops {
        return Err(Error::Config(format!("operators built with J={} but the model needs J={}", ops.hops, cfg.hops)));
    }
    let params: Vec<Var> = model.params().map(|m| tape.leaf(m.clone())).collect();

    let mut u = tape.leaf(Matrix::from_vec(ops.n, 1, ops.degree.clone()));
    let mut v = tape.leaf(Matrix::from_vec(ops.arc_count(), 1, ops.nb_degree.clone()));
    let blocks = cfg.hops + 4;
    let mut cursor = 0usize;
    for k in 0..cfg.layers {
        let last = k + 1 == cfg.layers;
        let theta = &params[cursor..cursor + blocks];
        cursor += blocks;

        let mut node_terms = alloc::vec![tape.matmul(u, theta[SELF])];
        if cfg.degree_term {
            let du = tape.row_scale(&ops.degree, u);
            node_terms.push(tape.matmul(du, theta[DEGREE]));
        }
        for j in 0..cfg.hops {
            let au = tape.sparse(&ops.power_adjacency[j], u);
            node_terms.push(tape.matmul(au, theta[FIRST_HOP + j]));
        }
        let pm_v = tape.sparse(&ops.pm, v);
        node_terms.push(tape.matmul(pm_v, theta[blocks - 2]));
        let pd_v = tape.sparse(&ops.pd, v);
        node_terms.push(tape.matmul(pd_v, theta[blocks - 1]));
        let pre_u = tape.sum(node_terms);

        if last {
            u = pre_u;
            break;
        }
        let width = model.config.widths()[k + 1];
        let new_u = activate(tape, pre_u, width, cfg.normalize);

        let gamma = &params[cursor..cursor + blocks];
        cursor += blocks;
        let mut arc_terms = alloc::vec![tape.matmul(v, gamma[SELF])];
        let dv = tape.row_scale(&ops.nb_degree, v);
        arc_terms.push(tape.matmul(dv, gamma[DEGREE]));
        for j in 0..cfg.hops {
            let bv = tape.sparse(&ops.power_nonbacktracking[j], v);
            arc_terms.push(tape.matmul(bv, gamma[FIRST_HOP + j]));
        }
        let pm_u = tape.sparse_t(&ops.pm, new_u);
        arc_terms.push(tape.matmul(pm_u, gamma[blocks - 2]));
        let pd_u = tape.sparse_t(&ops.pd, new_u);
        arc_terms.push(tape.matmul(pd_u, gamma[blocks - 1]));
        let pre_v = tape.sum(arc_terms);
        v = activate(tape, pre_v, width, cfg.normalize);
        u = new_u;
    }
    let probs = tape.softmax_rows(u);
    Ok(Forward { params, probs })
}

/// ReLU on the first half of the channels, identity on the second, followed
/// by optional per-channel normalization.
fn activate(tape: &mut Tape<'_>, pre: Var, width: usize, normalize: bool) -> Var {
    let act = tape.split_relu(pre, width / 2);
    if normalize {
        tape.normalize(act)
    } else {
        act
    }
}
