//! Line-graph neural network for max-cut, trained without labels.
//!
//! Node features on `G` and arc features on the non-backtracking line graph
//! are updated jointly, layer by layer, and exchanged through the incidence
//! matrices `Pm`/`Pd`. The final two node channels pass through a row softmax
//! to give `P(x_i = ±1)`. Two objectives are supported: the cut evaluated at
//! relaxed spins `2p − 1`, and a REINFORCE surrogate over sampled cuts.

pub mod autodiff;
pub mod checkpoint;
mod loss;
mod model;
mod train;

pub use loss::{loss_policy_gradient, loss_relaxation, policy_weights, sample_configs, ProbMatrix};
pub use model::{forward_on_tape, Forward, GnnModel, LayerParams, LossKind, ModelConfig};
pub use train::{forward, infer_cut, objective_gradient, threshold_decode, train, Adam, EpochStats, GraphGradient, TrainConfig};
