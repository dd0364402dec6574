//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "method": "eo", "n": 100, "d": 3, "graphCount": 50, "masterSeed": 1,
//!   "eo": { "tau": 1.4, "restarts": 2 },
//!   "output": "results/eo.csv"
//! }
//! ```
//!
//! Parameter blocks (`eo`, `sdp`, `model`, `train`) are optional and take
//! their field names from the solver types. A benchmark file may also hold
//! an array of such objects, one per table cell.

use std::path::{Path, PathBuf};

use regcut_core::eo::EoParams;
use regcut_core::eval::Method;
use regcut_core::gnn::{LossKind, ModelConfig, TrainConfig};
use regcut_core::sdp::SdpParams;
use serde::{Deserialize, Serialize};

use crate::error::{param, HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub graph_count: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub eo: EoParams,
    #[serde(default)]
    pub sdp: SdpParams,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    /// Evaluate this pretrained model instead of training one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(method: Method, n: usize, d: usize, graph_count: usize, master_seed: u64) -> Self {
        Self {
            method,
            n,
            d,
            graph_count,
            master_seed,
            eo: EoParams::default(),
            sdp: SdpParams::default(),
            model: ModelConfig { loss: loss_for(method).unwrap_or(LossKind::Relaxation), ..ModelConfig::default() },
            train: TrainConfig::default(),
            checkpoint: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.graph_count == 0 {
            return Err(param("graphCount must be at least 1"));
        }
        if self.n == 0 || self.d == 0 || self.d >= self.n || !(self.n * self.d).is_multiple_of(2) {
            return Err(param(format!("no {}-regular graph on {} vertices", self.d, self.n)));
        }
        match self.method {
            Method::Eo => self.eo.validate()?,
            Method::Sdp => self.sdp.validate()?,
            Method::GnnRelax | Method::GnnPg => {
                self.model.validate()?;
                self.train.validate()?;
                if self.checkpoint.is_none() && self.train.training_graphs == 0 {
                    return Err(param("training_graphs must be at least 1 without a checkpoint"));
                }
                if Some(self.model.loss) != loss_for(self.method) {
                    return Err(param(format!("model.loss does not match method {}", self.method)));
                }
            }
        }
        Ok(())
    }
}

/// The training objective a GNN method implies.
pub fn loss_for(method: Method) -> Option<LossKind> {
    match method {
        Method::GnnRelax => Some(LossKind::Relaxation),
        Method::GnnPg => Some(LossKind::PolicyGradient),
        Method::Eo | Method::Sdp => None,
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Box<ExperimentConfig>),
    Many(Vec<ExperimentConfig>),
}

/// Parses one config object or an array of them. A GNN config whose
/// `model.loss` is absent gets the loss its method implies.
pub fn parse_configs(text: &str) -> serde_json::Result<Vec<ExperimentConfig>> {
    let raw: serde_json::Value = serde_json::from_str(text)?;
    let fill = |mut v: serde_json::Value| {
        let method = v.get("method").and_then(|m| m.as_str()).and_then(|m| m.parse().ok());
        if let (Some(loss), Some(obj)) = (method.and_then(loss_for), v.as_object_mut()) {
            let model = obj.entry("model").or_insert_with(|| serde_json::json!({}));
            if let Some(m) = model.as_object_mut() {
                m.entry("loss").or_insert_with(|| serde_json::to_value(loss).expect("enum"));
            }
        }
        v
    };
    let raw = match raw {
        serde_json::Value::Array(items) => serde_json::Value::Array(items.into_iter().map(fill).collect()),
        other => fill(other),
    };
    Ok(match serde_json::from_value(raw)? {
        OneOrMany::One(c) => vec![*c],
        OneOrMany::Many(v) => v,
    })
}

pub fn load_configs(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
    let cfgs = parse_configs(&text).map_err(|source| HarnessError::Json { path: path.into(), source })?;
    if cfgs.is_empty() {
        return Err(param(format!("{}: no experiments", path.display())));
    }
    Ok(cfgs)
}

/// Solver parameter blocks without the experiment fields, for `solve`.
/// Any other keys, such as those of a full experiment config, are ignored.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct SolverBlocks {
    pub eo: EoParams,
    pub sdp: SdpParams,
    pub train: TrainConfig,
}

pub fn load_blocks(path: &Path) -> Result<SolverBlocks> {
    let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })
}
