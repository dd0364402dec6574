//! Running experiments: seeded graph sets, a bounded worker pool and
//! deterministic record ordering.
//!
//! Every random choice derives from the experiment's master seed:
//! benchmark graph `i` uses `derive(master, i)`, training graph `t` uses
//! `derive(master, 2⁶³ + t)`, so the two sets never share a seed for any
//! realistic graph count. Trials run in parallel and are sorted afterwards,
//! so results do not depend on the number of workers.

use std::time::Instant;

use rayon::prelude::*;
use regcut_core::eo::{eo_run, EoParams};
use regcut_core::eval::{Method, TrialRecord};
use regcut_core::gnn::{infer_cut, train, EpochStats, GnnModel, TrainConfig};
use regcut_core::rng::derive;
use regcut_core::sdp::{gw_solve, SdpParams};
use regcut_core::{cut_value, generate_regular, Graph};

use crate::config::{loss_for, ExperimentConfig};
use crate::error::{param, Result};
use crate::files::read_checkpoint;

/// Environment variable bounding the worker pool.
pub const THREADS_VAR: &str = "REGCUT_THREADS";

/// First seed index of the training stream.
pub const TRAINING_STREAM: u64 = 1 << 63;
const MODEL_INIT_INDEX: u64 = u64::MAX;
const TRAINER_INDEX: u64 = u64::MAX - 1;

pub fn graph_seed(master: u64, index: u64) -> u64 {
    derive(master, index)
}

pub fn training_seed(master: u64, index: u64) -> u64 {
    derive(master, TRAINING_STREAM + index)
}

/// Seed handed to the solver for the trial on a graph.
pub fn trial_seed(graph_seed: u64) -> u64 {
    derive(graph_seed, 0)
}

/// Worker count from `REGCUT_THREADS`; `None` when unset.
pub fn worker_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(param(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
    }
}

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = worker_threads()?.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| param(format!("cannot start worker pool: {e}")))
}

/// A trained or loaded model, or the reason there is none.
type ModelSlot = std::result::Result<GnnModel, String>;

/// Runs one experiment on the current rayon pool. Only an invalid
/// configuration is an error; failed trials come back as error records.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let model: Option<ModelSlot> = match cfg.method {
        Method::Eo | Method::Sdp => None,
        Method::GnnRelax | Method::GnnPg => Some(prepare_model(cfg)),
    };
    let mut records: Vec<TrialRecord> =
        (0..cfg.graph_count as u64).into_par_iter().map(|i| run_trial(cfg, i, model.as_ref())).collect();
    records.sort_by_key(TrialRecord::sort_key);
    Ok(records)
}

/// Runs every experiment on a pool sized by `REGCUT_THREADS` and returns
/// all records in sorted order.
pub fn run_all(cfgs: &[ExperimentConfig]) -> Result<Vec<TrialRecord>> {
    cfgs.iter().try_for_each(ExperimentConfig::validate)?;
    let pool = thread_pool()?;
    let mut records = Vec::new();
    for cfg in cfgs {
        records.extend(pool.install(|| run_experiment(cfg))?);
    }
    records.sort_by_key(TrialRecord::sort_key);
    Ok(records)
}

fn run_trial(cfg: &ExperimentConfig, index: u64, model: Option<&ModelSlot>) -> TrialRecord {
    let gseed = graph_seed(cfg.master_seed, index);
    let tseed = trial_seed(gseed);
    let start = Instant::now();
    let outcome = generate_regular(cfg.n, cfg.d, gseed).map_err(|e| e.to_string()).and_then(|g| match model {
        None => solve(cfg.method, &g, &cfg.eo, &cfg.sdp, None, cfg.train.samples, tseed),
        Some(Ok(m)) => solve(cfg.method, &g, &cfg.eo, &cfg.sdp, Some(m), cfg.train.samples, tseed),
        Some(Err(e)) => Err(e.clone()),
    });
    let mut record = match outcome {
        Ok(cut) => TrialRecord::success(cfg.method, cfg.n, cfg.d, index, gseed, tseed, cut),
        Err(e) => {
            log::warn!("{} n={} d={} graph {index}: {e}", cfg.method, cfg.n, cfg.d);
            TrialRecord::failure(cfg.method, cfg.n, cfg.d, index, gseed, tseed, e)
        }
    };
    record.wall_time_ms = start.elapsed().as_millis() as u64;
    record
}

/// Best cut found by `method` on `g`. The `seed` replaces the seeds of the
/// parameter blocks. GNN methods need a model.
pub fn solve(
    method: Method,
    g: &Graph,
    eo: &EoParams,
    sdp: &SdpParams,
    model: Option<&GnnModel>,
    samples: usize,
    seed: u64,
) -> std::result::Result<u64, String> {
    let cut = match method {
        Method::Eo => eo_run(g, &EoParams { seed, ..eo.clone() }).map(|r| r.best_cut),
        Method::Sdp => gw_solve(g, &SdpParams { seed, ..sdp.clone() }).map(|r| r.best_cut),
        Method::GnnRelax | Method::GnnPg => {
            let model = model.ok_or("no model available")?;
            infer_cut(model, g, samples, seed).and_then(|x| cut_value(g, &x))
        }
    };
    cut.map_err(|e| e.to_string())
}

fn prepare_model(cfg: &ExperimentConfig) -> ModelSlot {
    match &cfg.checkpoint {
        Some(path) => {
            let model = read_checkpoint(path).map_err(|e| e.to_string())?;
            if Some(model.config.loss) != loss_for(cfg.method) {
                return Err(format!("{} holds a model of the wrong loss for {}", path.display(), cfg.method));
            }
            Ok(model)
        }
        None => train_model(cfg).map(|(m, _)| m).map_err(|e| format!("training failed: {e}")),
    }
}

/// Trains the configured model on `train.training_graphs` fresh graphs from
/// the training seed stream.
pub fn train_model(cfg: &ExperimentConfig) -> Result<(GnnModel, Vec<EpochStats>)> {
    let count = cfg.train.training_graphs as u64;
    let graphs: Vec<Graph> = (0..count)
        .into_par_iter()
        .map(|t| generate_regular(cfg.n, cfg.d, training_seed(cfg.master_seed, t)))
        .collect::<regcut_core::Result<_>>()?;
    let model = GnnModel::new(cfg.model.clone(), derive(cfg.master_seed, MODEL_INIT_INDEX))?;
    let tc = TrainConfig { seed: derive(cfg.master_seed, TRAINER_INDEX), ..cfg.train.clone() };
    log::info!("training {} on {} graphs (n={}, d={})", cfg.method, graphs.len(), cfg.n, cfg.d);
    Ok(train(model, &tc, &graphs)?)
}
