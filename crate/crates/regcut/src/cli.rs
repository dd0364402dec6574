//! The `regcut` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use regcut_core::eo::{eo_run, EoParams};
use regcut_core::eval::{exact_maxcut, p_score, Method};
use regcut_core::gnn::infer_cut;
use regcut_core::sdp::{gw_solve, SdpParams};
use regcut_core::{cut_value, generate_regular, SpinConfig};

use crate::config::{load_blocks, load_configs, loss_for, ExperimentConfig, SolverBlocks};
use crate::error::{param, Result};
use crate::experiment::{graph_seed, run_all, train_model};
use crate::files::{read_checkpoint, read_graph, write_atomic, write_checkpoint, write_graph};
use crate::table::write_results;

#[derive(Debug, Parser)]
#[command(name = "regcut", version, about = "Max-cut on random regular graphs: EO, SDP and GNN solvers")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write random regular graphs as edge-list files.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Number of graphs; with more than one, --out names a directory.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Run one method on one graph file and print its cut.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Method,
        /// Trained model, required by the GNN methods.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// EO only: write `step,cut` samples taken every n steps.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        graph: PathBuf,
    },
    /// Run the experiments of a configuration file and tabulate them.
    Bench {
        #[command(flatten)]
        common: Common,
    },
    /// Print the exact maximum cut of a small graph.
    Oracle {
        /// Write the optimal assignment, one spin per line.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        graph: PathBuf,
    },
    /// Train a GNN and save a checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a command and returns what it prints on success.
fn execute(command: Command) -> Result<String> {
    match command {
        Command::Gen { common, n, d, count } => gen(common, n, d, count),
        Command::Solve { common, method, checkpoint, trace, graph } => solve(common, method, checkpoint, trace, &graph),
        Command::Bench { common } => bench(common),
        Command::Oracle { out, graph } => oracle(out, &graph),
        Command::Train { common } => train(common),
    }
}

fn first_config(path: Option<&Path>) -> Result<Option<ExperimentConfig>> {
    path.map(|p| load_configs(p).map(|mut v| v.swap_remove(0))).transpose()
}

fn gen(common: Common, n: Option<usize>, d: Option<usize>, count: Option<usize>) -> Result<String> {
    let cfg = first_config(common.config.as_deref())?;
    let n = n.or(cfg.as_ref().map(|c| c.n)).ok_or_else(|| param("gen needs --n or --config"))?;
    let d = d.or(cfg.as_ref().map(|c| c.d)).ok_or_else(|| param("gen needs --d or --config"))?;
    let count = count.or(cfg.as_ref().map(|c| c.graph_count)).unwrap_or(1);
    let master = common.seed.or(cfg.as_ref().map(|c| c.master_seed)).unwrap_or(0);
    let out = common.out.ok_or_else(|| param("gen needs --out"))?;
    if count == 0 {
        return Err(param("--count must be at least 1"));
    }
    if count > 1 {
        std::fs::create_dir_all(&out).map_err(crate::error::HarnessError::io(&out))?;
    }
    let mut listing = String::new();
    for i in 0..count as u64 {
        let g = generate_regular(n, d, graph_seed(master, i))?;
        let path = if count == 1 { out.clone() } else { out.join(format!("graph_{i:05}.txt")) };
        write_graph(&path, &g)?;
        let _ = writeln!(listing, "{}", path.display());
    }
    Ok(listing)
}

fn spins_text(x: &SpinConfig) -> String {
    x.as_slice().iter().map(|s| format!("{s}\n")).collect()
}

fn solve(common: Common, method: Method, checkpoint: Option<PathBuf>, trace: Option<PathBuf>, graph: &Path) -> Result<String> {
    let blocks = common.config.as_deref().map(load_blocks).transpose()?.unwrap_or_default();
    let SolverBlocks { eo, sdp, train } = blocks;
    if trace.is_some() && method != Method::Eo {
        return Err(param("--trace is only available for eo"));
    }
    if checkpoint.is_some() != loss_for(method).is_some() {
        return Err(param(format!("--checkpoint is {} for {method}", if checkpoint.is_some() { "not used" } else { "required" })));
    }
    let seed = common.seed.unwrap_or(0);
    let g = read_graph(graph)?;
    let (n, d) = (g.n(), g.max_degree());
    let x = match method {
        Method::Eo => {
            let r = eo_run(&g, &EoParams { seed, trace: trace.is_some(), ..eo })?;
            if let (Some(path), Some(samples)) = (&trace, &r.trace) {
                let mut s = String::from("step,cut\n");
                samples.iter().for_each(|(step, cut)| {
                    let _ = writeln!(s, "{step},{cut}");
                });
                write_atomic(path, s.as_bytes())?;
            }
            r.best
        }
        Method::Sdp => gw_solve(&g, &SdpParams { seed, ..sdp })?.best_config,
        Method::GnnRelax | Method::GnnPg => {
            let path = checkpoint.expect("checked above");
            let model = read_checkpoint(&path)?;
            if Some(model.config.loss) != loss_for(method) {
                return Err(param(format!("{} holds a model of the wrong loss for {method}", path.display())));
            }
            infer_cut(&model, &g, train.samples, seed)?
        }
    };
    let cut = cut_value(&g, &x)?;
    if let Some(path) = &common.out {
        write_atomic(path, spins_text(&x).as_bytes())?;
    }
    Ok(format!("method,n,d,seed,cut_value,P\n{method},{n},{d},{seed},{cut},{:.4}\n", p_score(cut, n, d).p))
}

fn bench(common: Common) -> Result<String> {
    let path = common.config.ok_or_else(|| param("bench needs --config"))?;
    let mut cfgs = load_configs(&path)?;
    if let Some(seed) = common.seed {
        cfgs.iter_mut().for_each(|c| c.master_seed = seed);
    }
    let out = common.out.or_else(|| cfgs[0].output.clone()).ok_or_else(|| param("no output path: set \"output\" or --out"))?;
    let records = run_all(&cfgs)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} trials failed", records.len());
    }
    Ok(write_results(&out, &records)?.text)
}

fn oracle(out: Option<PathBuf>, graph: &Path) -> Result<String> {
    let g = read_graph(graph)?;
    let (cut, x) = exact_maxcut(&g)?;
    if let Some(path) = &out {
        write_atomic(path, spins_text(&x).as_bytes())?;
    }
    Ok(format!("{cut}\n"))
}

fn train(common: Common) -> Result<String> {
    let mut cfg = first_config(common.config.as_deref())?.ok_or_else(|| param("train needs --config"))?;
    if loss_for(cfg.method).is_none() {
        return Err(param(format!("train needs a GNN method, not {}", cfg.method)));
    }
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    let out = common.out.or_else(|| cfg.output.clone()).ok_or_else(|| param("no output path: set \"output\" or --out"))?;
    cfg.checkpoint = None;
    cfg.validate()?;
    let pool = crate::experiment::thread_pool()?;
    let (model, curve) = pool.install(|| train_model(&cfg))?;
    write_checkpoint(&out, &model)?;
    let mut s = String::from("epoch,objective,mean_P\n");
    for e in &curve {
        let _ = writeln!(s, "{},{:.6},{:.4}", e.epoch, e.mean_objective, e.mean_p);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flags_and_bad_values_exit_one() {
        assert_eq!(run(["regcut", "oracle", "--bogus", "x"]), 1);
        assert_eq!(run(["regcut", "solve", "--method", "greedy", "g.txt"]), 1);
        assert_eq!(run(["regcut"]), 1);
        assert_eq!(run(["regcut", "gen", "--n", "10"]), 1);
        assert_eq!(run(["regcut", "--help"]), 0);
    }
}
