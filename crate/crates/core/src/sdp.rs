//! Goemans–Williamson: vector relaxation plus random-hyperplane rounding.
//!
//! The relaxation `max ½ Σ w_ij (1 − u_iᵀu_j)` over unit vectors is solved in
//! low rank by exact block-coordinate ascent: with the other rows fixed, the
//! optimal `u_i` is `−g_i/‖g_i‖` where `g_i = Σ_j w_ij u_j`.

use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph::{cut_value, Graph};
use crate::linalg::Matrix;
use crate::math::sqrt;
use crate::rng::{derive, rng_from_seed, Rng};
use crate::spin::SpinConfig;

/// Rounding guarantee constant `α_GW`, truncated as usually quoted.
pub const ALPHA_GW: f64 = 0.878;

/// Slack on the guarantee check for integer effects on tiny graphs.
pub const GUARANTEE_SLACK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpParams {
    /// Embedding rank; `None` means `min(n, ⌈√(2n)⌉)`.
    pub rank: Option<usize>,
    pub max_sweeps: usize,
    /// Stop once a sweep improves the objective by less than this, relatively.
    pub tolerance: f64,
    pub rounding_trials: usize,
    pub seed: u64,
}

impl Default for SdpParams {
    fn default() -> Self {
        Self { rank: None, max_sweeps: 2000, tolerance: 1e-8, rounding_trials: 500, seed: 0 }
    }
}

impl SdpParams {
    pub fn rank_for(&self, n: usize) -> usize {
        self.rank.unwrap_or_else(|| default_rank(n))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank.is_some_and(|k| k < 2) {
            return Err(param("embedding rank must be at least 2"));
        }
        if self.rounding_trials == 0 {
            return Err(param("rounding_trials must be at least 1"));
        }
        if self.max_sweeps == 0 {
            return Err(param("max_sweeps must be at least 1"));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(param("tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// `min(n, ⌈√(2n)⌉)`, floored at 2.
pub fn default_rank(n: usize) -> usize {
    let mut k = sqrt(2.0 * n as f64) as usize;
    while k * k < 2 * n {
        k += 1;
    }
    k.min(n).max(2)
}

/// Unit-norm row vector per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub u: Matrix,
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl EmbeddingMatrix {
    pub fn rank(&self) -> usize {
        self.u.cols
    }

    /// Gram matrix `X = UUᵀ`.
    pub fn gram(&self) -> Matrix {
        self.u.matmul_t(&self.u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpResult {
    pub relax_value: f64,
    pub best_cut: u64,
    pub best_config: SpinConfig,
    pub sweeps_used: usize,
    pub converged: bool,
}

/// Relaxation objective `½ Σ_{(i,j)∈E} (1 − u_iᵀu_j)`.
pub fn relaxation_objective(g: &Graph, u: &Matrix) -> f64 {
    g.edges().iter().map(|&(a, b)| 0.5 * (1.0 - dot(u.row(a), u.row(b)))).sum()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = sqrt(dot(v, v));
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
        true
    } else {
        false
    }
}

fn random_unit(dim: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if normalize(&mut v) {
            return v;
        }
    }
}

/// Exact maximizer for row `i` with the others fixed. A zero gradient leaves
/// the row unchanged.
pub(crate) fn update_row(g: &Graph, u: &mut Matrix, i: usize, grad: &mut [f64]) {
    grad.iter_mut().for_each(|v| *v = 0.0);
    for &j in g.neighbors(i) {
        for (gv, uv) in grad.iter_mut().zip(u.row(j)) {
            *gv += uv;
        }
    }
    let norm = sqrt(dot(grad, grad));
    if norm > 0.0 {
        for (dst, gv) in u.row_mut(i).iter_mut().zip(grad.iter()) {
            *dst = -gv / norm;
        }
    }
}

/// Solves the vector relaxation by cyclic block-coordinate ascent.
///
/// Rows start i.i.d. uniform on the sphere. Sweeps run in vertex order until
/// the relative objective gain of a sweep drops below `p.tolerance` or
/// `p.max_sweeps` is reached; the latter is reported via `converged = false`.
pub fn solve_vector_program(g: &Graph, p: &SdpParams) -> Result<EmbeddingMatrix> {
    p.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(param("empty graph"));
    }
    let k = p.rank_for(n);
    let mut rng = rng_from_seed(derive(p.seed, 0));
    let mut u = Matrix::zeros(n, k);
    for i in 0..n {
        u.row_mut(i).copy_from_slice(&random_unit(k, &mut rng));
    }
    let mut grad = alloc::vec![0.0; k];
    let mut objective = relaxation_objective(g, &u);
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < p.max_sweeps {
        for i in 0..n {
            update_row(g, &mut u, i, &mut grad);
        }
        // Rows drift from unit length only by rounding; renormalize to keep
        // the feasibility invariant tight.
        for i in 0..n {
            normalize(u.row_mut(i));
        }
        sweeps += 1;
        let next = relaxation_objective(g, &u);
        let gain = next - objective;
        objective = next;
        if gain <= p.tolerance * objective.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("vector program did not converge in {sweeps} sweeps");
    }
    Ok(EmbeddingMatrix { u, objective, sweeps, converged })
}

/// Best of `trials` random-hyperplane cuts. Trial `t` draws its direction from
/// `derive(seed, t)`; `rᵀu_i = 0` rounds to `+1`; ties keep the earlier trial.
pub fn round_hyperplane(emb: &EmbeddingMatrix, g: &Graph, trials: usize, seed: u64) -> Result<(SpinConfig, u64)> {
    if emb.u.rows != g.n() {
        return Err(param("embedding row count differs from vertex count"));
    }
    if trials == 0 {
        return Err(param("at least one rounding trial is required"));
    }
    let mut best: Option<(SpinConfig, u64)> = None;
    for t in 0..trials {
        let mut rng = rng_from_seed(derive(seed, t as u64));
        let r = random_unit(emb.rank(), &mut rng);
        let x: Vec<i8> = (0..g.n()).map(|i| if dot(&r, emb.u.row(i)) >= 0.0 { 1 } else { -1 }).collect();
        let x = SpinConfig::new(x)?;
        let cut = cut_value(g, &x)?;
        if best.as_ref().is_none_or(|b| cut > b.1) {
            best = Some((x, cut));
        }
    }
    Ok(best.expect("trials ≥ 1"))
}

/// Relaxation followed by rounding, with the approximation guarantee checked.
///
/// `relax_value` is the larger of the ascent objective and the best rounded
/// cut, both objectives of feasible points.
pub fn gw_solve(g: &Graph, p: &SdpParams) -> Result<SdpResult> {
    let emb = solve_vector_program(g, p)?;
    let (best_config, best_cut) = round_hyperplane(&emb, g, p.rounding_trials, derive(p.seed, 1))?;
    // A cut is itself a feasible point of the vector program (u_i = x_i·e₁);
    // on tight instances ascent approaches the optimum only sublinearly.
    let relax_value = emb.objective.max(best_cut as f64);
    if (best_cut as f64) < ALPHA_GW * relax_value - GUARANTEE_SLACK {
        return Err(Error::GuaranteeViolation { cut: best_cut, relax: relax_value });
    }
    Ok(SdpResult {
        relax_value,
        best_cut,
        best_config,
        sweeps_used: emb.sweeps,
        converged: emb.converged,
    })
}
