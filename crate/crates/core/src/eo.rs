//! τ-extremal optimization for max-cut.
//!
//! Each vertex carries a fitness `λ_i = b_i / d`, the fraction of its edges
//! that cross the cut. Vertices are ranked by ascending fitness (rank 1 is the
//! worst, ties by vertex index), a rank `k` is drawn with probability
//! `∝ k^(−τ)`, and the spin at that rank is flipped unconditionally. The best
//! configuration seen over the run is returned.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::graph::Graph;
use crate::math::powf;
use crate::rng::{derive, rng_from_seed, Rng};
use crate::spin::SpinConfig;

/// Steps per vertex when no explicit budget is given.
pub const DEFAULT_STEPS_PER_VERTEX: u64 = 10_000;
pub const DEFAULT_TAU: f64 = 1.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EoParams {
    pub tau: f64,
    /// Steps per restart; `None` means `10⁴·n`.
    pub t_max: Option<u64>,
    pub restarts: usize,
    pub seed: u64,
    /// Only flip when the move raises the chosen vertex's own fitness.
    pub gated: bool,
    /// Record `(step, cut)` every `n` steps.
    pub trace: bool,
}

impl Default for EoParams {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU, t_max: None, restarts: 2, seed: 0, gated: false, trace: false }
    }
}

impl EoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(param("tau must be positive and finite"));
        }
        if self.t_max == Some(0) {
            return Err(param("t_max must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(param("restarts must be at least 1"));
        }
        Ok(())
    }

    pub fn steps_for(&self, n: usize) -> u64 {
        self.t_max.unwrap_or(DEFAULT_STEPS_PER_VERTEX * n as u64)
    }
}

/// Per-vertex fitness and the ascending ranking `Π`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessState {
    pub lambda: Vec<f64>,
    pub bad: Vec<usize>,
    pub good: Vec<usize>,
    /// `order[k − 1]` is the vertex at rank `k`.
    pub order: Vec<usize>,
}

/// Fitness computed from scratch.
pub fn fitness(g: &Graph, x: &SpinConfig) -> Result<FitnessState> {
    if x.len() != g.n() {
        return Err(param("spin vector length differs from vertex count"));
    }
    let n = g.n();
    let bad: Vec<usize> = (0..n).map(|i| g.neighbors(i).iter().filter(|&&j| x[j] != x[i]).count()).collect();
    let good: Vec<usize> = (0..n).map(|i| g.degree(i) - bad[i]).collect();
    let lambda: Vec<f64> = (0..n)
        .map(|i| if g.degree(i) == 0 { 1.0 } else { bad[i] as f64 / g.degree(i) as f64 })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]).then(a.cmp(&b)));
    Ok(FitnessState { lambda, bad, good, order })
}

/// `P_k = k^(−τ) / Σ_m m^(−τ)` for `k = 1..=n`.
pub fn rank_distribution(n: usize, tau: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=n).map(|k| powf(k as f64, -tau)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EoResult {
    pub best: SpinConfig,
    pub best_cut: u64,
    /// Best cut of each restart, in restart order.
    pub restart_cuts: Vec<u64>,
    /// Best configuration of each restart.
    pub restart_configs: Vec<SpinConfig>,
    /// `(step, cut)` samples of the winning restart, when requested.
    pub trace: Option<Vec<(u64, u64)>>,
}

/// Runs `restarts` independent searches and keeps the best cut. Ties go to the
/// lower restart index.
pub fn eo_run(g: &Graph, p: &EoParams) -> Result<EoResult> {
    p.validate()?;
    let d = g.regular_degree().ok_or_else(|| param("extremal optimization needs a regular graph"))?;
    if g.n() == 0 {
        return Err(param("empty graph"));
    }
    let cdf = cumulative(&rank_distribution(g.n(), p.tau));
    let steps = p.steps_for(g.n());

    let mut result: Option<EoResult> = None;
    let mut restart_cuts = Vec::with_capacity(p.restarts);
    let mut restart_configs = Vec::with_capacity(p.restarts);
    for r in 0..p.restarts {
        let mut rng = rng_from_seed(derive(p.seed, r as u64));
        let x0 = SpinConfig::random(g.n(), &mut rng);
        let mut state = EoState::new(g, d, x0);
        let run = state.run(&cdf, steps, p.gated, p.trace, &mut rng);
        restart_cuts.push(run.best_cut);
        restart_configs.push(run.best.clone());
        let better = result.as_ref().is_none_or(|b| run.best_cut > b.best_cut);
        if better {
            result = Some(EoResult {
                best: run.best,
                best_cut: run.best_cut,
                restart_cuts: Vec::new(),
                restart_configs: Vec::new(),
                trace: run.trace,
            });
        }
    }
    let mut out = result.expect("at least one restart");
    out.restart_cuts = restart_cuts;
    out.restart_configs = restart_configs;
    Ok(out)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut c: Vec<f64> = p
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    if let Some(last) = c.last_mut() {
        *last = 1.0;
    }
    c
}

/// Inverse-CDF draw of a 1-based rank.
#[inline]
fn sample_rank(cdf: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1) + 1
}

struct RunOutcome {
    best: SpinConfig,
    best_cut: u64,
    trace: Option<Vec<(u64, u64)>>,
}

/// Incremental search state for one restart on a `d`-regular graph.
///
/// Vertices are keyed by `bad_i · n + i`; a Fenwick tree over those keys gives
/// the vertex of any rank in `O(log(n·d))`, with ties by index built in.
pub(crate) struct EoState<'g> {
    g: &'g Graph,
    d: usize,
    x: SpinConfig,
    bad: Vec<usize>,
    cut: u64,
    ranks: RankTree,
}

impl<'g> EoState<'g> {
    pub(crate) fn new(g: &'g Graph, d: usize, x: SpinConfig) -> Self {
        let n = g.n();
        let bad: Vec<usize> = (0..n).map(|i| g.neighbors(i).iter().filter(|&&j| x[j] != x[i]).count()).collect();
        let cut = (bad.iter().sum::<usize>() / 2) as u64;
        let mut ranks = RankTree::new(n * (d + 1));
        for (i, &b) in bad.iter().enumerate() {
            ranks.add(b * n + i, 1);
        }
        Self { g, d, x, bad, cut, ranks }
    }

    #[inline]
    fn key(&self, i: usize) -> usize {
        self.bad[i] * self.g.n() + i
    }

    pub(crate) fn vertex_at_rank(&self, k: usize) -> usize {
        self.ranks.select(k) % self.g.n()
    }

    pub(crate) fn flip(&mut self, i: usize) {
        let n = self.g.n();
        let old = self.bad[i];
        self.ranks.add(self.key(i), -1);
        self.bad[i] = self.d - old;
        self.ranks.add(self.key(i), 1);
        self.x.flip(i);
        let xi = self.x[i];
        for &j in self.g.neighbors(i) {
            self.ranks.add(self.bad[j] * n + j, -1);
            if self.x[j] != xi {
                self.bad[j] += 1;
            } else {
                self.bad[j] -= 1;
            }
            self.ranks.add(self.bad[j] * n + j, 1);
        }
        self.cut = self.cut + (self.d - old) as u64 - old as u64;
    }

    fn run(&mut self, cdf: &[f64], steps: u64, gated: bool, trace: bool, rng: &mut Rng) -> RunOutcome {
        let n = self.g.n() as u64;
        let mut best = self.x.clone();
        let mut best_cut = self.cut;
        let mut samples = trace.then(Vec::new);
        for step in 0..steps {
            if let Some(s) = samples.as_mut() {
                if step % n == 0 {
                    s.push((step, self.cut));
                }
            }
            let k = sample_rank(cdf, rng);
            let i = self.vertex_at_rank(k);
            if gated && 2 * self.bad[i] >= self.d {
                continue;
            }
            self.flip(i);
            if self.cut > best_cut {
                best_cut = self.cut;
                best.clone_from(&self.x);
            }
        }
        if let Some(s) = samples.as_mut() {
            if steps.is_multiple_of(n) {
                s.push((steps, self.cut));
            }
        }
        RunOutcome { best, best_cut, trace: samples }
    }

    #[cfg(test)]
    pub(crate) fn lambda(&self) -> Vec<f64> {
        self.bad.iter().map(|&b| b as f64 / self.d as f64).collect()
    }

    #[cfg(test)]
    pub(crate) fn order(&self) -> Vec<usize> {
        (1..=self.g.n()).map(|k| self.vertex_at_rank(k)).collect()
    }
}

/// Fenwick tree of counts supporting order-statistic queries.
struct RankTree {
    tree: Vec<i32>,
    top: usize,
}

impl RankTree {
    fn new(size: usize) -> Self {
        let top = if size == 0 { 0 } else { 1 << (usize::BITS - 1 - size.leading_zeros()) };
        Self { tree: vec![0; size + 1], top }
    }

    #[inline]
    fn add(&mut self, key: usize, delta: i32) {
        let mut i = key + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Key of the `k`-th smallest present element (1-based).
    #[inline]
    fn select(&self, mut k: usize) -> usize {
        let mut pos = 0usize;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && (self.tree[next] as usize) < k {
                pos = next;
                k -= self.tree[next] as usize;
            }
            step >>= 1;
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::exact_maxcut;
    use crate::graph::{cut_value, generate_regular, small};

    #[test]
    fn fitness_examples() {
        let k3 = small::complete(3);
        let x = SpinConfig::new(vec![1, 1, -1]).unwrap();
        let f = fitness(&k3, &x).unwrap();
        assert_eq!(f.lambda, vec![0.5, 0.5, 1.0]);
        assert_eq!(f.order, vec![0, 1, 2]);
        assert!(f.bad.iter().zip(&f.good).all(|(b, g)| b + g == 2));

        let g = generate_regular(10, 3, 1).unwrap();
        let mut x = SpinConfig::all_up(10);
        let v = 0;
        let nb = g.neighbors(v)[0];
        x.flip(nb);
        assert!((fitness(&g, &x).unwrap().lambda[v] - 1.0 / 3.0).abs() < 1e-15);
        let mut y = SpinConfig::all_up(10);
        y.flip(v);
        assert_eq!(fitness(&g, &y).unwrap().lambda[v], 1.0);
    }

    #[test]
    fn rank_distribution_examples() {
        assert_eq!(rank_distribution(1, 1.4), vec![1.0]);
        for p in rank_distribution(4, 0.0) {
            assert!((p - 0.25).abs() < 1e-15);
        }
        // (1, 2^−1.4, 3^−1.4) normalized by hand.
        let w = [1.0, 2f64.powf(-1.4), 3f64.powf(-1.4)];
        let z: f64 = w.iter().sum();
        let p = rank_distribution(3, 1.4);
        for (a, b) in p.iter().zip(w.iter().map(|v| v / z)) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((p[0] - 0.6274).abs() < 1e-4 && (p[1] - 0.2378).abs() < 1e-4 && (p[2] - 0.1348).abs() < 1e-4);
        let big: f64 = rank_distribution(1000, 1.4).iter().sum();
        assert!((big - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_sampling_follows_distribution() {
        let p = rank_distribution(5, 1.4);
        let cdf = cumulative(&p);
        let mut rng = rng_from_seed(9);
        let mut counts = [0usize; 5];
        let draws = 200_000;
        for _ in 0..draws {
            counts[sample_rank(&cdf, &mut rng) - 1] += 1;
        }
        for (c, q) in counts.iter().zip(&p) {
            let freq = *c as f64 / draws as f64;
            assert!((freq - q).abs() < 5.0 * (q * (1.0 - q) / draws as f64).sqrt());
        }
    }

    #[test]
    fn incremental_state_matches_recomputation() {
        for seed in 0..5u64 {
            let g = generate_regular(14, 3, seed).unwrap();
            let mut rng = rng_from_seed(seed + 100);
            let x0 = SpinConfig::random(14, &mut rng);
            let mut st = EoState::new(&g, 3, x0);
            let cdf = cumulative(&rank_distribution(14, 1.4));
            for _ in 0..500 {
                let i = st.vertex_at_rank(sample_rank(&cdf, &mut rng));
                st.flip(i);
                let fresh = fitness(&g, &st.x).unwrap();
                assert_eq!(st.lambda(), fresh.lambda);
                assert_eq!(st.order(), fresh.order);
                assert_eq!(st.cut, cut_value(&g, &st.x).unwrap());
                let lambda_sum: f64 = fresh.lambda.iter().sum();
                assert!((lambda_sum * 3.0 - 2.0 * st.cut as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn k4_reaches_optimum() {
        for seed in 0..20 {
            let p = EoParams { t_max: Some(20), seed, ..EoParams::default() };
            assert_eq!(eo_run(&small::complete(4), &p).unwrap().best_cut, 4);
        }
    }

    #[test]
    fn single_edge_cut_within_two_steps() {
        for seed in 0..20 {
            let p = EoParams { t_max: Some(2), restarts: 1, seed, ..EoParams::default() };
            assert_eq!(eo_run(&small::single_edge(), &p).unwrap().best_cut, 1);
        }
    }

    #[test]
    fn best_cut_is_valid_and_bounded_by_oracle() {
        for seed in 0..10 {
            let g = generate_regular(12, 3, seed).unwrap();
            let r = eo_run(&g, &EoParams { seed, ..EoParams::default() }).unwrap();
            assert_eq!(cut_value(&g, &r.best).unwrap(), r.best_cut);
            assert!(r.best_cut <= exact_maxcut(&g).unwrap().0);
            assert_eq!(r.restart_cuts.len(), 2);
            assert_eq!(r.best_cut, *r.restart_cuts.iter().max().unwrap());
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let g = generate_regular(40, 3, 2).unwrap();
        let p = EoParams { t_max: Some(4000), trace: true, seed: 8, ..EoParams::default() };
        let a = eo_run(&g, &p).unwrap();
        let b = eo_run(&g, &p).unwrap();
        assert_eq!(a, b);
        let trace = a.trace.unwrap();
        assert_eq!(trace.len(), 101);
        assert_eq!(trace[1].0, 40);
        assert!(trace.iter().all(|&(_, c)| c <= a.best_cut));
    }

    #[test]
    fn gated_variant_runs_and_stays_valid() {
        let g = generate_regular(30, 3, 2).unwrap();
        let r = eo_run(&g, &EoParams { gated: true, t_max: Some(3000), ..EoParams::default() }).unwrap();
        assert_eq!(cut_value(&g, &r.best).unwrap(), r.best_cut);
    }

    #[test]
    fn params_are_validated() {
        let g = small::complete(4);
        assert!(eo_run(&g, &EoParams { tau: 0.0, ..EoParams::default() }).is_err());
        assert!(eo_run(&g, &EoParams { restarts: 0, ..EoParams::default() }).is_err());
        assert!(eo_run(&g, &EoParams { t_max: Some(0), ..EoParams::default() }).is_err());
        assert!(eo_run(&small::path(3), &EoParams::default()).is_err());
    }
}
