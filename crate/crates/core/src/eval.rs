//! Scoring: the P statistic, overlaps, a brute-force oracle, and summary
//! statistics over trial records.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph::Graph;
use crate::math::{abs, sqrt};
use crate::spin::SpinConfig;

/// Asymptotic optimum of P for random regular graphs (large `n`, then large `d`).
pub const P_STAR: f64 = 0.7632;

/// Largest graph the exhaustive oracle accepts.
pub const ORACLE_MAX_N: usize = 24;

/// A cut value normalized against the random-regular asymptotic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PScore {
    pub z: f64,
    pub n: usize,
    pub d: usize,
    pub p: f64,
}

/// `P = (z/n − d/4) / √(d/4)`. Not clamped; finite graphs can exceed [`P_STAR`].
pub fn p_value(z: f64, n: usize, d: usize) -> f64 {
    let quarter = d as f64 / 4.0;
    (z / n as f64 - quarter) / sqrt(quarter)
}

pub fn p_score(z: u64, n: usize, d: usize) -> PScore {
    let z = z as f64;
    PScore { z, n, d, p: p_value(z, n, d) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapScore {
    pub nu: f64,
}

/// `ν = |⟨x₁, x₂⟩| / n`.
pub fn overlap(x1: &SpinConfig, x2: &SpinConfig) -> Result<OverlapScore> {
    if x1.len() != x2.len() {
        return Err(param(alloc::format!("overlap of lengths {} and {}", x1.len(), x2.len())));
    }
    if x1.is_empty() {
        return Err(param("overlap of empty configurations"));
    }
    let dot: i64 = x1.as_slice().iter().zip(x2.as_slice()).map(|(&a, &b)| i64::from(a * b)).sum();
    Ok(OverlapScore { nu: abs(dot as f64) / x1.len() as f64 })
}

/// Exhaustive max-cut for `n ≤ 24`.
///
/// Vertex 0 is pinned to `+1`; the remaining `2^(n−1)` assignments are walked
/// in Gray-code order with incremental cut updates. Among optimal
/// configurations the lexicographically smallest one (with `−1 < +1`) is
/// returned.
pub fn exact_maxcut(g: &Graph) -> Result<(u64, SpinConfig)> {
    let n = g.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge { n, cap: ORACLE_MAX_N });
    }
    if n == 0 {
        return Err(param("empty graph"));
    }
    // Bit (n − 1 − i) of `mask` set ⇔ x_i = +1, for i ≥ 1, so numeric order of
    // masks is lexicographic order of configurations.
    let bit_of = |i: usize| n - 1 - i;
    let mut x: Vec<i8> = alloc::vec![-1; n];
    x[0] = 1;
    let mut cut = g.neighbors(0).len() as i64;
    let mut mask: u32 = 0;
    let (mut best, mut best_mask) = (cut, 0u32);

    let total: u32 = 1 << (n - 1);
    for step in 1..total {
        let i = 1 + step.trailing_zeros() as usize;
        let flip_vertex = n - i;
        let xv = x[flip_vertex];
        let same = g.neighbors(flip_vertex).iter().filter(|&&u| x[u] == xv).count() as i64;
        let deg = g.degree(flip_vertex) as i64;
        cut += 2 * same - deg;
        x[flip_vertex] = -xv;
        mask ^= 1 << bit_of(flip_vertex);
        if cut > best || (cut == best && mask < best_mask) {
            best = cut;
            best_mask = mask;
        }
    }
    let config: Vec<i8> = (0..n)
        .map(|i| if i == 0 || best_mask >> bit_of(i) & 1 == 1 { 1 } else { -1 })
        .collect();
    Ok((best as u64, SpinConfig::new(config)?))
}

/// Which solver produced a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "gnn-relax")]
    GnnRelax,
    #[serde(rename = "gnn-pg")]
    GnnPg,
    #[serde(rename = "sdp")]
    Sdp,
    #[serde(rename = "eo")]
    Eo,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::GnnRelax, Method::GnnPg, Method::Sdp, Method::Eo];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::GnnRelax => "gnn-relax",
            Method::GnnPg => "gnn-pg",
            Method::Sdp => "sdp",
            Method::Eo => "eo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| param(alloc::format!("unknown method `{s}`")))
    }
}

/// One (graph, method, seed) result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub graph_index: u64,
    pub graph_seed: u64,
    pub trial_seed: u64,
    pub cut_value: Option<u64>,
    pub p: Option<f64>,
    pub wall_time_ms: u64,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn success(method: Method, n: usize, d: usize, graph_index: u64, graph_seed: u64, trial_seed: u64, cut: u64) -> Self {
        Self {
            method,
            n,
            d,
            graph_index,
            graph_seed,
            trial_seed,
            cut_value: Some(cut),
            p: Some(p_score(cut, n, d).p),
            wall_time_ms: 0,
            error: None,
        }
    }

    pub fn failure(method: Method, n: usize, d: usize, graph_index: u64, graph_seed: u64, trial_seed: u64, error: String) -> Self {
        Self {
            method,
            n,
            d,
            graph_index,
            graph_seed,
            trial_seed,
            cut_value: None,
            p: None,
            wall_time_ms: 0,
            error: Some(error),
        }
    }

    /// Ordering key used for every persisted table.
    pub fn sort_key(&self) -> (Method, usize, usize, u64, u64) {
        (self.method, self.n, self.d, self.graph_index, self.trial_seed)
    }
}

/// Mean, population standard deviation and range of P for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub count: usize,
    pub mean_p: f64,
    pub std_p: f64,
    pub min_p: f64,
    pub max_p: f64,
}

/// Groups successful records by `(method, n, d)`; groups with no successful
/// trials are dropped with a warning.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(Method, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        let slot = groups.entry((r.method, r.n, r.d)).or_default();
        if let Some(p) = r.p {
            slot.push(p);
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((method, n, d), ps) in groups {
        if ps.is_empty() {
            log::warn!("no successful trials for {method} n={n} d={d}; group omitted");
            continue;
        }
        let count = ps.len();
        let mean = ps.iter().sum::<f64>() / count as f64;
        let var = ps.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / count as f64;
        let min_p = ps.iter().copied().fold(f64::INFINITY, f64::min);
        let max_p = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(Summary { method, n, d, count, mean_p: mean, std_p: sqrt(var), min_p, max_p });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cut_value, generate_regular, small};
    use crate::rng::{derive, rng_from_seed};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng as _;

    #[test]
    fn p_score_fixed_points() {
        assert_eq!(p_score(750, 1000, 3).p, 0.0);
        let (n, d) = (400usize, 4usize);
        let z = n as f64 * (1.0 + 1.0);
        assert!((p_value(z, n, d) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn p_score_reproduces_table_scale() {
        // z for which a 3-regular graph on 500 vertices scores 0.7266.
        let z = 500.0 * (0.75 + 0.7266 * 0.75f64.sqrt());
        assert!((p_value(z, 500, 3) - 0.7266).abs() < 1e-12);
    }

    #[test]
    fn overlap_examples() {
        let a = SpinConfig::new(vec![1, 1, -1, -1]).unwrap();
        let b = SpinConfig::new(vec![1, -1, 1, -1]).unwrap();
        assert_eq!(overlap(&a, &a).unwrap().nu, 1.0);
        assert_eq!(overlap(&a, &a.negated()).unwrap().nu, 1.0);
        assert_eq!(overlap(&a, &b).unwrap().nu, 0.0);
        assert!(overlap(&a, &SpinConfig::all_up(3)).is_err());
    }

    proptest! {
        #[test]
        fn overlap_symmetric_and_flip_invariant(bits in proptest::collection::vec(any::<(bool, bool)>(), 1..64)) {
            let x1 = SpinConfig::new(bits.iter().map(|b| if b.0 { 1 } else { -1 }).collect()).unwrap();
            let x2 = SpinConfig::new(bits.iter().map(|b| if b.1 { 1 } else { -1 }).collect()).unwrap();
            let v = overlap(&x1, &x2).unwrap().nu;
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, overlap(&x2, &x1).unwrap().nu);
            prop_assert_eq!(v, overlap(&x1.negated(), &x2).unwrap().nu);
            prop_assert_eq!(v, overlap(&x1, &x2.negated()).unwrap().nu);
        }
    }

    /// Independent enumerator: plain binary counting over all 2^n masks.
    fn brute_force(g: &Graph) -> u64 {
        (0u32..1 << g.n())
            .map(|m| {
                let x: Vec<i8> = (0..g.n()).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect();
                cut_value(g, &SpinConfig::new(x).unwrap()).unwrap()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn oracle_small_examples() {
        assert_eq!(exact_maxcut(&small::single_edge()).unwrap().0, 1);
        assert_eq!(exact_maxcut(&small::complete(4)).unwrap().0, 4);
        assert_eq!(exact_maxcut(&small::cycle(5)).unwrap().0, 4);
        let big = generate_regular(26, 3, 0).unwrap();
        assert!(matches!(exact_maxcut(&big), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn oracle_config_attains_value_and_is_lex_smallest() {
        let k4 = small::complete(4);
        let (v, x) = exact_maxcut(&k4).unwrap();
        assert_eq!(cut_value(&k4, &x).unwrap(), v);
        // x0 = +1 fixed, smallest remaining is (−1, −1, +1).
        assert_eq!(x.as_slice(), &[1, -1, -1, 1]);
    }

    #[test]
    fn oracle_agrees_with_independent_enumerator() {
        let mut rng = rng_from_seed(17);
        for t in 0..100u64 {
            let d = if t % 2 == 0 { 3 } else { 4 };
            let n = 2 * rng.random_range(3..=6usize);
            let g = generate_regular(n, d, derive(5, t)).unwrap();
            let (v, x) = exact_maxcut(&g).unwrap();
            assert_eq!(v, brute_force(&g), "graph {t}");
            assert_eq!(cut_value(&g, &x).unwrap(), v);
        }
    }

    #[test]
    fn aggregate_examples() {
        let mk = |p: f64| {
            let mut r = TrialRecord::success(Method::Eo, 10, 3, 0, 0, 0, 0);
            r.p = Some(p);
            r
        };
        let s = aggregate(&[mk(0.7)]);
        assert_eq!((s[0].mean_p, s[0].std_p, s[0].count), (0.7, 0.0, 1));
        let s = aggregate(&[mk(0.7), mk(0.8)]);
        assert!((s[0].mean_p - 0.75).abs() < 1e-12);
        assert!((s[0].std_p - 0.05).abs() < 1e-12);
        assert_eq!((s[0].min_p, s[0].max_p), (0.7, 0.8));
    }

    #[test]
    fn aggregate_drops_groups_without_successes() {
        let bad = TrialRecord::failure(Method::Sdp, 10, 3, 0, 0, 0, "boom".into());
        let good = TrialRecord::success(Method::Eo, 10, 3, 0, 0, 0, 12);
        let s = aggregate(&[bad, good]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].method, Method::Eo);
    }

    #[test]
    fn aggregate_mean_within_three_standard_errors() {
        let mut rng = rng_from_seed(3);
        let records: Vec<_> = (0..1000)
            .map(|i| {
                let mut r = TrialRecord::success(Method::Sdp, 100, 3, i, 0, 0, 0);
                r.p = Some(0.7 + 0.1 * (rng.random::<f64>() - 0.5));
                r
            })
            .collect();
        let s = &aggregate(&records)[0];
        // Uniform on [0.65, 0.75]: σ = 0.1/√12.
        let se = 0.1 / 12f64.sqrt() / 1000f64.sqrt();
        assert!((s.mean_p - 0.7).abs() < 3.0 * se);
        assert!((s.std_p - 0.1 / 12f64.sqrt()).abs() < 0.003);
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }
}
