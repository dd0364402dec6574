//! Simple undirected graphs, the random d-regular generator, and the cut
//! objective.

mod operators;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{param, Error, Result};
use crate::linalg::Csr;
use crate::rng::rng_from_seed;
use crate::spin::SpinConfig;

pub use operators::{build_line_graph_operators, DirectedEdgeIndex, Operators};

/// Restart cap for the pairing-model sampler.
pub const MAX_RESTARTS: usize = 10_000;

/// Immutable simple graph with unit weights. Vertices are `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Common degree when the graph is regular.
    d: Option<usize>,
    /// Sorted, each pair with `i < j`.
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    seed: u64,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting loops and duplicates.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges_seeded(n, edges, 0)
    }

    pub fn from_edges_seeded(n: usize, edges: &[(usize, usize)], seed: u64) -> Result<Self> {
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(param(format!("edge ({a},{b}) out of range for n={n}")));
            }
            if a == b {
                return Err(param(format!("self-loop at vertex {a}")));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(param(format!("duplicate edge ({},{})", w[0].0, w[0].1)));
        }

        let mut deg = vec![0usize; n];
        for &(a, b) in &canon {
            deg[a] += 1;
            deg[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0usize; offsets[n]];
        for &(a, b) in &canon {
            neighbors[fill[a]] = b;
            fill[a] += 1;
            neighbors[fill[b]] = a;
            fill[b] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        let d = match deg.first() {
            Some(&d0) if deg.iter().all(|&x| x == d0) => Some(d0),
            _ => None,
        };
        Ok(Self { n, d, edges: canon, offsets, neighbors, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Common degree, if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Position of `b` in `a`'s sorted neighbor list.
    pub(crate) fn neighbor_slot(&self, a: usize, b: usize) -> Option<usize> {
        self.neighbors(a).binary_search(&b).ok().map(|k| self.offsets[a] + k)
    }

    /// 0/1 adjacency as a sparse matrix.
    pub fn adjacency(&self) -> Csr {
        let mut t = Vec::with_capacity(2 * self.edges.len());
        for &(a, b) in &self.edges {
            t.push((a, b, 1.0));
            t.push((b, a, 1.0));
        }
        Csr::from_triplets(self.n, self.n, t)
    }

    /// Graph Laplacian `D − A`.
    pub fn laplacian(&self) -> Csr {
        let mut t = Vec::with_capacity(2 * self.edges.len() + self.n);
        for v in 0..self.n {
            t.push((v, v, self.degree(v) as f64));
        }
        for &(a, b) in &self.edges {
            t.push((a, b, -1.0));
            t.push((b, a, -1.0));
        }
        Csr::from_triplets(self.n, self.n, t)
    }

    /// `xᵀ ℒ x = Σ_{(i,j)∈E} (x_i − x_j)²`.
    pub fn laplacian_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "laplacian_form dimension");
        self.edges.iter().map(|&(a, b)| (x[a] - x[b]) * (x[a] - x[b])).sum()
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(param("permutation length differs from vertex count"));
        }
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::from_edges_seeded(self.n, &edges, self.seed)
    }
}

/// Samples a simple `d`-regular graph on `n` vertices.
///
/// Stubs are paired one edge at a time; a pair that would create a loop or a
/// repeated edge is redrawn, and if the remaining stubs admit no valid pair
/// the whole sample restarts. Deterministic given `seed`.
pub fn generate_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n == 0 || d == 0 {
        return Err(param("n and d must be positive"));
    }
    if d >= n {
        return Err(param(format!("degree d={d} must be below n={n}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(param(format!("n·d = {} must be even", n * d)));
    }
    let mut rng = rng_from_seed(seed);
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
    let mut stubs: Vec<usize> = Vec::with_capacity(n * d);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * d / 2);

    'restart: for _ in 0..MAX_RESTARTS {
        adj.iter_mut().for_each(Vec::clear);
        edges.clear();
        stubs.clear();
        stubs.extend((0..n).flat_map(|v| core::iter::repeat_n(v, d)));

        let mut misses = 0usize;
        while !stubs.is_empty() {
            let len = stubs.len();
            let i = rng.random_range(0..len);
            let mut j = rng.random_range(0..len - 1);
            if j >= i {
                j += 1;
            }
            let (a, b) = (stubs[i], stubs[j]);
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
                edges.push((a.min(b), a.max(b)));
                let (hi, lo) = (i.max(j), i.min(j));
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                misses = 0;
                continue;
            }
            misses += 1;
            if misses >= 64 {
                if !has_valid_pair(&stubs, &adj) {
                    continue 'restart;
                }
                misses = 0;
            }
        }
        return Graph::from_edges_seeded(n, &edges, seed);
    }
    Err(Error::Generation { n, d, restarts: MAX_RESTARTS })
}

fn has_valid_pair(stubs: &[usize], adj: &[Vec<usize>]) -> bool {
    let mut verts: Vec<usize> = stubs.to_vec();
    verts.sort_unstable();
    verts.dedup();
    verts.iter().enumerate().any(|(k, &a)| verts[k + 1..].iter().any(|&b| !adj[a].contains(&b)))
}

/// Number of edges whose endpoints carry different spins.
pub fn cut_value(g: &Graph, x: &SpinConfig) -> Result<u64> {
    if x.len() != g.n() {
        return Err(param(format!("spin vector has length {}, graph has {} vertices", x.len(), g.n())));
    }
    Ok(g.edges().iter().filter(|&&(a, b)| x[a] != x[b]).count() as u64)
}

/// Weighted cut `½ Σ_{i<j} w_ij (1 − x_i x_j)` over an explicit weighted edge
/// list.
pub fn weighted_cut_value(edges: &[(usize, usize, f64)], x: &SpinConfig) -> Result<f64> {
    let mut total = 0.0;
    for &(a, b, w) in edges {
        if a >= x.len() || b >= x.len() {
            return Err(param(format!("edge ({a},{b}) out of range")));
        }
        total += 0.5 * w * (1.0 - f64::from(x[a]) * f64::from(x[b]));
    }
    Ok(total)
}

/// A few fixed graphs used throughout the tests and docs.
pub mod small {
    use super::Graph;
    use alloc::vec::Vec;

    pub fn single_edge() -> Graph {
        Graph::from_edges(2, &[(0, 1)]).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tiny_regular_graphs_are_forced() {
        let g = generate_regular(2, 1, 99).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        let k4 = generate_regular(4, 3, 5).unwrap();
        assert_eq!(k4.edges(), small::complete(4).edges());
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(matches!(generate_regular(5, 3, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_regular(4, 4, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_regular(0, 2, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn degree_histogram_is_a_point_mass() {
        for seed in 0..100 {
            let g = generate_regular(500, 3, seed).unwrap();
            assert_eq!(g.edge_count(), 750);
            assert!((0..500).all(|v| g.degree(v) == 3), "seed {seed}");
            assert_eq!(g.regular_degree(), Some(3));
        }
    }

    #[test]
    fn dense_regimes_generate() {
        for &(n, d) in &[(500, 15), (500, 20), (50, 10), (16, 15)] {
            let g = generate_regular(n, d, 3).unwrap();
            assert_eq!(g.regular_degree(), Some(d));
            assert_eq!(g.edge_count(), n * d / 2);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_regular(60, 4, 11).unwrap(), generate_regular(60, 4, 11).unwrap());
        assert_ne!(generate_regular(60, 4, 11).unwrap(), generate_regular(60, 4, 12).unwrap());
    }

    #[test]
    fn from_edges_rejects_non_simple_input() {
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn cut_value_examples() {
        let k3 = small::complete(3);
        assert_eq!(cut_value(&k3, &SpinConfig::new(vec![1, 1, -1]).unwrap()).unwrap(), 2);
        assert_eq!(cut_value(&k3, &SpinConfig::all_up(3)).unwrap(), 0);
        assert!(cut_value(&k3, &SpinConfig::all_up(4)).is_err());
    }

    #[test]
    fn c5_optimum_by_enumeration() {
        let c5 = small::cycle(5);
        let best = (0u32..32)
            .map(|m| {
                let x: Vec<i8> = (0..5).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect();
                cut_value(&c5, &SpinConfig::new(x).unwrap()).unwrap()
            })
            .max()
            .unwrap();
        assert_eq!(best, 4);
    }

    #[test]
    fn weighted_cut_matches_unit_weights() {
        let k3 = small::complete(3);
        let w: Vec<_> = k3.edges().iter().map(|&(a, b)| (a, b, 1.0)).collect();
        let x = SpinConfig::new(vec![1, -1, -1]).unwrap();
        assert_eq!(weighted_cut_value(&w, &x).unwrap(), cut_value(&k3, &x).unwrap() as f64);
        let w2 = [(0, 1, 2.5), (1, 2, 4.0)];
        assert_eq!(weighted_cut_value(&w2, &x).unwrap(), 2.5);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let g = generate_regular(30, 4, 1).unwrap();
        assert!(g.laplacian().row_sums().iter().all(|&s| s == 0.0));
    }
}
