//! Line-graph operators for the GNN: directed edges, the non-backtracking
//! matrix, incidence matrices and saturated adjacency powers.

use alloc::vec::Vec;

use super::Graph;
use crate::error::{param, Result};
use crate::linalg::Csr;

/// Both orientations of every edge. Undirected edge `e = (a, b)` with `a < b`
/// owns ids `2e` (a→b) and `2e + 1` (b→a), so reversal is `id ^ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedEdgeIndex {
    arcs: Vec<(usize, usize)>,
    /// Directed id of `(v → neighbors(v)[k])`, laid out like the graph's
    /// neighbor array.
    slot_ids: Vec<usize>,
}

impl DirectedEdgeIndex {
    pub fn new(g: &Graph) -> Self {
        let mut arcs = Vec::with_capacity(2 * g.edge_count());
        let mut slot_ids = alloc::vec![usize::MAX; 2 * g.edge_count()];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            arcs.push((a, b));
            arcs.push((b, a));
            slot_ids[g.neighbor_slot(a, b).unwrap()] = 2 * e;
            slot_ids[g.neighbor_slot(b, a).unwrap()] = 2 * e + 1;
        }
        Self { arcs, slot_ids }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// `(tail, head)` of arc `id`.
    #[inline]
    pub fn arc(&self, id: usize) -> (usize, usize) {
        self.arcs[id]
    }

    #[inline]
    pub fn reverse(&self, id: usize) -> usize {
        id ^ 1
    }

    pub fn id_of(&self, g: &Graph, from: usize, to: usize) -> Option<usize> {
        g.neighbor_slot(from, to).map(|s| self.slot_ids[s])
    }

    /// Arc ids leaving `v`, ordered by head vertex.
    pub fn out_arcs<'a>(&'a self, g: &'a Graph, v: usize) -> impl Iterator<Item = usize> + 'a {
        let start = g.offsets[v];
        self.slot_ids[start..start + g.degree(v)].iter().copied()
    }
}

/// Every operator the line-graph network consumes, built once per graph.
#[derive(Debug, Clone)]
pub struct Operators {
    pub n: usize,
    pub hops: usize,
    pub arcs: DirectedEdgeIndex,
    pub adjacency: Csr,
    /// Vertex degrees, the diagonal of `D`.
    pub degree: Vec<f64>,
    pub laplacian: Csr,
    /// Non-backtracking matrix on arcs.
    pub nonbacktracking: Csr,
    /// Diagonal of `B·1`.
    pub nb_degree: Vec<f64>,
    /// `n × 2|E|`, two `+1` per column.
    pub pm: Csr,
    /// `n × 2|E|`, `+1` at the tail and `−1` at the head.
    pub pd: Csr,
    /// `min(1, A^(2^j))` for `j = 0..hops`.
    pub power_adjacency: Vec<Csr>,
    /// `min(1, B^(2^j))` for `j = 0..hops`.
    pub power_nonbacktracking: Vec<Csr>,
}

impl Operators {
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }
}

/// Builds all line-graph operators with `hops` saturated powers.
pub fn build_line_graph_operators(g: &Graph, hops: usize) -> Result<Operators> {
    if hops == 0 {
        return Err(param("hop count J must be at least 1"));
    }
    let n = g.n();
    let arcs = DirectedEdgeIndex::new(g);
    let m2 = arcs.len();

    let mut b = Vec::new();
    for id in 0..m2 {
        let (tail, head) = arcs.arc(id);
        for next in arcs.out_arcs(g, head) {
            if arcs.arc(next).1 != tail {
                b.push((id, next, 1.0));
            }
        }
    }
    let nonbacktracking = Csr::from_triplets(m2, m2, b);
    let nb_degree = nonbacktracking.row_sums();

    let mut pm = Vec::with_capacity(2 * m2);
    let mut pd = Vec::with_capacity(2 * m2);
    for id in 0..m2 {
        let (tail, head) = arcs.arc(id);
        pm.push((tail, id, 1.0));
        pm.push((head, id, 1.0));
        pd.push((tail, id, 1.0));
        pd.push((head, id, -1.0));
    }

    let adjacency = g.adjacency();
    let power_adjacency = saturated_powers(&adjacency, hops);
    let power_nonbacktracking = saturated_powers(&nonbacktracking, hops);

    Ok(Operators {
        n,
        hops,
        degree: (0..n).map(|v| g.degree(v) as f64).collect(),
        laplacian: g.laplacian(),
        arcs,
        adjacency,
        nonbacktracking,
        nb_degree,
        pm: Csr::from_triplets(n, m2, pm),
        pd: Csr::from_triplets(n, m2, pd),
        power_adjacency,
        power_nonbacktracking,
    })
}

fn saturated_powers(base: &Csr, hops: usize) -> Vec<Csr> {
    let mut out = Vec::with_capacity(hops);
    let mut cur = base.clone();
    cur.values.iter_mut().for_each(|v| *v = 1.0);
    out.push(cur);
    for _ in 1..hops {
        let next = out.last().unwrap().saturated_square();
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_regular, small};
    use crate::linalg::Matrix;

    #[test]
    fn path_has_two_nonbacktracking_transitions() {
        // 0 - 1 - 2
        let g = small::path(3);
        let ops = build_line_graph_operators(&g, 1).unwrap();
        assert_eq!(ops.arc_count(), 4);
        assert_eq!(ops.nonbacktracking.nnz(), 2);
        let id = |a, b| ops.arcs.id_of(&g, a, b).unwrap();
        assert_eq!(ops.nonbacktracking.get(id(0, 1), id(1, 2)), 1.0);
        assert_eq!(ops.nonbacktracking.get(id(2, 1), id(1, 0)), 1.0);
    }

    #[test]
    fn triangle_nonbacktracking_is_a_permutation() {
        let ops = build_line_graph_operators(&small::complete(3), 1).unwrap();
        assert_eq!(ops.arc_count(), 6);
        assert!(ops.nb_degree.iter().all(|&s| s == 1.0));
        let col_sums = ops.nonbacktracking.transpose().row_sums();
        assert!(col_sums.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn single_edge_incidence_columns() {
        let g = small::single_edge();
        let ops = build_line_graph_operators(&g, 1).unwrap();
        let id = ops.arcs.id_of(&g, 0, 1).unwrap();
        assert_eq!((ops.pm.get(0, id), ops.pm.get(1, id)), (1.0, 1.0));
        assert_eq!((ops.pd.get(0, id), ops.pd.get(1, id)), (1.0, -1.0));
    }

    #[test]
    fn reversal_is_fixed_point_free_involution() {
        let g = generate_regular(20, 3, 4).unwrap();
        let arcs = DirectedEdgeIndex::new(&g);
        for id in 0..arcs.len() {
            let r = arcs.reverse(id);
            assert_ne!(r, id);
            assert_eq!(arcs.reverse(r), id);
            let (a, b) = arcs.arc(id);
            assert_eq!(arcs.arc(r), (b, a));
            assert_eq!(arcs.id_of(&g, a, b), Some(id));
        }
    }

    #[test]
    fn nonbacktracking_matches_definition() {
        let g = generate_regular(12, 3, 8).unwrap();
        let ops = build_line_graph_operators(&g, 2).unwrap();
        let dense = ops.nonbacktracking.to_dense();
        for r in 0..ops.arc_count() {
            let (i, j) = ops.arcs.arc(r);
            for c in 0..ops.arc_count() {
                let (i2, j2) = ops.arcs.arc(c);
                let want = if j == i2 && j2 != i { 1.0 } else { 0.0 };
                assert_eq!(dense.get(r, c), want);
            }
        }
        let total: f64 = ops.nb_degree.iter().sum();
        assert_eq!(total, (12 * 3 * 2) as f64);
    }

    #[test]
    fn pm_gram_is_degree_plus_adjacency_twice() {
        let g = generate_regular(10, 3, 2).unwrap();
        let ops = build_line_graph_operators(&g, 1).unwrap();
        let pm = ops.pm.to_dense();
        let gram = pm.matmul_t(&pm);
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 2.0 * g.degree(i) as f64 } else if g.has_edge(i, j) { 2.0 } else { 0.0 };
                assert_eq!(gram.get(i, j), want);
            }
        }
        let pd = ops.pd.to_dense();
        for c in 0..pd.cols {
            let col: alloc::vec::Vec<f64> = (0..pd.rows).map(|r| pd.get(r, c)).filter(|&v| v != 0.0).collect();
            assert_eq!(col.len(), 2);
            assert_eq!(col.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn power_adjacency_is_boolean_power() {
        let g = generate_regular(16, 3, 21).unwrap();
        let ops = build_line_graph_operators(&g, 3).unwrap();
        let a = g.adjacency().to_dense();
        let mut power = a.clone();
        for (j, pj) in ops.power_adjacency.iter().enumerate() {
            if j > 0 {
                power = power.matmul(&power);
            }
            let pj = pj.to_dense();
            for (got, raw) in pj.data.iter().zip(&power.data) {
                assert_eq!(*got, if *raw > 0.0 { 1.0 } else { 0.0 });
            }
        }
        let sq: Matrix = ops.power_nonbacktracking[1].to_dense();
        let b = ops.nonbacktracking.to_dense();
        let b2 = b.matmul(&b);
        for (got, raw) in sq.data.iter().zip(&b2.data) {
            assert_eq!(*got, if *raw > 0.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn zero_hops_rejected() {
        assert!(build_line_graph_operators(&small::single_edge(), 0).is_err());
    }
}
