//! Edge-list graph files, checkpoints and atomic writes.
//!
//! A graph file starts with `n d seed`, followed by one `i j` line per edge
//! with `0 ≤ i < j < n`. `d` is the maximum degree, which for the regular
//! graphs the generator produces is the common degree.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use regcut_core::gnn::{checkpoint, GnnModel};
use regcut_core::Graph;

use crate::error::{HarnessError, Result};

pub fn format_graph(g: &Graph) -> String {
    let mut s = String::with_capacity(16 + 12 * g.edge_count());
    let _ = writeln!(s, "{} {} {}", g.n(), g.max_degree(), g.seed());
    for &(i, j) in g.edges() {
        let _ = writeln!(s, "{i} {j}");
    }
    s
}

pub fn parse_graph(text: &str) -> std::result::Result<Graph, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or("empty graph file")?;
    let head = numbers::<3>(header).ok_or("header must be `n d seed`")?;
    let n = usize::try_from(head[0]).map_err(|_| "n out of range")?;
    let mut edges = Vec::new();
    for (no, line) in lines {
        let [i, j] = numbers::<2>(line).ok_or_else(|| format!("line {}: expected `i j`", no + 1))?;
        if i >= j || j >= n as u64 {
            return Err(format!("line {}: need i < j < n, got `{}`", no + 1, line.trim()));
        }
        edges.push((i as usize, j as usize));
    }
    let g = Graph::from_edges_seeded(n, &edges, head[2]).map_err(|e| e.to_string())?;
    if g.edge_count() != edges.len() {
        return Err("duplicate edges".into());
    }
    if g.max_degree() as u64 != head[1] {
        return Err(format!("header degree {} but maximum degree is {}", head[1], g.max_degree()));
    }
    Ok(g)
}

fn numbers<const K: usize>(line: &str) -> Option<[u64; K]> {
    let mut out = [0; K];
    let mut it = line.split_whitespace();
    for slot in &mut out {
        *slot = it.next()?.parse().ok()?;
    }
    it.next().is_none().then_some(out)
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
    parse_graph(&text).map_err(|msg| HarnessError::Format { path: path.into(), msg })
}

pub fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    write_atomic(path, format_graph(g).as_bytes())
}

pub fn read_checkpoint(path: &Path) -> Result<GnnModel> {
    let bytes = std::fs::read(path).map_err(HarnessError::io(path))?;
    checkpoint::decode(&bytes).map_err(|e| HarnessError::Format { path: path.into(), msg: e.to_string() })
}

pub fn write_checkpoint(path: &Path, model: &GnnModel) -> Result<()> {
    write_atomic(path, &checkpoint::encode(model))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(HarnessError::io(dir))?;
    tmp.write_all(bytes).and_then(|_| tmp.as_file().sync_all()).map_err(HarnessError::io(tmp.path()))?;
    tmp.persist(path).map_err(|e| HarnessError::Io { path: path.into(), source: e.error })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use regcut_core::generate_regular;
    use regcut_core::graph::small;

    #[test]
    fn graph_text_round_trips() {
        let g = generate_regular(20, 3, 77).unwrap();
        let text = format_graph(&g);
        assert!(text.starts_with("20 3 77\n") && text.ends_with('\n'));
        let back = parse_graph(&text).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!((back.n(), back.seed(), back.regular_degree()), (20, 77, Some(3)));
    }

    #[test]
    fn malformed_graphs_are_rejected() {
        for bad in ["", "3 2\n", "3 1 0\n1 0\n", "3 1 0\n0 3\n", "3 1 0\n0 1\n0 1\n", "3 2 0\n0 1\n", "3 1 0\n0 1 2\n", "3 1 0\nx y\n"] {
            assert!(parse_graph(bad).is_err(), "{bad:?}");
        }
        assert_eq!(parse_graph("3 1 0\n0 1\n").unwrap().edge_count(), 1);
        assert_eq!(format_graph(&small::cycle(5)), "5 2 0\n0 1\n0 4\n1 2\n2 3\n3 4\n");
    }
}
