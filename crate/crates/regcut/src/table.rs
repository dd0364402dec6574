//! Result tables: per-trial records, timings and per-group summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use regcut_core::eval::{aggregate, Method, TrialRecord};

use crate::error::Result;
use crate::files::write_atomic;

pub const SUMMARY_HEADER: [&str; 8] = ["method", "n", "d", "count", "mean_P", "std_P", "min_P", "max_P"];
pub const RECORD_HEADER: [&str; 9] = ["method", "n", "d", "graph_index", "graph_seed", "trial_seed", "cut_value", "P", "error"];

/// A summary rendered two ways.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub csv: String,
    /// Rows are `n` or `d` values, columns are methods, cells are mean P.
    pub text: String,
}

fn p4(p: f64) -> String {
    format!("{p:.4}")
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>, header: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn emit_table(records: &[TrialRecord]) -> Table {
    let summaries = aggregate(records);
    let csv = csv_string(
        summaries.iter().map(|s| {
            vec![
                s.method.to_string(),
                s.n.to_string(),
                s.d.to_string(),
                s.count.to_string(),
                p4(s.mean_p),
                p4(s.std_p),
                p4(s.min_p),
                p4(s.max_p),
            ]
        }),
        &SUMMARY_HEADER,
    );

    let methods: Vec<Method> = Method::ALL.into_iter().filter(|m| summaries.iter().any(|s| s.method == *m)).collect();
    let mut cells: BTreeMap<(usize, usize), BTreeMap<Method, f64>> = BTreeMap::new();
    for s in &summaries {
        cells.entry((s.n, s.d)).or_default().insert(s.method, s.mean_p);
    }
    let ns: BTreeSet<usize> = cells.keys().map(|k| k.0).collect();
    let ds: BTreeSet<usize> = cells.keys().map(|k| k.1).collect();
    let (corner, label): (&str, fn(usize, usize) -> String) = if ds.len() <= 1 {
        ("n", |n, _| n.to_string())
    } else if ns.len() == 1 {
        ("d", |_, d| d.to_string())
    } else {
        ("n,d", |n, d| format!("{n},{d}"))
    };
    let mut grid = vec![std::iter::once(corner.to_string()).chain(methods.iter().map(Method::to_string)).collect::<Vec<_>>()];
    for (&(n, d), row) in &cells {
        grid.push(
            std::iter::once(label(n, d))
                .chain(methods.iter().map(|m| row.get(m).map_or_else(|| "-".to_string(), |&p| p4(p))))
                .collect(),
        );
    }
    let widths: Vec<usize> = (0..grid[0].len()).map(|c| grid.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut text = String::new();
    if let (Some(&n), true) = (ns.first(), ns.len() == 1 && ds.len() > 1) {
        let _ = writeln!(text, "n = {n}");
    } else if let (Some(&d), true) = (ds.first(), ds.len() == 1) {
        let _ = writeln!(text, "d = {d}");
    }
    for row in &grid {
        let line: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:>w$}")).collect();
        let _ = writeln!(text, "{}", line.join("  "));
    }
    Table { csv, text }
}

/// Per-trial records without timings, so the file is reproducible.
pub fn records_csv(records: &[TrialRecord]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    csv_string(
        records.iter().map(|r| {
            vec![
                r.method.to_string(),
                r.n.to_string(),
                r.d.to_string(),
                r.graph_index.to_string(),
                r.graph_seed.to_string(),
                r.trial_seed.to_string(),
                opt(r.cut_value.map(|c| c.to_string())),
                opt(r.p.map(p4)),
                opt(r.error.clone()),
            ]
        }),
        &RECORD_HEADER,
    )
}

pub fn timing_csv(records: &[TrialRecord]) -> String {
    csv_string(
        records.iter().map(|r| {
            vec![r.method.to_string(), r.n.to_string(), r.d.to_string(), r.graph_index.to_string(), r.wall_time_ms.to_string()]
        }),
        &["method", "n", "d", "graph_index", "wall_time_ms"],
    )
}

/// `dir/stem.csv` → `dir/stem.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Writes records to `path` and the summary, text table and timings next to
/// it as `.summary.csv`, `.table.txt` and `.timing.csv`.
pub fn write_results(path: &Path, records: &[TrialRecord]) -> Result<Table> {
    let table = emit_table(records);
    write_atomic(path, records_csv(records).as_bytes())?;
    write_atomic(&sibling(path, "summary.csv"), table.csv.as_bytes())?;
    write_atomic(&sibling(path, "table.txt"), table.text.as_bytes())?;
    write_atomic(&sibling(path, "timing.csv"), timing_csv(records).as_bytes())?;
    Ok(table)
}
