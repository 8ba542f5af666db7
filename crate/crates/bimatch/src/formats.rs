//! Text formats: edge lists, run records, ODE trajectories and summaries.
//!
//! All writers use `.` as decimal separator and `\n` line endings. Floats are
//! printed in the shortest form that parses back to the same value.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use bimatch_core::hydro::{Integration, OdeSettings};
use bimatch_core::{BipartiteMultigraph, RunRecord};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Writes `graph` as a header line `n=<n>` followed by one `i j m` line per
/// distinct edge (plus index, minus index, multiplicity).
pub fn write_edge_list<W: Write>(graph: &BipartiteMultigraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "n={}", graph.n())?;
    for (i, j, m) in graph.edges() {
        writeln!(out, "{i} {j} {m}")?;
    }
    out.flush()
}

pub fn edge_list_string(graph: &BipartiteMultigraph) -> String {
    let mut buf = Vec::new();
    write_edge_list(graph, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("edge lists are ASCII")
}

/// Parses the format written by [`write_edge_list`]. Blank lines are
/// ignored.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<BipartiteMultigraph> {
    let malformed = |line: usize, reason: String| Error::MalformedGraph { line, reason };
    let mut graph: Option<BipartiteMultigraph> = None;
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| malformed(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(g) = graph.as_mut() else {
            let n = line
                .strip_prefix("n=")
                .and_then(|v| v.trim().parse::<usize>().ok())
                .ok_or_else(|| {
                    malformed(lineno, format!("expected header n=<n>, found {line:?}"))
                })?;
            if n == 0 {
                return Err(malformed(
                    lineno,
                    "graph must have at least one node per side".into(),
                ));
            }
            graph = Some(BipartiteMultigraph::empty(n));
            continue;
        };
        let fields: Vec<u32> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| malformed(lineno, format!("{e} in {line:?}")))?;
        let [i, j, m] = fields[..] else {
            return Err(malformed(
                lineno,
                format!("expected `i j m`, found {line:?}"),
            ));
        };
        g.add_edge(i, j, m)
            .map_err(|e| malformed(lineno, e.to_string()))?;
    }
    graph.ok_or_else(|| malformed(0, "empty file".into()))
}

pub const RECORD_CSV_HEADER: &str = "replication,seed,coverage,matched_count,isolated_count";

/// One CSV row per record, numbered by position.
pub fn records_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RECORD_CSV_HEADER);
    out.push('\n');
    for (r, rec) in records.iter().enumerate() {
        let _ = writeln!(
            out,
            "{r},{},{},{},{}",
            rec.seed, rec.coverage, rec.matched_count, rec.isolated_count
        );
    }
    out
}

/// JSON array of records, including measure trajectories when present.
pub fn records_json(records: &[RunRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

/// Trajectory as CSV with columns `s, plus_0..plus_D, minus_0..minus_D`.
pub fn trajectory_csv(run: &Integration) -> String {
    let d = run.terminal.plus.len();
    let mut out = String::from("s");
    for side in ["plus", "minus"] {
        for j in 0..d {
            let _ = write!(out, ",{side}_{j}");
        }
    }
    out.push('\n');
    for st in &run.trajectory {
        let _ = write!(out, "{}", st.s);
        for x in st.plus.iter().chain(&st.minus) {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

/// Summary of one ODE integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSummary {
    pub kernel: String,
    pub initial_spec: InitialSpec,
    pub h: f64,
    pub epsilon: f64,
    /// Coverage once the plus mass is exhausted.
    pub coverage_estimate: f64,
    /// Coverage read at `s = 1 - epsilon`.
    pub cutoff_coverage: f64,
    pub mass_identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub plus: String,
    pub minus: String,
}

impl OdeSummary {
    pub fn new(
        kernel: &str,
        plus: String,
        minus: String,
        settings: &OdeSettings,
        run: &Integration,
    ) -> Self {
        Self {
            kernel: kernel.to_string(),
            initial_spec: InitialSpec { plus, minus },
            h: settings.h,
            epsilon: settings.epsilon,
            coverage_estimate: run.coverage_estimate(),
            cutoff_coverage: run.cutoff_coverage(),
            mass_identity_residual: run.mass_identity_residual(),
        }
    }
}
