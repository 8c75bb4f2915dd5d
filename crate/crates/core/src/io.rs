//! Text formats: whitespace-separated edge lists (`u v [w]`, weight
//! defaulting to 1), node attributes (`v kappa beta`), and CSV renderings
//! of trajectories and experiment reports. Parsing reports 1-based line
//! numbers; formatting uses the shortest round-tripping float notation, so
//! write-then-read reproduces values exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::experiment::ExperimentReport;
use crate::graph::{DedupePolicy, WeightedGraph};

fn parse_token<T: FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from {token:?}"),
    })
}

/// Parse an edge list: one `u v [w]` triple per line, `#` comments and
/// blank lines ignored, weight defaulting to 1.
pub fn parse_edge_list(text: &str, dedupe: DedupePolicy) -> Result<WeightedGraph> {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let u: usize = parse_token(parts.next(), lineno, "source vertex")?;
        let v: usize = parse_token(parts.next(), lineno, "target vertex")?;
        let w: f64 = match parts.next() {
            Some(tok) => parse_token(Some(tok), lineno, "edge weight")?,
            None => 1.0,
        };
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "expected `u v [w]` and nothing else".to_string(),
            });
        }
        if u == v {
            return Err(Error::Parse {
                line: lineno,
                message: format!("self-loop at vertex {u} is not allowed"),
            });
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("edge weight must be positive and finite, got {w}"),
            });
        }
        edges.push((u, v, w));
    }
    WeightedGraph::from_edges(&edges, dedupe)
}

/// Render a graph in the edge-list format (sorted edges, one per line).
pub fn format_edge_list(g: &WeightedGraph) -> String {
    let mut out = String::from("# u v w\n");
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
    }
    out
}

/// Parse node attributes: one `v kappa beta` triple per line, `#` comments
/// ignored. Every node id from 0 to the maximum id must appear exactly
/// once. Returns `(kappa, beta)`.
pub fn parse_node_attributes(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rows: Vec<(usize, f64, f64, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let v: usize = parse_token(parts.next(), lineno, "node id")?;
        let kappa: f64 = parse_token(parts.next(), lineno, "stubbornness value")?;
        let beta: f64 = parse_token(parts.next(), lineno, "preference value")?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "expected `v kappa beta` and nothing else".to_string(),
            });
        }
        rows.push((v, kappa, beta, lineno));
    }
    if rows.is_empty() {
        return Err(Error::Domain(
            "attribute file defines no nodes".to_string(),
        ));
    }
    let n = rows.iter().map(|r| r.0).max().unwrap() + 1;
    let mut kappa = vec![f64::NAN; n];
    let mut beta = vec![f64::NAN; n];
    for (v, k, b, lineno) in rows {
        if !kappa[v].is_nan() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("duplicate attributes for node {v}"),
            });
        }
        kappa[v] = k;
        beta[v] = b;
    }
    if let Some(missing) = kappa.iter().position(|k| k.is_nan()) {
        return Err(Error::Domain(format!(
            "attribute file covers ids up to {} but node {missing} is missing",
            n - 1
        )));
    }
    Ok((kappa, beta))
}

/// Render node attributes in the `v kappa beta` format.
pub fn format_node_attributes(kappa: &[f64], beta: &[f64]) -> Result<String> {
    if kappa.len() != beta.len() {
        return Err(Error::Dimension {
            what: "preference vector",
            expected: kappa.len(),
            got: beta.len(),
        });
    }
    let mut out = String::from("# node kappa beta\n");
    for (v, (k, b)) in kappa.iter().zip(beta).enumerate() {
        let _ = writeln!(out, "{v} {k} {b}");
    }
    Ok(out)
}

/// Render a trajectory as CSV with columns `t, x_0, ..., x_{n-1}`.
pub fn format_trajectory_csv(trajectory: &Trajectory) -> String {
    let n = trajectory
        .states
        .first()
        .map(|s| s.len())
        .unwrap_or(0);
    let mut out = String::from("t");
    for i in 0..n {
        let _ = write!(out, ",x_{i}");
    }
    out.push('\n');
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let _ = write!(out, "{t}");
        for v in state.iter() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Render an experiment report as a plot-ready CSV table.
pub fn format_experiment_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "lambda,k,objective_l1,objective_topk,objective_random_mean,objective_random_std\n",
    );
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.lambda,
            row.k,
            row.objective_l1,
            row.objective_topk,
            row.objective_random_mean,
            row.objective_random_std
        );
    }
    out
}
