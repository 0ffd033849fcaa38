//! File formats: headerless numeric CSV for matrices, points and signals;
//! JSON for graphs, result metadata and reports; CSV tables for experiment
//! output. Floats are written in shortest round-trip form, so a write/read
//! cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::bench::{BoundCurves, ExperimentTable};
use crate::error::{Error, Result};
use crate::gft::Spectrum;
use crate::graph::{CovarianceMatrix, Edge, Graph};
use crate::learn::{LearnResult, Point};
use crate::verify::BoundReport;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses comma-separated rows of decimals. Blank lines are skipped; every
/// row must have the same width.
pub fn parse_matrix_csv(text: &str) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {}: '{}': {e}", lineno + 1, field.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} values, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), cols), flat).map_err(|e| Error::Parse(e.to_string()))
}

pub fn format_matrix_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Reads an `n x n` covariance CSV.
pub fn read_covariance_csv(path: &Path) -> Result<CovarianceMatrix<f64>> {
    let m = parse_matrix_csv(&read_text(path)?)?;
    CovarianceMatrix::new(m)
}

pub fn write_covariance_csv(path: &Path, s: &CovarianceMatrix<f64>) -> Result<()> {
    write_text(path, &format_matrix_csv(&s.view().to_owned()))
}

/// Two columns, `x,y`, one point per line.
pub fn read_points_csv(path: &Path) -> Result<Vec<Point>> {
    let m = parse_matrix_csv(&read_text(path)?)?;
    if m.nrows() > 0 && m.ncols() != 2 {
        return Err(Error::Parse(format!("points need 2 columns, found {}", m.ncols())));
    }
    Ok(m.rows().into_iter().map(|r| [r[0], r[1]]).collect())
}

pub fn write_points_csv(path: &Path, points: &[Point]) -> Result<()> {
    let mut out = String::new();
    for p in points {
        let _ = writeln!(out, "{},{}", p[0], p[1]);
    }
    write_text(path, &out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// On-disk graph. An empty `q` marks a graph without importances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub q_min: f64,
    pub q: Vec<f64>,
    pub edges: Vec<EdgeJson>,
}

impl From<&Graph<f64>> for GraphJson {
    fn from(g: &Graph<f64>) -> Self {
        Self {
            n: g.n(),
            q_min: g.q_min(),
            q: g.q().map(<[f64]>::to_vec).unwrap_or_default(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeJson { i: e.i, j: e.j, w: e.w })
                .collect(),
        }
    }
}

impl TryFrom<GraphJson> for Graph<f64> {
    type Error = Error;

    fn try_from(g: GraphJson) -> Result<Self> {
        let q = if g.q.is_empty() && g.n > 0 { None } else { Some(g.q) };
        let edges = g.edges.into_iter().map(|e| Edge::new(e.i, e.j, e.w)).collect();
        Graph::new(g.n, edges, q, g.q_min)
    }
}

pub fn graph_to_json(g: &Graph<f64>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GraphJson::from(g))?)
}

pub fn graph_from_json(text: &str) -> Result<Graph<f64>> {
    let raw: GraphJson = serde_json::from_str(text)?;
    Graph::try_from(raw)
}

pub fn read_graph_json(path: &Path) -> Result<Graph<f64>> {
    graph_from_json(&read_text(path)?)
}

pub fn write_graph_json(path: &Path, g: &Graph<f64>) -> Result<()> {
    write_text(path, &graph_to_json(g)?)
}

/// Sidecar written next to a learned graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMeta {
    pub objective: f64,
    pub epochs: usize,
    pub converged: bool,
    pub wall_time_s: f64,
}

impl From<&LearnResult<f64>> for ResultMeta {
    fn from(r: &LearnResult<f64>) -> Self {
        Self {
            objective: r.objective,
            epochs: r.epochs_run,
            converged: r.converged,
            wall_time_s: r.wall_time_seconds,
        }
    }
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(value)?)
}

/// Eigenvalues, one per line.
pub fn format_lambdas_csv(spectrum: &Spectrum<f64>) -> String {
    spectrum.lambdas.iter().map(|l| format!("{l}\n")).collect()
}

pub fn format_table_csv(table: &ExperimentTable) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("method,r,u_q,q_bar,epsilon_w,time_s\n");
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.method.name(),
            row.range,
            opt(row.u_q),
            opt(row.q_bar),
            row.epsilon_w,
            row.wall_time_seconds
        );
    }
    out
}

/// `d,bound_proposed_r<r>...,bound_baseline_r<r>...`; unbounded cells are `inf`.
pub fn format_bound_curves_csv(c: &BoundCurves) -> String {
    let mut out = String::from("d");
    for r in &c.ranges {
        let _ = write!(out, ",bound_proposed_r{r}");
    }
    for r in &c.ranges {
        let _ = write!(out, ",bound_baseline_r{r}");
    }
    out.push('\n');
    for (m, d) in c.d.iter().enumerate() {
        out.push_str(&d.to_string());
        for col in c.proposed.iter().chain(&c.baseline) {
            let _ = write!(out, ",{}", col[m]);
        }
        out.push('\n');
    }
    out
}

/// Parsed bound-curve CSV: header names and numeric rows.
pub fn parse_bound_curves_csv(text: &str) -> Result<(Vec<String>, Array2<f64>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty bound-curve file".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rest: String = lines.map(|l| format!("{l}\n")).collect();
    Ok((header, parse_matrix_csv(&rest)?))
}

/// `i,j,d,w,bound,violated`; `d` is left empty without vertex locations.
pub fn format_bound_table_csv(report: &BoundReport, points: Option<&[Point]>) -> String {
    let mut out = String::from("i,j,d,w,bound,violated\n");
    for r in &report.edges {
        let d = points
            .map(|p| (p[r.i][0] - p[r.j][0]).hypot(p[r.i][1] - p[r.j][1]).to_string())
            .unwrap_or_default();
        let b = r.bound.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{}", r.i, r.j, d, r.w, b, r.violated);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(parse_matrix_csv("1,2\n3\n").is_err());
        assert!(parse_matrix_csv("1,x\n").is_err());
    }

    #[test]
    fn graph_without_importances_uses_empty_q() {
        let g = Graph::new(3, vec![Edge::new(0, 2, 0.5)], None, 1e-4).unwrap();
        let text = graph_to_json(&g).unwrap();
        assert!(text.contains("\"q\": []"));
        assert_eq!(graph_from_json(&text).unwrap(), g);
    }

    #[test]
    fn graph_json_validates() {
        let bad = r#"{"n":2,"q_min":0.01,"q":[1,1],"edges":[{"i":0,"j":0,"w":1}]}"#;
        assert!(matches!(graph_from_json(bad), Err(Error::SelfLoop(0))));
    }

    proptest! {
        #[test]
        fn graph_json_round_trip_is_bit_exact(
            ws in proptest::collection::vec(1e-12..1e3f64, 6),
            qs in proptest::collection::vec(1e-4..1e2f64, 4),
        ) {
            let pairs = crate::graph::all_pairs(4);
            let edges = pairs.iter().zip(&ws).map(|(&(i, j), &w)| Edge::new(i, j, w)).collect();
            let g = Graph::new(4, edges, Some(qs), 1e-4).unwrap();
            let back = graph_from_json(&graph_to_json(&g).unwrap()).unwrap();
            prop_assert_eq!(back.laplacian(), g.laplacian());
            prop_assert_eq!(back, g);
        }

        #[test]
        fn matrix_csv_round_trip_is_bit_exact(v in proptest::collection::vec(-1e6..1e6f64, 9)) {
            let m = Array2::from_shape_vec((3, 3), v).unwrap();
            prop_assert_eq!(parse_matrix_csv(&format_matrix_csv(&m)).unwrap(), m);
        }
    }
}
