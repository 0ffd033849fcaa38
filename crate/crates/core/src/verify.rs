//! Post-hoc analysis of learned graphs: closed-form edge-weight upper
//! bounds, positive-covariance edge screening, KKT verification, and
//! optional trimming of bound violations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{all_pairs, CovarianceMatrix, Edge, Graph, IncidenceVector};
use crate::learn::LearnResult;
use crate::linalg::spd_inverse;
use crate::scalar::Scalar;
use crate::solver::{objective_of, FLOOR_SLACK};

/// Default tolerance for declaring an edge above its bound.
pub const BOUND_TOL: f64 = 1e-8;

/// Upper bound on an optimal edge weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightBound {
    Finite(f64),
    /// No finite bound exists (for instance at zero distance).
    Unbounded,
    /// The bound's hypotheses fail (perfectly correlated vertices).
    Inapplicable,
}

impl WeightBound {
    pub fn value(self) -> Option<f64> {
        match self {
            WeightBound::Finite(b) => Some(b),
            _ => None,
        }
    }
}

/// Bound on `w_ij` for the joint model when both importances are above
/// the floor: `rho^2 / ((1 - rho^2) |S_ij|)` with `rho` the correlation.
/// Zero when `S_ij = 0`.
pub fn edge_weight_bound<T: Scalar>(s: &CovarianceMatrix<T>, i: usize, j: usize) -> WeightBound {
    let sij = s.get(i, j).as_f64();
    let rho = s.correlation(i, j).as_f64();
    if rho.abs() >= 1.0 || !rho.is_finite() {
        return WeightBound::Inapplicable;
    }
    if sij == 0.0 {
        return WeightBound::Finite(0.0);
    }
    let r2 = rho * rho;
    WeightBound::Finite(r2 / ((1.0 - r2) * sij.abs()))
}

/// Baseline bound `w_e <= 1 / h_e`.
pub fn cgl_edge_bound<T: Scalar>(s: &CovarianceMatrix<T>, i: usize, j: usize) -> WeightBound {
    match s.edge_cost(i, j) {
        Ok(h) => WeightBound::Finite(1.0 / h.as_f64()),
        Err(_) => WeightBound::Unbounded,
    }
}

/// Joint-model bound for an exponential variogram covariance with sill
/// `c` and range `r`: `(1/c) / (e^{d/r} - e^{-d/r})`.
pub fn variogram_edge_bound(sill: f64, range: f64, d: f64) -> WeightBound {
    if !(d > 0.0) {
        return WeightBound::Unbounded;
    }
    let x = d / range;
    WeightBound::Finite(1.0 / (sill * (x.exp() - (-x).exp())))
}

/// Baseline bound for the same covariance: `1 / (2c (1 - e^{-d/r}))`,
/// that is `0.05 / (1 - e^{-d/r})` at sill 10.
pub fn baseline_edge_bound(sill: f64, range: f64, d: f64) -> WeightBound {
    if !(d > 0.0) {
        return WeightBound::Unbounded;
    }
    WeightBound::Finite(1.0 / (2.0 * sill * (-(-d / range).exp_m1())))
}

/// Candidate pairs that an optimal joint graph may use: `S_ij > 0`.
pub fn screen_edges<T: Scalar>(s: &CovarianceMatrix<T>) -> Vec<(usize, usize)> {
    all_pairs(s.n())
        .into_iter()
        .filter(|&(i, j)| s.get(i, j) > T::zero())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeBoundRecord {
    pub i: usize,
    pub j: usize,
    pub w: f64,
    pub rho: f64,
    /// `None` when the bound is unbounded or inapplicable.
    pub bound: Option<f64>,
    pub applicable: bool,
    pub violated: bool,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub edges: Vec<EdgeBoundRecord>,
    pub applicable: usize,
    pub violated: usize,
    pub max_excess: f64,
    pub tol: f64,
}

/// Checks every stored edge against its upper bound: the joint bound for
/// graphs with importances (only when both endpoints are above the floor),
/// `1/h_e` otherwise.
pub fn bound_report<T: Scalar>(graph: &Graph<T>, s: &CovarianceMatrix<T>, tol: f64) -> Result<BoundReport> {
    check_dims(graph, s)?;
    let floor = graph.q_min().as_f64() + FLOOR_SLACK;
    let mut edges = Vec::with_capacity(graph.edges().len());
    for e in graph.edges() {
        let w = e.w.as_f64();
        let (bound, endpoints_ok) = match graph.q() {
            Some(q) => (
                edge_weight_bound(s, e.i, e.j),
                q[e.i].as_f64() > floor && q[e.j].as_f64() > floor,
            ),
            None => (cgl_edge_bound(s, e.i, e.j), true),
        };
        let value = bound.value();
        let applicable = endpoints_ok && value.is_some();
        let excess = match value {
            Some(b) if applicable => (w - b).max(0.0),
            _ => 0.0,
        };
        edges.push(EdgeBoundRecord {
            i: e.i,
            j: e.j,
            w,
            rho: s.correlation(e.i, e.j).as_f64(),
            bound: value,
            applicable,
            violated: applicable && excess > tol,
            excess,
        });
    }
    Ok(BoundReport {
        applicable: edges.iter().filter(|r| r.applicable).count(),
        violated: edges.iter().filter(|r| r.violated).count(),
        max_excess: edges.iter().fold(0.0, |a, r| a.max(r.excess)),
        edges,
        tol,
    })
}

/// First-order optimality of a learned graph, with the inverse of the
/// model matrix recomputed directly from the graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub mode: String,
    /// Max over pairs of `|1/h - 1/r|` where `w > 0` and of the positive part
    /// of `1/h - 1/r` where `w = 0`.
    pub max_edge_residual: f64,
    /// Same for importances, `1/p - 1/u`, interior versus at the floor.
    pub max_vertex_residual: f64,
    pub complementary_slackness_violations: usize,
    /// All off-diagonal entries of the model matrix are nonpositive.
    pub m_matrix: bool,
    /// `w >= 0` and `q >= q_min`.
    pub primal_feasible: bool,
    pub tol: f64,
    pub pass: bool,
}

/// KKT check over every vertex pair (not only stored edges), so a pruned
/// pair whose gradient still points inward is caught.
pub fn kkt_report<T: Scalar>(graph: &Graph<T>, s: &CovarianceMatrix<T>, tol: f64) -> Result<KktReport> {
    check_dims(graph, s)?;
    let n = graph.n();
    let (mode, model) = match graph.q() {
        Some(_) => ("joint", graph.precision()),
        None => {
            let c = T::one() / T::from_usize_lossy(n);
            ("baseline", graph.laplacian().mapv(|x| x + c))
        }
    };
    let sigma = spd_inverse(model.view())?;

    let mut violations = 0;
    let mut max_edge = 0.0_f64;
    for (i, j) in all_pairs(n) {
        let h = s.edge_cost(i, j)?.as_f64();
        let r = IncidenceVector::new(n, i, j)?.quadratic_form(sigma.view()).as_f64();
        let g = 1.0 / h - 1.0 / r;
        let res = if graph.weight(i, j) > T::zero() { g.abs() } else { g.max(0.0) };
        if res > tol {
            violations += 1;
        }
        max_edge = max_edge.max(res);
    }

    let mut max_vertex = 0.0_f64;
    let mut primal = graph.edges().iter().all(|e| e.w >= T::zero());
    if let Some(q) = graph.q() {
        let q_min = graph.q_min().as_f64();
        for i in 0..n {
            let qi = q[i].as_f64();
            primal &= qi >= q_min;
            let g = 1.0 / s.get(i, i).as_f64() - 1.0 / sigma[[i, i]].as_f64();
            let res = if qi > q_min + FLOOR_SLACK { g.abs() } else { g.max(0.0) };
            if res > tol {
                violations += 1;
            }
            max_vertex = max_vertex.max(res);
        }
    }

    let theta = graph.laplacian();
    let m_matrix = (0..n).all(|i| (0..n).all(|j| i == j || theta[[i, j]] <= T::zero()));
    let pass = max_edge <= tol && max_vertex <= tol && m_matrix && primal;
    Ok(KktReport {
        mode: mode.to_string(),
        max_edge_residual: max_edge,
        max_vertex_residual: max_vertex,
        complementary_slackness_violations: violations,
        m_matrix,
        primal_feasible: primal,
        tol,
        pass,
    })
}

/// Zeroes every weight that exceeds its applicable bound by more than `tol`
/// and re-evaluates the objective directly. Returns the trimmed result and
/// the number of removed edges.
pub fn trim_violations<T: Scalar>(
    result: &LearnResult<T>,
    s: &CovarianceMatrix<T>,
    tol: f64,
) -> Result<(LearnResult<T>, usize)> {
    let report = bound_report(&result.graph, s, tol)?;
    if report.violated == 0 {
        return Ok((result.clone(), 0));
    }
    let graph = trim_graph(&result.graph, &report)?;
    let objective = objective_of(&graph, s)?;
    let kkt = match &result.kkt {
        Some(k) => Some(kkt_report(&graph, s, k.tol)?),
        None => None,
    };
    let trimmed = LearnResult {
        graph,
        objective,
        kkt,
        ..result.clone()
    };
    Ok((trimmed, report.violated))
}

/// Graph with all violating edges of `report` removed.
pub fn trim_graph<T: Scalar>(graph: &Graph<T>, report: &BoundReport) -> Result<Graph<T>> {
    let drop: Vec<(usize, usize)> = report
        .edges
        .iter()
        .filter(|r| r.violated)
        .map(|r| (r.i, r.j))
        .collect();
    let edges: Vec<Edge<T>> = graph
        .edges()
        .iter()
        .copied()
        .filter(|e| !drop.contains(&(e.i, e.j)))
        .collect();
    Graph::new(graph.n(), edges, graph.q().map(<[T]>::to_vec), graph.q_min())
}

fn check_dims<T: Scalar>(graph: &Graph<T>, s: &CovarianceMatrix<T>) -> Result<()> {
    if graph.n() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: s.n(),
        });
    }
    Ok(())
}
