//! Coordinate-minimization state shared by the joint and baseline learners.
//!
//! The state keeps `phi`, the inverse of the current model matrix, and
//! updates it by Sherman-Morrison after each single-coordinate step:
//!
//! * joint mode: `phi = (Q + L)^{-1}`, coordinates are edge weights and
//!   vertex importances;
//! * baseline mode: `phi = (L + J/N)^{-1}`, coordinates are edge weights.
//!
//! An edge step adds `delta * b b^T` to the model matrix, a vertex step
//! adds `delta * e_i e_i^T`, so both are rank one.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{CovarianceMatrix, Edge, Graph};
use crate::linalg::{identity_residual, max_abs_diff, spd_inverse, spd_logdet, trace_of_product};
use crate::scalar::Scalar;

/// Smallest admissible `1 + delta * r` for a baseline edge step.
pub const SINGULARITY_GUARD: f64 = 1e-10;

/// Absolute slack used when deciding whether an importance sits at its floor.
pub const FLOOR_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Laplacian plus diagonal importances, model matrix `Q + L`.
    Joint,
    /// Combinatorial Laplacian only, model matrix `L + J/N`.
    Baseline,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Joint => "joint",
            Mode::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" | "proposed" => Ok(Mode::Joint),
            "baseline" | "cgl" => Ok(Mode::Baseline),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Edge { i: usize, j: usize },
    Vertex(usize),
}

/// Record of one applied coordinate step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateUpdate<T> {
    pub target: Target,
    /// Change actually applied to the coordinate.
    pub delta: T,
    /// `h_e` for edges, `p_i = S_ii` for vertices.
    pub cost: T,
    /// `r_e` for edges, `u_i = phi_ii` for vertices, before the step.
    pub response: T,
    /// Closed-form objective change, `-ln(1 + delta r) + delta h`.
    pub objective_change: T,
    /// Set when the baseline singularity guard shortened the step.
    pub guarded: bool,
}

/// Mutable coordinate-descent state. Single owner; distinct states are
/// independent.
#[derive(Debug, Clone)]
pub struct SolverState<T> {
    mode: Mode,
    s: CovarianceMatrix<T>,
    pairs: Vec<(usize, usize)>,
    costs: Vec<T>,
    w: Vec<T>,
    q: Vec<T>,
    q_min: T,
    phi: Array2<T>,
    objective: T,
    epochs: usize,
    updates_since_refresh: usize,
    guard_events: usize,
    scratch: Vec<T>,
}

impl<T: Scalar> SolverState<T> {
    /// Joint-mode state over the candidate `pairs`, with initial weights
    /// `w0` (aligned with `pairs`) and importances `q0 >= q_min`.
    pub fn joint(
        s: CovarianceMatrix<T>,
        pairs: Vec<(usize, usize)>,
        w0: Vec<T>,
        q0: Vec<T>,
        q_min: T,
    ) -> Result<Self> {
        if !(q_min > T::zero()) {
            return Err(Error::NonPositiveFloor(q_min.as_f64()));
        }
        if q0.len() != s.n() {
            return Err(Error::ImportanceLength {
                expected: s.n(),
                got: q0.len(),
            });
        }
        if let Some((index, &q)) = q0.iter().enumerate().find(|(_, &q)| !(q >= q_min)) {
            return Err(Error::ImportanceBelowFloor {
                index,
                q: q.as_f64(),
                q_min: q_min.as_f64(),
            });
        }
        Self::build(Mode::Joint, s, pairs, w0, q0, q_min)
    }

    /// Baseline-mode state. Fails when `L(w0) + J/N` is singular, which is
    /// the case for any disconnected initial graph.
    pub fn baseline(s: CovarianceMatrix<T>, pairs: Vec<(usize, usize)>, w0: Vec<T>) -> Result<Self> {
        Self::build(Mode::Baseline, s, pairs, w0, Vec::new(), T::one())
    }

    fn build(
        mode: Mode,
        s: CovarianceMatrix<T>,
        pairs: Vec<(usize, usize)>,
        w0: Vec<T>,
        q: Vec<T>,
        q_min: T,
    ) -> Result<Self> {
        let n = s.n();
        if w0.len() != pairs.len() {
            return Err(Error::DimensionMismatch {
                expected: pairs.len(),
                got: w0.len(),
            });
        }
        let mut costs = Vec::with_capacity(pairs.len());
        for (&(i, j), &w) in pairs.iter().zip(&w0) {
            if i >= n || j >= n {
                return Err(Error::VertexOutOfRange { index: i.max(j), n });
            }
            if i >= j {
                return Err(Error::InvalidConfig(format!(
                    "candidate pair ({i}, {j}) must satisfy i < j"
                )));
            }
            if !(w >= T::zero()) {
                return Err(Error::NegativeWeight { i, j, w: w.as_f64() });
            }
            costs.push(s.edge_cost(i, j)?);
        }
        let mut state = Self {
            mode,
            s,
            pairs,
            costs,
            w: w0,
            q,
            q_min,
            phi: Array2::zeros((n, n)),
            objective: T::zero(),
            epochs: 0,
            updates_since_refresh: 0,
            guard_events: 0,
            scratch: vec![T::zero(); n],
        };
        state.phi = spd_inverse(state.model_matrix().view())?;
        state.objective = state.evaluate_objective()?;
        Ok(state)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn covariance(&self) -> &CovarianceMatrix<T> {
        &self.s
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn weights(&self) -> &[T] {
        &self.w
    }

    /// Importances; empty in baseline mode.
    pub fn importances(&self) -> &[T] {
        &self.q
    }

    pub fn q_min(&self) -> T {
        self.q_min
    }

    pub fn phi(&self) -> ArrayView2<'_, T> {
        self.phi.view()
    }

    /// Objective tracked through closed-form step changes since the last
    /// direct evaluation.
    pub fn objective(&self) -> T {
        self.objective
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn updates_since_refresh(&self) -> usize {
        self.updates_since_refresh
    }

    pub fn guard_events(&self) -> usize {
        self.guard_events
    }

    /// Edge cost `h_e` of candidate `k`.
    pub fn cost(&self, k: usize) -> T {
        self.costs[k]
    }

    /// Effective resistance `b_e^T phi b_e` of candidate `k`.
    pub fn resistance(&self, k: usize) -> T {
        let (i, j) = self.pairs[k];
        self.phi[[i, i]] + self.phi[[j, j]] - T::lit(2.0) * self.phi[[i, j]]
    }

    /// `L(w)`, plus `diag(q)` in joint mode or `J/N` in baseline mode.
    pub fn model_matrix(&self) -> Array2<T> {
        let n = self.n();
        let mut m = self.laplacian();
        match self.mode {
            Mode::Joint => {
                for k in 0..n {
                    m[[k, k]] += self.q[k];
                }
            }
            Mode::Baseline => {
                let c = T::one() / T::from_usize_lossy(n);
                m.mapv_inplace(|x| x + c);
            }
        }
        m
    }

    pub fn laplacian(&self) -> Array2<T> {
        let n = self.n();
        let mut l = Array2::<T>::zeros((n, n));
        for (&(i, j), &w) in self.pairs.iter().zip(&self.w) {
            l[[i, j]] -= w;
            l[[j, i]] -= w;
            l[[i, i]] += w;
            l[[j, j]] += w;
        }
        l
    }

    /// Objective evaluated from scratch:
    /// joint `-logdet(Q + L) + tr((Q + L) S)`, baseline
    /// `-logdet(L + J/N) + tr(L S)`.
    pub fn evaluate_objective(&self) -> Result<T> {
        let m = self.model_matrix();
        let logdet = spd_logdet(m.view())?;
        let trace = match self.mode {
            Mode::Joint => trace_of_product(m.view(), self.s.view()),
            Mode::Baseline => trace_of_product(self.laplacian().view(), self.s.view()),
        };
        Ok(trace - logdet)
    }

    /// Optimal update of edge candidate `k` with all other coordinates fixed,
    /// projected onto `w >= 0`.
    pub fn edge_update(&mut self, k: usize) -> CoordinateUpdate<T> {
        let (i, j) = self.pairs[k];
        let h = self.costs[k];
        let r = self.resistance(k);
        let old = self.w[k];
        let step = h.recip() - r.recip();

        let mut guarded = false;
        let new = if step <= -old {
            T::zero()
        } else {
            let mut delta = step;
            if self.mode == Mode::Baseline {
                let floor = T::lit(SINGULARITY_GUARD);
                if T::one() + delta * r < floor {
                    delta = (floor - T::one()) / r;
                    guarded = true;
                }
            }
            (old + delta).max(T::zero())
        };
        if new == old {
            return self.stationary(Target::Edge { i, j }, h, r, guarded);
        }
        if guarded {
            self.guard_events += 1;
        }
        let delta = new - old;
        self.w[k] = new;

        for (a, v) in self.scratch.iter_mut().enumerate() {
            *v = self.phi[[a, i]] - self.phi[[a, j]];
        }
        let denom = T::one() + delta * r;
        self.rank_one_downdate(delta / denom);
        self.finish(Target::Edge { i, j }, delta, h, r, guarded)
    }

    /// Optimal update of importance `q_i`, projected onto `q_i >= q_min`.
    pub fn vertex_update(&mut self, i: usize) -> Result<CoordinateUpdate<T>> {
        if self.mode != Mode::Joint {
            return Err(Error::RequiresJointMode);
        }
        let p = self.s.get(i, i);
        let u = self.phi[[i, i]];
        let old = self.q[i];
        let step = p.recip() - u.recip();
        let new = if step <= self.q_min - old {
            self.q_min
        } else {
            (old + step).max(self.q_min)
        };
        if new == old {
            return Ok(self.stationary(Target::Vertex(i), p, u, false));
        }
        let delta = new - old;
        self.q[i] = new;

        for (a, v) in self.scratch.iter_mut().enumerate() {
            *v = self.phi[[a, i]];
        }
        let denom = T::one() + delta * u;
        self.rank_one_downdate(delta / denom);
        Ok(self.finish(Target::Vertex(i), delta, p, u, false))
    }

    /// One sweep: every candidate edge in sorted order, then (joint mode)
    /// every vertex in index order. Returns the summed objective change.
    pub fn epoch(&mut self) -> T {
        self.epoch_with(|_| {})
    }

    /// [`SolverState::epoch`], reporting each step to `observe`.
    pub fn epoch_with<F: FnMut(&CoordinateUpdate<T>)>(&mut self, mut observe: F) -> T {
        let mut total = T::zero();
        for k in 0..self.pairs.len() {
            let up = self.edge_update(k);
            total += up.objective_change;
            observe(&up);
        }
        if self.mode == Mode::Joint {
            for i in 0..self.n() {
                let up = self.vertex_update(i).expect("joint mode");
                total += up.objective_change;
                observe(&up);
            }
        }
        self.epochs += 1;
        total
    }

    /// Recomputes `phi` by direct inversion and re-evaluates the objective.
    /// Returns the largest entrywise change of `phi`.
    pub fn refresh_phi(&mut self) -> Result<T> {
        let fresh = spd_inverse(self.model_matrix().view())?;
        let drift = max_abs_diff(self.phi.view(), fresh.view());
        self.phi = fresh;
        self.objective = self.evaluate_objective()?;
        self.updates_since_refresh = 0;
        Ok(drift)
    }

    /// `max |phi * M - I|` for the current model matrix `M`.
    pub fn inverse_residual(&self) -> T {
        identity_residual(self.phi.view(), self.model_matrix().view())
    }

    /// `max |phi - M^{-1}|` against a fresh direct inverse.
    pub fn direct_inverse_error(&self) -> Result<T> {
        let fresh = spd_inverse(self.model_matrix().view())?;
        Ok(max_abs_diff(self.phi.view(), fresh.view()))
    }

    /// Largest first-order optimality residuals of the current point, in the
    /// form of the coordinate update rules: for edges `1/h - 1/r` (absolute
    /// when `w > 0`, positive part when `w = 0`), likewise `1/p - 1/u` for
    /// importances interior to / at the floor.
    pub fn stationarity(&self) -> Stationarity<T> {
        let mut edge = T::zero();
        for k in 0..self.pairs.len() {
            let g = self.costs[k].recip() - self.resistance(k).recip();
            let res = if self.w[k] > T::zero() { g.abs() } else { g.max(T::zero()) };
            edge = edge.max(res);
        }
        let mut vertex = T::zero();
        if self.mode == Mode::Joint {
            let slack = T::lit(FLOOR_SLACK);
            for i in 0..self.n() {
                let g = self.s.get(i, i).recip() - self.phi[[i, i]].recip();
                let res = if self.q[i] > self.q_min + slack { g.abs() } else { g.max(T::zero()) };
                vertex = vertex.max(res);
            }
        }
        Stationarity { edge, vertex }
    }

    /// The current model as a [`Graph`]; zero weights are dropped.
    pub fn to_graph(&self) -> Graph<T> {
        let edges = self
            .pairs
            .iter()
            .zip(&self.w)
            .filter(|(_, &w)| w > T::zero())
            .map(|(&(i, j), &w)| Edge::new(i, j, w))
            .collect();
        let (q, q_min) = match self.mode {
            Mode::Joint => (Some(self.q.clone()), self.q_min),
            Mode::Baseline => (None, self.q_min),
        };
        Graph::new(self.n(), edges, q, q_min).expect("solver invariants imply a valid graph")
    }

    /// `phi -= coef * v v^T` with `v` held in `scratch`.
    fn rank_one_downdate(&mut self, coef: T) {
        let n = self.n();
        let v = &self.scratch;
        let phi = self.phi.as_slice_mut().expect("standard layout");
        for a in 0..n {
            let ca = coef * v[a];
            if ca == T::zero() {
                continue;
            }
            let row = &mut phi[a * n..(a + 1) * n];
            for (x, &vb) in row.iter_mut().zip(v.iter()) {
                *x -= ca * vb;
            }
        }
        self.updates_since_refresh += 1;
    }

    fn finish(&mut self, target: Target, delta: T, cost: T, response: T, guarded: bool) -> CoordinateUpdate<T> {
        let change = delta * cost - (delta * response).ln_1p();
        self.objective += change;
        CoordinateUpdate {
            target,
            delta,
            cost,
            response,
            objective_change: change,
            guarded,
        }
    }

    fn stationary(&self, target: Target, cost: T, response: T, guarded: bool) -> CoordinateUpdate<T> {
        CoordinateUpdate {
            target,
            delta: T::zero(),
            cost,
            response,
            objective_change: T::zero(),
            guarded,
        }
    }

    #[cfg(test)]
    pub(crate) fn inject_phi(&mut self, phi: Array2<T>) {
        self.phi = phi;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationarity<T> {
    pub edge: T,
    pub vertex: T,
}

impl<T: Scalar> Stationarity<T> {
    pub fn max(&self) -> T {
        self.edge.max(self.vertex)
    }
}

/// Edge cost `h_e = S_ii + S_jj - 2 S_ij`.
pub fn edge_cost<T: Scalar>(s: &CovarianceMatrix<T>, i: usize, j: usize) -> Result<T> {
    s.edge_cost(i, j)
}

/// Objective of a graph evaluated from scratch: joint form when it carries
/// importances, baseline form otherwise.
pub fn objective_of<T: Scalar>(graph: &Graph<T>, s: &CovarianceMatrix<T>) -> Result<T> {
    let n = graph.n();
    if s.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.n() });
    }
    let l = graph.laplacian();
    match graph.q() {
        Some(_) => {
            let theta = graph.precision();
            Ok(trace_of_product(theta.view(), s.view()) - spd_logdet(theta.view())?)
        }
        None => {
            let c = T::one() / T::from_usize_lossy(n);
            let m = l.mapv(|x| x + c);
            Ok(trace_of_product(l.view(), s.view()) - spd_logdet(m.view())?)
        }
    }
}
