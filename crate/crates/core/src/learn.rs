//! Full learning loops for the joint Laplacian-plus-importance model and the
//! combinatorial-Laplacian baseline.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{all_pairs, pair_index, CovarianceMatrix, Graph};
use crate::scalar::Scalar;
use crate::solver::{Mode, SolverState};
use crate::verify::{kkt_report, screen_edges, KktReport};

/// A point in the plane.
pub type Point = [f64; 2];

/// Initial edge weights.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightInit<T> {
    /// `exp(-d^2 / (2 sigma^2))` with `sigma` a third of the mean pairwise
    /// distance between the given vertex locations.
    GaussianKernel(Vec<Point>),
    /// The same weight on every candidate edge.
    Uniform(T),
    /// `1/N` on every candidate edge; used when no geometry is available.
    UniformOverN,
    /// Explicit weights over all pairs in upper-triangle order.
    Given(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig<T> {
    pub method: Mode,
    pub q_min: T,
    /// Stop once an epoch improves the objective by less than this.
    pub stop_tol: T,
    pub max_epochs: usize,
    pub init: WeightInit<T>,
    pub q_init: T,
    /// Direct re-inversion cadence, in epochs.
    pub refresh_every: usize,
    /// Restrict candidates to pairs with positive covariance.
    pub screen: bool,
    /// Attach a KKT report at this tolerance.
    pub kkt_tol: Option<T>,
}

impl<T: Scalar> Default for LearnConfig<T> {
    fn default() -> Self {
        Self {
            method: Mode::Joint,
            q_min: T::lit(1e-4),
            stop_tol: T::lit(1e-10),
            max_epochs: 1000,
            init: WeightInit::UniformOverN,
            q_init: T::one(),
            refresh_every: 50,
            screen: false,
            kkt_tol: None,
        }
    }
}

impl<T: Scalar> LearnConfig<T> {
    pub fn joint() -> Self {
        Self::default()
    }

    pub fn baseline() -> Self {
        Self {
            method: Mode::Baseline,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stop_tol > T::zero()) {
            return Err(Error::InvalidConfig("stop_tol must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be at least 1".into()));
        }
        if !(self.q_min > T::zero()) {
            return Err(Error::NonPositiveFloor(self.q_min.as_f64()));
        }
        if !(self.q_init >= self.q_min) {
            return Err(Error::InvalidConfig(format!(
                "q_init {} is below q_min {}",
                self.q_init, self.q_min
            )));
        }
        if self.refresh_every == 0 {
            return Err(Error::InvalidConfig("refresh_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LearnResult<T> {
    pub method: Mode,
    pub graph: Graph<T>,
    pub objective: T,
    pub epochs_run: usize,
    pub converged: bool,
    pub wall_time_seconds: f64,
    pub kkt: Option<KktReport>,
    /// Objective after each epoch.
    pub history: Vec<T>,
    /// Number of baseline steps shortened by the singularity guard.
    pub guard_events: usize,
}

/// Learns with the method named in `config`.
pub fn learn<T: Scalar>(s: &CovarianceMatrix<T>, config: &LearnConfig<T>) -> Result<LearnResult<T>> {
    let state = initial_state(s, config)?;
    Ok(run(state, s, config)?.0)
}

/// Joint Laplacian and importance learning; `config.method` is ignored.
pub fn learn_joint<T: Scalar>(s: &CovarianceMatrix<T>, config: &LearnConfig<T>) -> Result<LearnResult<T>> {
    let cfg = LearnConfig {
        method: Mode::Joint,
        ..config.clone()
    };
    learn(s, &cfg)
}

/// Combinatorial-Laplacian baseline; `config.method` is ignored.
pub fn learn_cgl_baseline<T: Scalar>(s: &CovarianceMatrix<T>, config: &LearnConfig<T>) -> Result<LearnResult<T>> {
    let cfg = LearnConfig {
        method: Mode::Baseline,
        ..config.clone()
    };
    learn(s, &cfg)
}

/// Builds the solver state the learners start from.
pub fn initial_state<T: Scalar>(s: &CovarianceMatrix<T>, config: &LearnConfig<T>) -> Result<SolverState<T>> {
    config.validate()?;
    let n = s.n();
    let pairs = if config.screen { screen_edges(s) } else { all_pairs(n) };
    let w0 = initial_weights(n, &pairs, &config.init)?;
    match config.method {
        Mode::Joint => SolverState::joint(s.clone(), pairs, w0, vec![config.q_init; n], config.q_min),
        Mode::Baseline => SolverState::baseline(s.clone(), pairs, w0),
    }
}

/// Runs epochs on `state` until the stopping rule fires, then refreshes
/// `phi` once more. Returns the result and the final state.
pub fn run<T: Scalar>(
    mut state: SolverState<T>,
    s: &CovarianceMatrix<T>,
    config: &LearnConfig<T>,
) -> Result<(LearnResult<T>, SolverState<T>)> {
    let start = Instant::now();
    let mut history = Vec::new();
    let mut converged = false;
    while state.epochs() < config.max_epochs {
        let change = state.epoch();
        if state.epochs() % config.refresh_every == 0 {
            state.refresh_phi()?;
        }
        history.push(state.objective());
        if change.abs() < config.stop_tol {
            converged = true;
            break;
        }
    }
    state.refresh_phi()?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    if !converged {
        log::warn!(
            "{} learner stopped after {} epochs without meeting stop_tol",
            state.mode().name(),
            state.epochs()
        );
    }
    let graph = state.to_graph();
    let kkt = match config.kkt_tol {
        Some(tol) => Some(kkt_report(&graph, s, tol.as_f64())?),
        None => None,
    };
    let result = LearnResult {
        method: state.mode(),
        graph,
        objective: state.objective(),
        epochs_run: state.epochs(),
        converged,
        wall_time_seconds,
        kkt,
        history,
        guard_events: state.guard_events(),
    };
    Ok((result, state))
}

fn initial_weights<T: Scalar>(n: usize, pairs: &[(usize, usize)], init: &WeightInit<T>) -> Result<Vec<T>> {
    Ok(match init {
        WeightInit::Uniform(w) => vec![*w; pairs.len()],
        WeightInit::UniformOverN => vec![T::one() / T::from_usize_lossy(n); pairs.len()],
        WeightInit::Given(all) => {
            let want = n * n.saturating_sub(1) / 2;
            if all.len() != want {
                return Err(Error::DimensionMismatch {
                    expected: want,
                    got: all.len(),
                });
            }
            pairs.iter().map(|&(i, j)| all[pair_index(n, i, j)]).collect()
        }
        WeightInit::GaussianKernel(points) => {
            if points.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: points.len(),
                });
            }
            let all = crate::bench::gaussian_kernel_weights(points);
            pairs
                .iter()
                .map(|&(i, j)| T::lit(all[pair_index(n, i, j)]))
                .collect()
        }
    })
}
