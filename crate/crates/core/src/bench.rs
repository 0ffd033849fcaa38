//! Synthetic spatial benchmark: random vertex locations in the unit square,
//! exact exponential-variogram covariances, learned-graph metrics, and the
//! multi-trial experiment table.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::CovarianceMatrix;
use crate::learn::{learn, LearnConfig, LearnResult, Point, WeightInit};
use crate::scalar::Scalar;
use crate::solver::Mode;
use crate::verify::{baseline_edge_bound, variogram_edge_bound};

/// Weights above this count as edges in the sparsity metric.
pub const EDGE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSample {
    pub points: Vec<Point>,
    pub seed: u64,
}

impl SpatialSample {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.points[i], self.points[j])
    }
}

/// `n` points drawn uniformly from `[0, 1]^2`.
pub fn sample_locations(n: usize, seed: u64) -> SpatialSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    SpatialSample { points, seed }
}

/// Isotropic exponential variogram without nugget,
/// `2 gamma(d) = 2 sill (1 - exp(-d / range))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariogramSpec {
    pub sill: f64,
    pub range: f64,
}

impl VariogramSpec {
    pub fn new(sill: f64, range: f64) -> Result<Self> {
        if !(sill > 0.0) || !(range > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "variogram needs positive sill and range, got sill={sill}, range={range}"
            )));
        }
        Ok(Self { sill, range })
    }

    /// Covariance at lag `d`: `sill * exp(-d / range)`.
    pub fn covariance_at(&self, d: f64) -> f64 {
        self.sill * (-d / self.range).exp()
    }
}

impl Default for VariogramSpec {
    fn default() -> Self {
        Self { sill: 10.0, range: 0.1 }
    }
}

/// Exact covariance of the variogram process at the sample locations.
pub fn variogram_covariance<T: Scalar>(sample: &SpatialSample, spec: &VariogramSpec) -> Result<CovarianceMatrix<T>> {
    let n = sample.n();
    let mut s = Array2::<T>::zeros((n, n));
    for i in 0..n {
        s[[i, i]] = T::lit(spec.sill);
        for j in (i + 1)..n {
            let c = T::lit(spec.covariance_at(sample.distance(i, j)));
            s[[i, j]] = c;
            s[[j, i]] = c;
        }
    }
    CovarianceMatrix::new(s)
}

/// Gaussian-kernel initial weights over all pairs (upper-triangle order),
/// `exp(-d^2 / (2 sigma^2))` with `sigma` a third of the mean distance.
pub fn kernel_initial_graph(sample: &SpatialSample) -> Vec<f64> {
    gaussian_kernel_weights(&sample.points)
}

pub(crate) fn gaussian_kernel_weights(points: &[Point]) -> Vec<f64> {
    let n = points.len();
    let dists: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| distance(points[i], points[j]))
        .collect();
    let sigma = mean(&dists).unwrap_or(0.0) / 3.0;
    if sigma == 0.0 {
        return vec![1.0; dists.len()];
    }
    let two_var = 2.0 * sigma * sigma;
    dists.iter().map(|d| (-d * d / two_var).exp()).collect()
}

/// Mean Euclidean distance over all pairs.
pub fn mean_pairwise_distance(sample: &SpatialSample) -> f64 {
    let n = sample.n();
    let d: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| sample.distance(i, j))
        .collect();
    mean(&d).unwrap_or(0.0)
}

/// Summary of one learned graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: Mode,
    pub range: f64,
    /// Fraction of vertices whose importance equals `q_min`.
    pub u_q: Option<f64>,
    /// Mean importance over vertices strictly above `q_min`.
    pub q_bar: Option<f64>,
    /// Fraction of vertex pairs without an edge.
    pub epsilon_w: f64,
    pub wall_time_seconds: f64,
}

pub fn compute_metrics<T: Scalar>(result: &LearnResult<T>, range: f64) -> MetricsRow {
    let g = &result.graph;
    let n = g.n();
    let pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
    let present = g.edges().iter().filter(|e| e.w.as_f64() > EDGE_THRESHOLD).count() as f64;
    let (u_q, q_bar) = match g.q() {
        Some(q) => {
            let q_min = g.q_min();
            let at_floor = q.iter().filter(|&&v| v == q_min).count();
            let above: Vec<f64> = q.iter().filter(|&&v| v > q_min).map(|v| v.as_f64()).collect();
            (Some(at_floor as f64 / n.max(1) as f64), mean(&above))
        }
        None => (None, None),
    };
    MetricsRow {
        method: result.method,
        range,
        u_q,
        q_bar,
        epsilon_w: 1.0 - present / pairs,
        wall_time_seconds: result.wall_time_seconds,
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub ranges: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub methods: Vec<Mode>,
    pub sill: f64,
    /// Template for each learn; its `init` and `method` are overridden per trial.
    pub learn: LearnConfig<f64>,
    /// Maximum concurrently running trials; 1 runs sequentially.
    pub parallel: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ranges: vec![0.01, 0.02, 0.1, 0.2, 1.0],
            n: 50,
            trials: 50,
            base_seed: 0,
            methods: vec![Mode::Baseline, Mode::Joint],
            sill: 10.0,
            learn: LearnConfig::default(),
            parallel: 1,
        }
    }
}

/// One (method, range, trial) run.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub metrics: MetricsRow,
    pub epochs: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct TrialFailure {
    pub method: Mode,
    pub range: f64,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentTable {
    /// Per-(method, range) averages, methods in configured order, ranges
    /// in configured order.
    pub rows: Vec<MetricsRow>,
    pub trials: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

impl ExperimentTable {
    pub fn row(&self, method: Mode, range: f64) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.method == method && r.range == range)
    }
}

/// Runs every (method, range) over `trials` random location sets. Trial `t`
/// uses seed `base_seed + t`, the same locations for all methods and
/// ranges, and Gaussian-kernel initial weights.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    if config.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if config.n < 2 {
        return Err(Error::InvalidConfig("n must be at least 2".into()));
    }
    let mut jobs = Vec::new();
    for &method in &config.methods {
        for &range in &config.ranges {
            for trial in 0..config.trials {
                jobs.push((method, range, trial));
            }
        }
    }
    let run_one = |&(method, range, trial): &(Mode, f64, usize)| {
        let seed = config.base_seed.wrapping_add(trial as u64);
        let outcome = run_trial(config, method, range, seed).map(|res| TrialRecord {
            trial,
            seed,
            metrics: compute_metrics(&res, range),
            epochs: res.epochs_run,
            converged: res.converged,
        });
        (method, range, trial, outcome)
    };
    let outcomes: Vec<_> = if config.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallel)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_one).collect())
    } else {
        jobs.iter().map(run_one).collect()
    };

    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for (method, range, trial, outcome) in outcomes {
        match outcome {
            Ok(rec) => trials.push(rec),
            Err(e) => {
                log::warn!("trial {trial} ({}, r={range}) failed: {e}", method.name());
                failures.push(TrialFailure {
                    method,
                    range,
                    trial,
                    message: e.to_string(),
                });
            }
        }
    }

    let mut rows = Vec::new();
    for &method in &config.methods {
        for &range in &config.ranges {
            let group: Vec<&MetricsRow> = trials
                .iter()
                .filter(|t| t.metrics.method == method && t.metrics.range == range)
                .map(|t| &t.metrics)
                .collect();
            if group.is_empty() {
                continue;
            }
            let opt_mean = |f: fn(&MetricsRow) -> Option<f64>| {
                let v: Vec<f64> = group.iter().filter_map(|r| f(r)).collect();
                mean(&v)
            };
            rows.push(MetricsRow {
                method,
                range,
                u_q: opt_mean(|r| r.u_q),
                q_bar: opt_mean(|r| r.q_bar),
                epsilon_w: mean(&group.iter().map(|r| r.epsilon_w).collect::<Vec<_>>()).unwrap_or(0.0),
                wall_time_seconds: mean(&group.iter().map(|r| r.wall_time_seconds).collect::<Vec<_>>())
                    .unwrap_or(0.0),
            });
        }
    }
    Ok(ExperimentTable { rows, trials, failures })
}

fn run_trial(config: &ExperimentConfig, method: Mode, range: f64, seed: u64) -> Result<LearnResult<f64>> {
    let sample = sample_locations(config.n, seed);
    let spec = VariogramSpec::new(config.sill, range)?;
    let s = variogram_covariance::<f64>(&sample, &spec)?;
    let cfg = LearnConfig {
        method,
        init: WeightInit::GaussianKernel(sample.points.clone()),
        ..config.learn.clone()
    };
    // wall time covers the learning loop only, not covariance generation
    learn(&s, &cfg)
}

/// Upper-bound curves on a uniform distance grid over `[0, d_max]`.
#[derive(Debug, Clone)]
pub struct BoundCurves {
    pub ranges: Vec<f64>,
    pub d: Vec<f64>,
    /// `proposed[k][m]`: joint bound at `d[m]` for `ranges[k]`.
    pub proposed: Vec<Vec<f64>>,
    pub baseline: Vec<Vec<f64>>,
}

pub fn bound_curves(sill: f64, ranges: &[f64], d_max: f64, samples: usize) -> BoundCurves {
    let samples = samples.max(2);
    let d: Vec<f64> = (0..samples)
        .map(|m| d_max * m as f64 / (samples - 1) as f64)
        .collect();
    let eval = |f: fn(f64, f64, f64) -> crate::verify::WeightBound, r: f64| -> Vec<f64> {
        d.iter().map(|&x| f(sill, r, x).value().unwrap_or(f64::INFINITY)).collect()
    };
    BoundCurves {
        ranges: ranges.to_vec(),
        proposed: ranges.iter().map(|&r| eval(variogram_edge_bound, r)).collect(),
        baseline: ranges.iter().map(|&r| eval(baseline_edge_bound, r)).collect(),
        d,
    }
}

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}
