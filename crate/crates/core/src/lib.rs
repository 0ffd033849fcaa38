//! Graph learning from a covariance matrix by coordinate minimization.
//!
//! The main learner fits a combinatorial Laplacian `L` jointly with
//! diagonal vertex importances `Q = diag(q)` so that the data look
//! stationary under the `(L, Q)` graph Fourier transform with power
//! spectrum `1 / (1 + lambda)`; the implied covariance is `(Q + L)^{-1}`.
//! A combinatorial-Laplacian baseline with model matrix `L + J/N` is
//! provided for comparison.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations used by the
//! file formats and the CLI.
//!
//! ```
//! use iagl::{learn_joint, CovarianceMatrix64, LearnConfig64};
//! use ndarray::array;
//!
//! let s = CovarianceMatrix64::new(array![[1.0, 0.5], [0.5, 1.0]]).unwrap();
//! let res = learn_joint(&s, &LearnConfig64::default()).unwrap();
//! assert!((res.graph.weight(0, 1) - 2.0 / 3.0).abs() < 1e-4);
//! ```

pub mod bench;
pub mod error;
pub mod gft;
pub mod graph;
pub mod io;
pub mod learn;
pub mod linalg;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use gft::{compute_gft, model_covariance, sample_gwss, PsdModel, Spectrum};
pub use graph::{CovarianceMatrix, Edge, Graph, IncidenceVector};
pub use learn::{learn, learn_cgl_baseline, learn_joint, LearnConfig, LearnResult, WeightInit};
pub use scalar::Scalar;
pub use solver::{CoordinateUpdate, Mode, SolverState};
pub use verify::{bound_report, kkt_report, screen_edges, trim_violations, BoundReport, KktReport};

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type CovarianceMatrix64 = CovarianceMatrix<f64>;
pub type CovarianceMatrix32 = CovarianceMatrix<f32>;
pub type SolverState64 = SolverState<f64>;
pub type SolverState32 = SolverState<f32>;
pub type Spectrum64 = Spectrum<f64>;
pub type LearnConfig64 = LearnConfig<f64>;
pub type LearnConfig32 = LearnConfig<f32>;
pub type LearnResult64 = LearnResult<f64>;
