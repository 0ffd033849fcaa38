//! Independent reference computations for the integration suites. Nothing
//! here calls into the learner or the crate's linear algebra: matrices go
//! through nalgebra.

#![allow(dead_code)]

use iagl::CovarianceMatrix64;
use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            v.push((i, j));
        }
    }
    v
}

/// Random SPD covariance with strictly positive off-diagonal entries:
/// `B B^T / k + diag(c)` with `B` entries in (0, 1).
pub fn random_positive_cov(n: usize, seed: u64) -> CovarianceMatrix64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n + 3;
    let b = Array2::from_shape_fn((n, k), |_| rng.random_range(0.05..1.0));
    let mut s = b.dot(&b.t()) / k as f64;
    for i in 0..n {
        s[[i, i]] += rng.random_range(0.05..0.6);
    }
    symmetrize(&mut s);
    CovarianceMatrix64::new(s).unwrap()
}

/// Random SPD covariance with mixed-sign off-diagonals.
pub fn random_mixed_cov(n: usize, seed: u64) -> CovarianceMatrix64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n + 3;
    let b = Array2::from_shape_fn((n, k), |_| rng.random_range(-1.0..1.0));
    let mut s = b.dot(&b.t()) / k as f64;
    for i in 0..n {
        s[[i, i]] += rng.random_range(0.05..0.6);
    }
    symmetrize(&mut s);
    CovarianceMatrix64::new(s).unwrap()
}

fn symmetrize(s: &mut Array2<f64>) {
    let n = s.nrows();
    for i in 0..n {
        for j in 0..i {
            s[[i, j]] = s[[j, i]];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// `-logdet(Q + L) + tr((Q + L) S)` over `w >= 0`, `q >= q_min`.
    Joint { q_min: f64 },
    /// `-logdet(L + J/N) + tr(L S)` over `w >= 0`.
    Baseline,
}

struct Problem<'a> {
    s: &'a DMatrix<f64>,
    pairs: Vec<(usize, usize)>,
    kind: Objective,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.s.nrows()
    }

    fn model(&self, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n();
        let mut l = DMatrix::zeros(n, n);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let w = x[k];
            l[(i, j)] -= w;
            l[(j, i)] -= w;
            l[(i, i)] += w;
            l[(j, j)] += w;
        }
        let mut theta = l.clone();
        match self.kind {
            Objective::Joint { .. } => {
                for i in 0..n {
                    theta[(i, i)] += x[self.pairs.len() + i];
                }
            }
            Objective::Baseline => theta.add_scalar_mut(1.0 / n as f64),
        }
        (l, theta)
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (l, theta) = self.model(x);
        let chol = match theta.clone().cholesky() {
            Some(c) => c,
            None => return f64::INFINITY,
        };
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let fit = match self.kind {
            Objective::Joint { .. } => (&theta * self.s).trace(),
            Objective::Baseline => (&l * self.s).trace(),
        };
        fit - logdet
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (_, theta) = self.model(x);
        let sigma = theta.try_inverse().expect("feasible iterate");
        let mut g = Vec::with_capacity(x.len());
        for &(i, j) in &self.pairs {
            let h = self.s[(i, i)] + self.s[(j, j)] - 2.0 * self.s[(i, j)];
            let r = sigma[(i, i)] + sigma[(j, j)] - 2.0 * sigma[(i, j)];
            g.push(h - r);
        }
        if let Objective::Joint { .. } = self.kind {
            for i in 0..self.n() {
                g.push(self.s[(i, i)] - sigma[(i, i)]);
            }
        }
        g
    }

    fn project(&self, x: &mut [f64]) {
        let m = self.pairs.len();
        for v in x[..m].iter_mut() {
            *v = v.max(0.0);
        }
        if let Objective::Joint { q_min } = self.kind {
            for v in x[m..].iter_mut() {
                *v = v.max(q_min);
            }
        }
    }
}

/// Projected gradient descent with Armijo backtracking, stopped when the
/// projected-gradient step `|x - P(x - g)|_inf` drops below `tol`.
/// Also stops once the objective has not moved beyond rounding for a
/// while. Returns the final objective value and iterate.
pub fn projected_gradient(s: &CovarianceMatrix64, kind: Objective, tol: f64) -> (f64, Vec<f64>) {
    let sm = to_na(&s.view().to_owned());
    let n = sm.nrows();
    let prob = Problem {
        s: &sm,
        pairs: pairs(n),
        kind,
    };
    let m = prob.pairs.len();
    let mut x = vec![1.0 / n as f64; m];
    if let Objective::Joint { .. } = kind {
        x.extend(std::iter::repeat(1.0).take(n));
    }
    let mut f = prob.value(&x);
    let mut step: f64 = 1.0;
    let mut stalled = 0;
    for _ in 0..2_000_000 {
        let g = prob.gradient(&x);
        let mut probe: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
        prob.project(&mut probe);
        let pg = x.iter().zip(&probe).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        if pg < tol || stalled > 200 {
            break;
        }
        step = (step * 2.0).min(1e6);
        loop {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            prob.project(&mut trial);
            let ft = prob.value(&trial);
            let decrease: f64 = x.iter().zip(&trial).zip(&g).map(|((a, t), gi)| gi * (a - t)).sum();
            if ft.is_finite() && ft <= f - 1e-4 * decrease {
                stalled = if f - ft <= 1e-15 * f.abs() { stalled + 1 } else { 0 };
                x = trial;
                f = ft;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                return (f, x);
            }
        }
    }
    (f, x)
}

/// Eigenvalues of `Q^{-1} L` through nalgebra's real Schur form, sorted.
pub fn generalized_eigenvalues(l: &Array2<f64>, q: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| l[[i, j]] / q[i]);
    let mut ev: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .map(|c| {
            assert!(c.im.abs() < 1e-9, "complex eigenvalue {c}");
            c.re
        })
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Direct dense inverse through nalgebra's LU.
pub fn dense_inverse(a: &Array2<f64>) -> Array2<f64> {
    let inv = to_na(a).lu().try_inverse().expect("invertible");
    Array2::from_shape_fn(a.dim(), |(i, j)| inv[(i, j)])
}

pub fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
