//! Irregularity-aware graph Fourier transform for a Laplacian variation
//! and diagonal inner product `Q`, plus graph-stationary signal models.
//!
//! The Fourier modes solve `L u = lambda Q u` and are `Q`-orthonormal,
//! `U^T Q U = I`. The forward transform is `U^T Q x`, the inverse `U xhat`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, square_dim, symmetric_eigen};
use crate::scalar::Scalar;

/// Eigenpairs of the `(L, Q)` generalized problem.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    /// Ascending graph frequencies.
    pub lambdas: Array1<T>,
    /// Fourier modes stored as columns.
    pub modes: Array2<T>,
    pub q: Array1<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// `x_hat = U^T Q x`.
    pub fn forward(&self, x: ArrayView1<'_, T>) -> Result<Array1<T>> {
        self.check_len(x.len())?;
        let qx = &x * &self.q;
        Ok(self.modes.t().dot(&qx))
    }

    /// `x = U x_hat`.
    pub fn inverse(&self, xhat: ArrayView1<'_, T>) -> Result<Array1<T>> {
        self.check_len(xhat.len())?;
        Ok(self.modes.dot(&xhat))
    }

    /// `U diag(gamma(lambda)) U^T`, the covariance of a graph-stationary
    /// signal with the given power spectrum.
    pub fn stationary_covariance(&self, psd: &PsdModel<T>) -> Array2<T> {
        let gamma = psd.evaluate_all(self.lambdas.view());
        let scaled = &self.modes * &gamma.view().insert_axis(Axis(0));
        scaled.dot(&self.modes.t())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got,
            });
        }
        Ok(())
    }
}

/// Graph power spectral density `gamma(lambda)`.
#[derive(Debug, Clone, Copy)]
pub enum PsdModel<T> {
    /// `gamma(lambda) = 1 / (1 + lambda)`; pairs with covariance `(Q + L)^{-1}`.
    Proposed,
    /// `gamma(0) = 0` and `gamma(lambda) = 1 / lambda` otherwise; pairs with `L^+`.
    Combinatorial,
    Custom(fn(T) -> T),
}

impl<T: Scalar> PsdModel<T> {
    pub fn evaluate_all(&self, lambdas: ArrayView1<'_, T>) -> Array1<T> {
        let top = lambdas.iter().fold(T::one(), |a, &l| a.max(l));
        let zero_tol = T::epsilon().sqrt() * top;
        lambdas.mapv(|l| match self {
            PsdModel::Proposed => T::one() / (T::one() + l),
            PsdModel::Combinatorial => {
                if l <= zero_tol {
                    T::zero()
                } else {
                    T::one() / l
                }
            }
            PsdModel::Custom(f) => f(l),
        })
    }
}

/// Solves `L u = lambda Q u` through the symmetric reduction
/// `Q^{-1/2} L Q^{-1/2}`.
///
/// Each mode is signed so that its first entry of non-negligible magnitude
/// is positive.
pub fn compute_gft<T: Scalar>(l: ArrayView2<'_, T>, q: ArrayView1<'_, T>) -> Result<Spectrum<T>> {
    let n = square_dim(l)?;
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.len(),
        });
    }
    check_symmetric(l)?;
    check_positive(q)?;

    let inv_sqrt = q.mapv(|v| T::one() / v.sqrt());
    let mut reduced = l.to_owned();
    for i in 0..n {
        for j in 0..n {
            reduced[[i, j]] = reduced[[i, j]] * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let (lambdas, v) = symmetric_eigen(reduced.view())?;
    let mut modes = v;
    for i in 0..n {
        let s = inv_sqrt[i];
        modes.row_mut(i).mapv_inplace(|x| x * s);
    }
    for mut col in modes.columns_mut() {
        let peak = col.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
        let cut = T::lit(1e3) * T::epsilon() * peak;
        if let Some(&first) = col.iter().find(|x| x.abs() > cut) {
            if first < T::zero() {
                col.mapv_inplace(|x| -x);
            }
        }
    }
    Ok(Spectrum {
        lambdas,
        modes,
        q: q.to_owned(),
    })
}

/// Covariance `(Q + L)^{-1}` of the proposed stationary model.
pub fn model_covariance<T: Scalar>(l: ArrayView2<'_, T>, q: ArrayView1<'_, T>) -> Result<Array2<T>> {
    let n = square_dim(l)?;
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.len(),
        });
    }
    check_positive(q)?;
    let mut theta = l.to_owned();
    for k in 0..n {
        theta[[k, k]] += q[k];
    }
    spd_inverse(theta.view())
}

/// Draws `count` signals `U Gamma^{1/2} z` with `z` standard normal.
/// Output rows are signals. Deterministic for a given seed.
pub fn sample_gwss<T: Scalar>(
    spectrum: &Spectrum<T>,
    psd: &PsdModel<T>,
    count: usize,
    seed: u64,
) -> Array2<T> {
    let n = spectrum.n();
    let amp = psd
        .evaluate_all(spectrum.lambdas.view())
        .mapv(|g| g.max(T::zero()).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = Array2::<T>::zeros((count, n));
    for v in z.iter_mut() {
        let draw: f64 = StandardNormal.sample(&mut rng);
        *v = T::lit(draw);
    }
    // rows: x^T = (Gamma^{1/2} z)^T U^T
    let scaled = &z * &amp.view().insert_axis(Axis(0));
    scaled.dot(&spectrum.modes.t())
}

/// Zero-mean sample covariance `(1/K) sum_k x_k x_k^T` of row signals.
pub fn empirical_covariance<T: Scalar>(signals: ArrayView2<'_, T>) -> Array2<T> {
    let k = T::from_usize_lossy(signals.nrows().max(1));
    let mut s = signals.t().dot(&signals) / k;
    let n = s.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (s[[i, j]] + s[[j, i]]) * T::lit(0.5);
            s[[i, j]] = avg;
            s[[j, i]] = avg;
        }
    }
    s
}

fn check_symmetric<T: Scalar>(m: ArrayView2<'_, T>) -> Result<()> {
    let n = m.nrows();
    let scale = m.iter().fold(T::one(), |a, &x| a.max(x.abs()));
    let tol = T::lit(64.0) * T::epsilon() * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[[i, j]] - m[[j, i]]).abs() > tol {
                return Err(Error::NotSymmetric(i, j));
            }
        }
    }
    Ok(())
}

fn check_positive<T: Scalar>(q: ArrayView1<'_, T>) -> Result<()> {
    match q.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        Some((index, &v)) => Err(Error::NonPositiveImportance {
            index,
            value: v.as_f64(),
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity_residual, max_abs_diff};
    use ndarray::array;

    fn path2() -> Array2<f64> {
        array![[1.0, -1.0], [-1.0, 1.0]]
    }

    fn q_ortho_residual(s: &Spectrum<f64>) -> f64 {
        let qu = &s.modes * &s.q.view().insert_axis(Axis(1));
        identity_residual(s.modes.t(), qu.view())
    }

    #[test]
    fn two_node_path_with_dot_product() {
        let s = compute_gft(path2().view(), array![1.0, 1.0].view()).unwrap();
        assert!(s.lambdas[0].abs() < 1e-14);
        assert!((s.lambdas[1] - 2.0).abs() < 1e-14);
        let h = 1.0 / 2f64.sqrt();
        assert!((s.modes[[0, 0]] - h).abs() < 1e-14);
        assert!((s.modes[[1, 0]] - h).abs() < 1e-14);
        assert!(s.modes[[0, 1]] > 0.0);
    }

    #[test]
    fn edgeless_graph_has_zero_spectrum() {
        let q = array![0.5, 2.0, 3.0];
        let s = compute_gft(Array2::<f64>::zeros((3, 3)).view(), q.view()).unwrap();
        assert!(s.lambdas.iter().all(|l| l.abs() < 1e-15));
        assert!(q_ortho_residual(&s) < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let l = array![[1.0, -1.0], [-0.5, 1.0]];
        assert!(matches!(
            compute_gft(l.view(), array![1.0, 1.0].view()),
            Err(Error::NotSymmetric(0, 1))
        ));
        assert!(matches!(
            compute_gft(path2().view(), array![1.0, 0.0].view()),
            Err(Error::NonPositiveImportance { index: 1, .. })
        ));
        let s = compute_gft(path2().view(), array![1.0, 1.0].view()).unwrap();
        assert!(s.forward(array![1.0, 2.0, 3.0].view()).is_err());
        assert!(model_covariance(path2().view(), array![1.0, -1.0].view()).is_err());
    }

    #[test]
    fn canonical_vectors_map_to_modes() {
        let s = compute_gft(path2().view(), array![1.0, 3.0].view()).unwrap();
        let u0 = s.modes.column(0).to_owned();
        let c = s.forward(u0.view()).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14 && c[1].abs() < 1e-14);
        let e1 = array![0.0, 1.0];
        let x = s.inverse(e1.view()).unwrap();
        assert!(max_abs_diff(
            x.view().insert_axis(Axis(0)),
            s.modes.column(1).insert_axis(Axis(0))
        ) < 1e-15);
        assert!(s.forward(Array1::zeros(2).view()).unwrap().iter().all(|&v| v == 0.0));
        assert!(s.inverse(Array1::zeros(2).view()).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn model_covariance_small_cases() {
        let id = model_covariance(Array2::<f64>::zeros((3, 3)).view(), Array1::ones(3).view()).unwrap();
        assert!(max_abs_diff(id.view(), Array2::eye(3).view()) < 1e-15);
        let sigma = model_covariance(path2().view(), array![1.0, 1.0].view()).unwrap();
        let want = array![[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        assert!(max_abs_diff(sigma.view(), want.view()) < 1e-15);
    }

    #[test]
    fn zero_psd_gives_zero_signals() {
        let s = compute_gft(path2().view(), array![1.0, 2.0].view()).unwrap();
        let x = sample_gwss(&s, &PsdModel::Custom(|_| 0.0), 10, 3);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = compute_gft(path2().view(), array![1.0, 2.0].view()).unwrap();
        let a = sample_gwss(&s, &PsdModel::Proposed, 20, 11);
        let b = sample_gwss(&s, &PsdModel::Proposed, 20, 11);
        assert_eq!(a, b);
        let c = sample_gwss(&s, &PsdModel::Proposed, 20, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn combinatorial_psd_zeroes_dc() {
        let gamma = PsdModel::<f64>::Combinatorial.evaluate_all(array![0.0, 1e-18, 2.0].view());
        assert_eq!(gamma, array![0.0, 0.0, 0.5]);
    }
}
