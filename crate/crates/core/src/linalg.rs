//! Small dense kernels: Cholesky, SPD inverse and log-determinant, and a
//! cyclic Jacobi eigensolver for symmetric matrices.
//!
//! Everything here works on `ndarray::Array2` of any [`Scalar`]. Sizes in
//! this crate stay in the low hundreds, so plain O(n^3) loops are fine.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor `C` with `a = C C^T`.
pub fn cholesky<T: Scalar>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = square_dim(a)?;
    let mut c = Array2::<T>::zeros((n, n));
    // pivots at rounding level relative to the diagonal count as singular
    let scale = (0..n).fold(T::zero(), |m, k| m.max(a[[k, k]].abs()));
    let floor = T::epsilon() * T::from_usize_lossy(n.max(1)) * scale;
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= c[[j, k]] * c[[j, k]];
        }
        if !(d > floor) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                step: j,
                pivot: d.as_f64(),
            });
        }
        let djj = d.sqrt();
        c[[j, j]] = djj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= c[[i, k]] * c[[j, k]];
            }
            c[[i, j]] = s / djj;
        }
    }
    Ok(c)
}

/// `log det(a)` for symmetric positive definite `a`.
pub fn spd_logdet<T: Scalar>(a: ArrayView2<'_, T>) -> Result<T> {
    let c = cholesky(a)?;
    Ok(c.diag().iter().map(|&d| d.ln()).sum::<T>() * T::lit(2.0))
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
/// The result is exactly symmetric.
pub fn spd_inverse<T: Scalar>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let c = cholesky(a)?;
    let n = c.nrows();
    // Invert the lower factor in place: solve C X = I column by column.
    let mut cinv = Array2::<T>::zeros((n, n));
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { T::one() } else { T::zero() };
            for k in col..i {
                s -= c[[i, k]] * cinv[[k, col]];
            }
            cinv[[i, col]] = s / c[[i, i]];
        }
    }
    // a^{-1} = C^{-T} C^{-1}
    let mut inv = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = T::zero();
            for k in i..n {
                s += cinv[[k, i]] * cinv[[k, j]];
            }
            inv[[i, j]] = s;
            inv[[j, i]] = s;
        }
    }
    Ok(inv)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn symmetric_eigen<T: Scalar>(a: ArrayView2<'_, T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = square_dim(a)?;
    let mut m = a.to_owned();
    let mut v = Array2::<T>::eye(n);
    let eps = T::epsilon();
    let scale = m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));

    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum();
        if off.sqrt() <= eps * scale || scale == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        m[[x, x]]
            .partial_cmp(&m[[y, y]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = Array1::from_iter(order.iter().map(|&k| m[[k, k]]));
    let mut vectors = Array2::<T>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((values, vectors))
}

/// `trace(a b)` without forming the product.
pub fn trace_of_product<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> T {
    let n = a.nrows();
    let mut s = T::zero();
    for i in 0..n {
        for k in 0..a.ncols() {
            s += a[[i, k]] * b[[k, i]];
        }
    }
    s
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

/// `max |(a b - I)_ij|`.
pub fn identity_residual<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> T {
    let prod = a.dot(&b);
    let n = prod.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((prod[[i, j]] - target).abs());
        }
    }
    worst
}

pub(crate) fn square_dim<T>(a: ArrayView2<'_, T>) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::NotSquare(r, c));
    }
    Ok(r)
}
