//! Weighted undirected graphs with vertex importances, and the dense
//! algebraic objects built from them.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An undirected edge `(i, j)` with `i < j` and weight `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub w: T,
}

impl<T> Edge<T> {
    pub fn new(i: usize, j: usize, w: T) -> Self {
        Self { i, j, w }
    }
}

/// A learned (or given) graph model: edge weights plus, for the joint
/// model, a diagonal inner product `Q = diag(q)`.
///
/// Edges are stored sorted by `(i, j)` with `i < j`; zero-weight edges are
/// never stored. `q` is `None` for combinatorial-Laplacian-only models.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    q: Option<Vec<T>>,
    q_min: T,
}

impl<T: Scalar> Graph<T> {
    /// Validates and canonicalizes a graph.
    ///
    /// Edges given as `(j, i)` with `j > i` are flipped. Zero weights are
    /// dropped after validation, so a zero-weight duplicate is still an error.
    pub fn new(n: usize, edges: Vec<Edge<T>>, q: Option<Vec<T>>, q_min: T) -> Result<Self> {
        if !(q_min > T::zero()) {
            return Err(Error::NonPositiveFloor(q_min.as_f64()));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for e in edges {
            for idx in [e.i, e.j] {
                if idx >= n {
                    return Err(Error::VertexOutOfRange { index: idx, n });
                }
            }
            if e.i == e.j {
                return Err(Error::SelfLoop(e.i));
            }
            if !(e.w >= T::zero()) {
                return Err(Error::NegativeWeight {
                    i: e.i,
                    j: e.j,
                    w: e.w.as_f64(),
                });
            }
            let (i, j) = if e.i < e.j { (e.i, e.j) } else { (e.j, e.i) };
            canon.push(Edge::new(i, j, e.w));
        }
        canon.sort_by_key(|e| (e.i, e.j));
        for pair in canon.windows(2) {
            if (pair[0].i, pair[0].j) == (pair[1].i, pair[1].j) {
                return Err(Error::DuplicateEdge(pair[0].i, pair[0].j));
            }
        }
        canon.retain(|e| e.w > T::zero());

        if let Some(q) = &q {
            if q.len() != n {
                return Err(Error::ImportanceLength {
                    expected: n,
                    got: q.len(),
                });
            }
            if let Some((index, &v)) = q.iter().enumerate().find(|(_, &v)| !(v >= q_min)) {
                return Err(Error::ImportanceBelowFloor {
                    index,
                    q: v.as_f64(),
                    q_min: q_min.as_f64(),
                });
            }
        }
        Ok(Self {
            n,
            edges: canon,
            q,
            q_min,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn q(&self) -> Option<&[T]> {
        self.q.as_deref()
    }

    pub fn q_min(&self) -> T {
        self.q_min
    }

    /// Weight of pair `(i, j)` in either orientation; zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> T {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .map(|k| self.edges[k].w)
            .unwrap_or_else(|_| T::zero())
    }

    /// Combinatorial Laplacian `L = D - A`.
    pub fn laplacian(&self) -> Array2<T> {
        laplacian(self.n, &self.edges)
    }

    /// Precision matrix of the joint model, `Q + L`. Falls back to
    /// `L` alone when there are no importances.
    pub fn precision(&self) -> Array2<T> {
        let mut theta = self.laplacian();
        if let Some(q) = &self.q {
            for (k, &qk) in q.iter().enumerate() {
                theta[[k, k]] += qk;
            }
        }
        theta
    }

    /// Weight vector over every vertex pair, in `(0,1), (0,2), ..., (n-2,n-1)`
    /// order.
    pub fn dense_weights(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n * self.n.saturating_sub(1) / 2];
        for e in &self.edges {
            out[pair_index(self.n, e.i, e.j)] = e.w;
        }
        out
    }
}

/// Dense Laplacian of an edge list on `n` vertices.
pub fn laplacian<T: Scalar>(n: usize, edges: &[Edge<T>]) -> Array2<T> {
    let mut l = Array2::<T>::zeros((n, n));
    for e in edges {
        l[[e.i, e.j]] -= e.w;
        l[[e.j, e.i]] -= e.w;
        l[[e.i, e.i]] += e.w;
        l[[e.j, e.j]] += e.w;
    }
    l
}

/// Position of pair `(i, j)`, `i < j`, in the row-major upper-triangle ordering.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All vertex pairs `(i, j)` with `i < j`, sorted.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect()
}

/// Column `e` of the unweighted incidence matrix: `+1` at `i`, `-1` at `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncidenceVector {
    pub n: usize,
    pub i: usize,
    pub j: usize,
}

impl IncidenceVector {
    pub fn new(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::VertexOutOfRange { index: i.max(j), n });
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        Ok(Self { n, i, j })
    }

    pub fn to_dense<T: Scalar>(&self) -> Array1<T> {
        let mut b = Array1::zeros(self.n);
        b[self.i] = T::one();
        b[self.j] = -T::one();
        b
    }

    /// `b^T M b = M_ii + M_jj - 2 M_ij` for symmetric `M`.
    pub fn quadratic_form<T: Scalar>(&self, m: ArrayView2<'_, T>) -> T {
        m[[self.i, self.i]] + m[[self.j, self.j]] - T::lit(2.0) * m[[self.i, self.j]]
    }
}

/// A validated empirical (or exact) covariance matrix: square, finite,
/// exactly symmetric, with a strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T> {
    entries: Array2<T>,
}

impl<T: Scalar> CovarianceMatrix<T> {
    pub fn new(entries: Array2<T>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::NotSquare(r, c));
        }
        for i in 0..r {
            for j in 0..r {
                if !entries[[i, j]].is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
                if j > i && entries[[i, j]] != entries[[j, i]] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
            if !(entries[[i, i]] > T::zero()) {
                return Err(Error::NonPositiveDiagonal {
                    index: i,
                    value: entries[[i, i]].as_f64(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[[i, j]]
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.entries.view()
    }

    pub fn into_inner(self) -> Array2<T> {
        self.entries
    }

    /// Edge cost `h_e = b_e^T S b_e`. Errors when it is not strictly positive.
    pub fn edge_cost(&self, i: usize, j: usize) -> Result<T> {
        let h = self.entries[[i, i]] + self.entries[[j, j]] - T::lit(2.0) * self.entries[[i, j]];
        if h > T::zero() {
            Ok(h)
        } else {
            Err(Error::DegenerateEdgeCost { i, j, h: h.as_f64() })
        }
    }

    /// Sample correlation `S_ij / sqrt(S_ii S_jj)`.
    pub fn correlation(&self, i: usize, j: usize) -> T {
        self.entries[[i, j]] / (self.entries[[i, i]] * self.entries[[j, j]]).sqrt()
    }
}
