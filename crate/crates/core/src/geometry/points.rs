use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// A `dim × count` collection of points stored column-major; each column is a
/// point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMatrix {
    dim: usize,
    count: usize,
    data: Vec<f64>,
}

impl PointMatrix {
    pub fn from_column_major(dim: usize, count: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("point dimension must be at least 1"));
        }
        if data.len() != dim * count {
            return Err(Error::DimensionMismatch {
                expected: dim * count,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point matrix"));
        }
        Ok(Self { dim, count, data })
    }

    pub fn from_columns<C: AsRef<[f64]>>(dim: usize, columns: &[C]) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * columns.len());
        for c in columns {
            let c = c.as_ref();
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::from_column_major(dim, columns.len(), data)
    }

    /// An empty matrix of the given dimension, ready for [`push`](Self::push).
    pub fn empty(dim: usize) -> Self {
        assert!(dim >= 1, "point dimension must be at least 1");
        Self {
            dim,
            count: 0,
            data: Vec::new(),
        }
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        self.data.extend_from_slice(point);
        self.count += 1;
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim).take(self.count)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix holding the given columns, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &j in indices {
            data.extend_from_slice(self.col(j));
        }
        Self {
            dim: self.dim,
            count: indices.len(),
            data,
        }
    }

    /// All columns except `skip`.
    pub fn without(&self, skip: usize) -> Self {
        let keep: Vec<usize> = (0..self.count).filter(|&j| j != skip).collect();
        self.select(&keep)
    }

    pub fn column_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for c in self.columns() {
            linalg::axpy(1.0, c, &mut mean);
        }
        if self.count > 0 {
            mean.iter_mut().for_each(|m| *m /= self.count as f64);
        }
        mean
    }

    /// Applies `f` to every column, producing a matrix of dimension `out_dim`.
    pub fn map_columns<F>(&self, out_dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let cols: Vec<Vec<f64>> = self.columns().map(&mut f).collect();
        Self::from_columns(out_dim, &cols)
    }

    pub(crate) fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            })
        } else {
            Ok(())
        }
    }
}

/// A polytope given by its vertex matrix (`d × k`, `k ≥ 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VPolytope {
    vertices: PointMatrix,
}

impl VPolytope {
    pub fn new(vertices: PointMatrix) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Empty("polytope vertex set"));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &PointMatrix {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.dim()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.count()
    }

    pub fn vertex(&self, l: usize) -> &[f64] {
        self.vertices.col(l)
    }

    /// Exact diameter `Δ(K)` (attained between two vertices).
    pub fn diameter(&self) -> f64 {
        super::diameter(&self.vertices).unwrap_or(0.0)
    }

    /// `max_ℓ u·M_ℓ` and the lowest index attaining it.
    pub fn support(&self, u: &[f64]) -> (f64, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (l, v) in self.vertices.columns().enumerate() {
            let s = linalg::dot(u, v);
            if s > best {
                best = s;
                arg = l;
            }
        }
        (best, arg)
    }
}

/// Convex-combination weights (nonnegative, summing to one).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexCoeffs {
    weights: Vec<f64>,
}

impl SimplexCoeffs {
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("simplex weights"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("simplex weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::param(format!("simplex weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn indicator(len: usize, at: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[at] = 1.0;
        Self { weights }
    }

    pub(crate) fn from_raw_normalized(mut weights: Vec<f64>) -> Self {
        weights.iter_mut().for_each(|w| *w = w.max(0.0));
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= sum);
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ λᵢ Sᵢ`.
    pub fn combine(&self, s: &PointMatrix) -> Vec<f64> {
        let mut p = vec![0.0; s.dim()];
        for (w, c) in self.weights.iter().zip(s.columns()) {
            if *w != 0.0 {
                linalg::axpy(*w, c, &mut p);
            }
        }
        p
    }
}
