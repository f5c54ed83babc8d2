//! Small dense helpers over slices plus the SVD-related routines.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::PointMatrix;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn to_dmatrix(m: &PointMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.dim(), m.count(), m.as_slice())
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<PointMatrix> {
    PointMatrix::from_column_major(m.nrows(), m.ncols(), m.as_slice().to_vec())
}

/// Orthonormal basis (as columns) of the span of `vectors`, by modified
/// Gram-Schmidt with re-orthogonalization. Vectors whose residual falls below
/// `rel_tol` times their norm are treated as dependent.
pub fn orthonormal_basis(dim: usize, vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        debug_assert_eq!(v.len(), dim);
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                axpy(-c, b, &mut r);
            }
        }
        let rn = norm(&r);
        if rn > rel_tol * scale {
            r.iter_mut().for_each(|x| *x /= rn);
            basis.push(r);
        }
    }
    basis
}

/// Largest singular value of a `d × n` column-major matrix by power iteration
/// on its `d × d` Gram matrix. Stops once the estimate moves by less than
/// `rel_tol` (relative) between iterations.
pub fn spectral_norm_power(m: &PointMatrix, rel_tol: f64, max_iter: usize) -> f64 {
    let d = m.dim();
    let n = m.count();
    if n == 0 {
        return 0.0;
    }
    // Gram = M Mᵀ, accumulated column by column.
    let mut gram = vec![0.0; d * d];
    for j in 0..n {
        let c = m.col(j);
        for a in 0..d {
            let ca = c[a];
            if ca == 0.0 {
                continue;
            }
            let row = &mut gram[a * d..(a + 1) * d];
            for (g, cb) in row.iter_mut().zip(c) {
                *g += ca * cb;
            }
        }
    }
    if gram.iter().all(|g| *g == 0.0) {
        return 0.0;
    }
    // Deterministic, generic start vector.
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + (i as f64 + 1.0).sqrt().fract()).collect();
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);
    let mut w = vec![0.0; d];
    let mut lambda = 0.0f64;
    for _ in 0..max_iter {
        for a in 0..d {
            w[a] = dot(&gram[a * d..(a + 1) * d], &v);
        }
        let next = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        let done = (next - lambda).abs() <= rel_tol * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

/// Largest singular value via a dense SVD; the reference for
/// [`spectral_norm_power`].
pub fn spectral_norm_dense(m: &PointMatrix) -> f64 {
    if m.count() == 0 {
        return 0.0;
    }
    let dm = to_dmatrix(m);
    dm.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Thin SVD of a `d × n` matrix: `(U, singular values)` with singular values
/// sorted in decreasing order and `U` the matching left singular vectors.
pub fn left_singular(m: &PointMatrix) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let dm = to_dmatrix(m);
    let svd = dm.svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::param("SVD failed to produce left singular vectors"))?;
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let mut u_sorted = DMatrix::zeros(u.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
    }
    let sv_sorted = order.iter().map(|&i| sv[i]).collect();
    Ok((u_sorted, sv_sorted))
}

/// Spectral norm of an arbitrary dense matrix.
pub fn spectral_norm_of(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let vs = vec![
            vec![1.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        let b = orthonormal_basis(3, &vs, 1e-10);
        assert_eq!(b.len(), 2);
        assert!((dot(&b[0], &b[1])).abs() < 1e-14);
    }

    #[test]
    fn power_iteration_matches_dense_svd() {
        let mut r = rng::stream(3, 0);
        for n in [5usize, 40, 300] {
            let data: Vec<f64> = (0..7 * n).map(|_| rng::gaussian_vec(&mut r, 1)[0]).collect();
            let m = PointMatrix::from_column_major(7, n, data).unwrap();
            let p = spectral_norm_power(&m, 1e-12, 100_000);
            let s = spectral_norm_dense(&m);
            assert!((p - s).abs() <= 1e-6 * s, "{p} vs {s}");
        }
    }
}
