use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dist_to_hull, dist_to_hull_abs, PointMatrix, VPolytope};
use crate::linalg::dist_sq;

/// Largest pairwise Euclidean distance, exact over all pairs.
pub fn diameter(w: &PointMatrix) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::Empty("point set for diameter"));
    }
    let n = w.count();
    let row_max = |i: usize| -> f64 {
        let a = w.col(i);
        ((i + 1)..n).map(|j| dist_sq(a, w.col(j))).fold(0.0, f64::max)
    };
    let best = if n >= 512 {
        (0..n).into_par_iter().map(row_max).reduce(|| 0.0, f64::max)
    } else {
        (0..n).map(row_max).fold(0.0, f64::max)
    };
    Ok(best.sqrt())
}

/// Hausdorff distance between `CH(p)` and `CH(q)` within
/// `tol · max(diam p, diam q)`.
///
/// The farthest point of one hull from the other (convex) hull is attained at
/// a vertex, so it suffices to take the larger of the two vertex-wise maxima.
pub fn hausdorff(p: &PointMatrix, q: &PointMatrix, tol: f64) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::Empty("hausdorff operand"));
    }
    p.check_dim(q.dim())?;
    if !(tol > 0.0) {
        return Err(Error::param("hausdorff tolerance must be positive"));
    }
    let abs_tol = tol * diameter(p)?.max(diameter(q)?);
    let one_sided = |from: &PointMatrix, to: &PointMatrix| -> Result<f64> {
        from.columns()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|x| dist_to_hull_abs(x, to, abs_tol).map(|r| r.distance))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    };
    Ok(one_sided(p, q)?.max(one_sided(q, p)?))
}

/// `min_v dist(v, CH(V ∖ {v})) / Δ(K)`; `K` is δ-well-separated iff the
/// result is at least δ. A degenerate polytope (Δ = 0) yields 0.
pub fn well_separation(k: &VPolytope, tol: f64) -> Result<f64> {
    let m = k.vertices();
    if m.count() < 2 {
        return Err(Error::param(
            "well-separation needs at least two vertices",
        ));
    }
    let delta = diameter(m)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let mut worst = f64::INFINITY;
    for l in 0..m.count() {
        let others = m.without(l);
        let r = dist_to_hull(m.col(l), &others, tol)?;
        worst = worst.min(r.distance);
    }
    Ok(worst / delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(dim: usize, cols: &[&[f64]]) -> PointMatrix {
        PointMatrix::from_columns(dim, cols).unwrap()
    }

    #[test]
    fn diameter_basics() {
        assert_eq!(diameter(&pm(2, &[&[1.0, 2.0]])).unwrap(), 0.0);
        assert_eq!(diameter(&pm(2, &[&[0.0, 0.0], &[3.0, 4.0]])).unwrap(), 5.0);
        assert!(diameter(&PointMatrix::empty(3)).is_err());
    }

    #[test]
    fn hausdorff_basics() {
        let seg = pm(2, &[&[0.0, 0.0], &[1.0, 0.0]]);
        let origin = pm(2, &[&[0.0, 0.0]]);
        assert_eq!(hausdorff(&seg, &seg, 1e-9).unwrap(), 0.0);
        assert!((hausdorff(&seg, &origin, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!(hausdorff(&seg, &PointMatrix::empty(2), 1e-9).is_err());
        assert!(hausdorff(&seg, &pm(3, &[&[0.0, 0.0, 0.0]]), 1e-9).is_err());
    }

    #[test]
    fn well_separation_examples() {
        let simplex = VPolytope::new(pm(
            3,
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
        ))
        .unwrap();
        let s = well_separation(&simplex, 1e-9).unwrap();
        assert!((s - (1.5f64).sqrt() / 2f64.sqrt()).abs() < 1e-4);

        let seg = VPolytope::new(pm(2, &[&[0.0, 0.0], &[1.0, 0.0]])).unwrap();
        assert!((well_separation(&seg, 1e-9).unwrap() - 1.0).abs() < 1e-12);

        let with_centroid = VPolytope::new(pm(
            2,
            &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[0.5, 0.5]],
        ))
        .unwrap();
        assert!(well_separation(&with_centroid, 1e-9).unwrap() < 1e-8);

        let single = VPolytope::new(pm(2, &[&[0.0, 0.0]])).unwrap();
        assert!(well_separation(&single, 1e-9).is_err());
        let degenerate = VPolytope::new(pm(2, &[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(well_separation(&degenerate, 1e-9).unwrap(), 0.0);
    }
}
