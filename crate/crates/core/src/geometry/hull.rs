//! Distance from a point to the convex hull of a finite set.
//!
//! Solves `min_λ |Σ λᵢ sᵢ − x|²` over the probability simplex with a
//! fully corrective Frank-Wolfe method (Wolfe's minimum-norm-point
//! algorithm). Vertex selection needs only the inner products `sᵢ·r` with
//! the current residual `r`, and the Frank-Wolfe duality gap gives a
//! certificate: `f(λ) − f* ≤ gap`, hence `|Sλ − x| − dist ≤ sqrt(gap)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{PointMatrix, SimplexCoeffs};

use crate::linalg::{dist, dist_sq, dot};

#[derive(Clone, Debug)]
pub struct HullDistance {
    /// `|Σ λᵢ sᵢ − x|` for the returned witness; an upper bound on the true
    /// distance, tight within the requested tolerance when `converged`.
    pub distance: f64,
    pub witness: SimplexCoeffs,
    /// Final Frank-Wolfe duality gap on the squared objective.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `dist(x, CH(S))` within additive `tol · max_i |sᵢ − x|`, which is at most
/// `tol · diam(S ∪ {x})`.
pub fn dist_to_hull(x: &[f64], s: &PointMatrix, tol: f64) -> Result<HullDistance> {
    validate(x, s, tol)?;
    let scale = s
        .columns()
        .map(|c| dist_sq(c, x))
        .fold(0.0f64, f64::max)
        .sqrt();
    let mut solver = Solver::new(x, s, tol);
    Ok(solver.run(tol * scale, Stop::Converge))
}

/// Same as [`dist_to_hull`] with an absolute accuracy target.
pub fn dist_to_hull_abs(x: &[f64], s: &PointMatrix, abs_tol: f64) -> Result<HullDistance> {
    validate(x, s, 1.0)?;
    if !(abs_tol >= 0.0) {
        return Err(Error::param("hull tolerance must be nonnegative"));
    }
    let scale = s
        .columns()
        .map(|c| dist_sq(c, x))
        .fold(0.0f64, f64::max)
        .sqrt();
    let rel = if scale > 0.0 { (abs_tol / scale).min(1.0) } else { 1.0 };
    let mut solver = Solver::new(x, s, rel);
    Ok(solver.run(abs_tol, Stop::Converge))
}

/// Decides whether `dist(x, CH(S)) ≤ radius`, up to an absolute slack `slack`:
/// returns `Some(witness)` once a combination within `radius + slack` is found
/// and `None` once the duality bound proves the distance exceeds it.
///
/// Stops as soon as the answer is certain, which makes it much cheaper than a
/// full solve when the point is clearly inside or clearly outside.
pub fn hull_within(
    x: &[f64],
    s: &PointMatrix,
    radius: f64,
    slack: f64,
) -> Result<(bool, HullDistance)> {
    validate(x, s, 1.0)?;
    let threshold = radius.max(0.0) + slack.max(0.0);
    let scale = s
        .columns()
        .map(|c| dist_sq(c, x))
        .fold(0.0f64, f64::max)
        .sqrt();
    let abs_tol = (slack.max(0.0)).max(1e-12 * scale);
    let rel = if scale > 0.0 { (abs_tol / scale).min(1.0) } else { 1.0 };
    let mut solver = Solver::new(x, s, rel);
    let res = solver.run(abs_tol, Stop::Decide(threshold));
    let inside = res.distance <= threshold;
    Ok((inside, res))
}

fn validate(x: &[f64], s: &PointMatrix, tol: f64) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Empty("hull point set"));
    }
    s.check_dim(x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("query point"));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::param("hull tolerance must be positive and finite"));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Stop {
    Converge,
    /// Stop once `dist ≤ threshold` or `dist > threshold` is certain.
    Decide(f64),
}

/// Wolfe's minimum-norm-point method on the shifted points `yᵢ = sᵢ − x`.
///
/// Each major step adds the Frank-Wolfe vertex (the column minimizing
/// `yᵢ·r` for the current residual `r`) to the active set; minor steps move
/// to the affine minimizer of the active set, dropping points whose weight
/// would turn negative.
struct Solver<'a> {
    x: &'a [f64],
    s: &'a PointMatrix,
    max_iter: usize,
    active: Vec<usize>,
    weights: Vec<f64>,
    r: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(x: &'a [f64], s: &'a PointMatrix, rel_tol: f64) -> Self {
        let n = s.count();
        let log_term = (1.0 / rel_tol.clamp(1e-300, 1.0)).ln().max(1.0);
        let max_iter = ((50.0 * n as f64 * log_term).ceil() as usize).max(1);
        // Warm start at the nearest point of S.
        let mut start = 0;
        let mut best = f64::INFINITY;
        for (i, c) in s.columns().enumerate() {
            let d2 = dist_sq(c, x);
            if d2 < best {
                best = d2;
                start = i;
            }
        }
        let mut solver = Self {
            x,
            s,
            max_iter,
            active: vec![start],
            weights: vec![1.0],
            r: vec![0.0; x.len()],
        };
        solver.update_residual();
        solver
    }

    fn update_residual(&mut self) {
        self.r.iter_mut().for_each(|v| *v = 0.0);
        for (&i, &w) in self.active.iter().zip(&self.weights) {
            for ((ri, si), xi) in self.r.iter_mut().zip(self.s.col(i)).zip(self.x) {
                *ri += w * (si - xi);
            }
        }
    }

    /// Weights of the point of minimum norm in the affine hull of the active
    /// shifted points.
    fn affine_minimizer(&self) -> Vec<f64> {
        let c = self.active.len();
        if c == 1 {
            return vec![1.0];
        }
        let dim = self.x.len();
        let y0 = self.s.col(self.active[0]);
        let mut d = DMatrix::zeros(dim, c - 1);
        for (col, &i) in self.active[1..].iter().enumerate() {
            for (row, (a, b)) in self.s.col(i).iter().zip(y0).enumerate() {
                d[(row, col)] = a - b;
            }
        }
        let rhs = DVector::from_iterator(dim, y0.iter().zip(self.x).map(|(a, b)| b - a));
        let svd = d.svd(true, true);
        let eps = 1e-13 * svd.singular_values.max();
        let t = match svd.solve(&rhs, eps) {
            Ok(t) => t,
            Err(_) => return self.weights.clone(),
        };
        let mut alpha = Vec::with_capacity(c);
        alpha.push(1.0 - t.sum());
        alpha.extend(t.iter().copied());
        alpha
    }

    fn run(&mut self, abs_tol: f64, stop: Stop) -> HullDistance {
        let n = self.s.count();
        let gap_target = abs_tol * abs_tol;
        let mut gap = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        let mut g = vec![0.0; n];

        while iterations < self.max_iter {
            let f = dot(&self.r, &self.r);
            if f == 0.0 {
                gap = 0.0;
                converged = true;
                break;
            }
            let xr = dot(self.x, &self.r);
            for (gi, c) in g.iter_mut().zip(self.s.columns()) {
                *gi = dot(c, &self.r) - xr;
            }
            let fw = (0..n).fold(0, |best, i| if g[i] < g[best] { i } else { best });
            gap = (2.0 * (f - g[fw])).max(0.0);
            if gap <= gap_target {
                converged = true;
                break;
            }
            if let Stop::Decide(threshold) = stop {
                let t2 = threshold * threshold;
                if f <= t2 || f - gap > t2 {
                    converged = true;
                    break;
                }
            }
            iterations += 1;
            if self.active.contains(&fw) {
                // The residual is orthogonal to the active face and no
                // outside vertex improves on it: optimal up to rounding.
                converged = true;
                break;
            }
            self.active.push(fw);
            self.weights.push(0.0);
            let mut stalled = false;
            loop {
                let alpha = self.affine_minimizer();
                if alpha.iter().all(|a| *a > 0.0) {
                    self.weights = alpha;
                    break;
                }
                let mut theta = 1.0f64;
                for (w, a) in self.weights.iter().zip(&alpha) {
                    if *a <= 0.0 {
                        theta = theta.min(w / (w - a));
                    }
                }
                for (w, a) in self.weights.iter_mut().zip(&alpha) {
                    *w = (1.0 - theta) * *w + theta * a;
                }
                let before = self.active.len();
                let mut keep_idx = Vec::with_capacity(before);
                let mut keep_w = Vec::with_capacity(before);
                for (&i, &w) in self.active.iter().zip(&self.weights) {
                    if w > 1e-15 {
                        keep_idx.push(i);
                        keep_w.push(w);
                    }
                }
                if keep_idx.is_empty() {
                    stalled = true;
                    break;
                }
                let sum: f64 = keep_w.iter().sum();
                keep_w.iter_mut().for_each(|w| *w /= sum);
                let dropped_new = !keep_idx.contains(&fw);
                self.active = keep_idx;
                self.weights = keep_w;
                if dropped_new && theta == 0.0 {
                    stalled = true;
                    break;
                }
                if self.active.len() == before {
                    break;
                }
            }
            self.update_residual();
            if stalled {
                break;
            }
        }

        let mut lambda = vec![0.0; n];
        for (&i, &w) in self.active.iter().zip(&self.weights) {
            lambda[i] += w;
        }
        let witness = SimplexCoeffs::from_raw_normalized(lambda);
        let point = witness.combine(self.s);
        HullDistance {
            distance: dist(&point, self.x),
            witness,
            gap,
            iterations,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(dim: usize, cols: &[&[f64]]) -> PointMatrix {
        PointMatrix::from_columns(dim, cols).unwrap()
    }

    #[test]
    fn member_point_has_zero_distance_and_indicator_witness() {
        let s = pm(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = dist_to_hull(&[1.0, 0.0], &s, 1e-9).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.witness.weights(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn perpendicular_foot_on_segment() {
        let s = pm(2, &[&[0.0, 0.0], &[1.0, 0.0]]);
        let r = dist_to_hull(&[0.5, 1.0], &s, 1e-9).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-9);
        let w = r.witness.weights();
        assert!((w[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn corner_outside_triangle() {
        let s = pm(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = dist_to_hull(&[1.0, 1.0], &s, 1e-9).unwrap();
        assert!((r.distance - 0.5f64.sqrt()).abs() < 1e-8);
        assert!(r.converged);
    }

    #[test]
    fn interior_point_converges_to_zero() {
        let s = pm(2, &[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 4.0], &[4.0, 4.0]]);
        let r = dist_to_hull(&[1.3, 2.7], &s, 1e-9).unwrap();
        assert!(r.distance < 1e-8 * 4.0 * 2f64.sqrt());
    }

    #[test]
    fn errors_on_bad_input() {
        let s = pm(2, &[&[0.0, 0.0]]);
        assert!(matches!(
            dist_to_hull(&[0.0, 0.0, 0.0], &s, 1e-6),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            dist_to_hull(&[f64::NAN, 0.0], &s, 1e-6),
            Err(Error::NonFinite(_))
        ));
        let empty = PointMatrix::empty(2);
        assert!(matches!(
            dist_to_hull(&[0.0, 0.0], &empty, 1e-6),
            Err(Error::Empty(_))
        ));
        assert!(dist_to_hull(&[0.0, 0.0], &s, 0.0).is_err());
    }

    #[test]
    fn decision_mode_agrees_with_full_solve() {
        let s = pm(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let (inside, _) = hull_within(&[1.0, 1.0], &s, 0.70, 1e-9).unwrap();
        assert!(!inside);
        let (inside, w) = hull_within(&[1.0, 1.0], &s, 0.71, 1e-9).unwrap();
        assert!(inside);
        assert!(w.distance <= 0.71 + 1e-9);
    }
}
