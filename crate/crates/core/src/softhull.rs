//! Soft convex hulls and `(ε, δ)`-envelopes.
//!
//! The ε-soft hull of `S ⊆ W` is `CH(S) + ε·diam(W)·B`. A subset `T ⊆ W` is
//! an ε-envelope of `W` when its soft hull covers `W`, and an
//! `(ε, δ)`-envelope when in addition every `t ∈ T` is more than
//! `δ·diam(W)` away from `CH(T ∖ {t})`. [`find_soft_envelope`] prunes a point
//! cloud down to such an envelope: points that are soft-covered by the points
//! far from them are discarded, and a greedy well-spread subset of the rest
//! is checked.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::HypothesisCheck;
use crate::error::{Error, Result};
use crate::geometry::{diameter, hull_within, PointMatrix, SimplexCoeffs};
use crate::linalg::dist;

/// Default absolute tolerance, relative to `diam(W)`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub epsilon: f64,
    pub delta: f64,
    pub epsilon3: f64,
}

impl EnvelopeParams {
    /// Requires `0 ≤ ε < ε₃` and `δ ∈ (0, 1]`. The stricter conditions under
    /// which pruning is guaranteed to succeed are reported by [`Self::checks`].
    pub fn new(epsilon: f64, delta: f64, epsilon3: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::param(format!("epsilon {epsilon} must be nonnegative")));
        }
        if !(epsilon3 > epsilon && epsilon3.is_finite()) {
            return Err(Error::param(format!(
                "epsilon3 {epsilon3} must exceed epsilon {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::param(format!("delta {delta} not in (0, 1]")));
        }
        Ok(Self { epsilon, delta, epsilon3 })
    }

    /// The sufficient conditions `ε, δ, ε₃ < 1/8` and
    /// `δ > max(2ε/(ε₃−ε), 4ε₃)`.
    pub fn checks(&self) -> Vec<HypothesisCheck> {
        let (e, d, e3) = (self.epsilon, self.delta, self.epsilon3);
        vec![
            HypothesisCheck::greater("epsilon-range", "ε < 1/8", 0.125, e),
            HypothesisCheck::greater("delta-range", "δ < 1/8", 0.125, d),
            HypothesisCheck::greater("epsilon3-range", "ε₃ < 1/8", 0.125, e3),
            HypothesisCheck::greater(
                "envelope-condition",
                "δ > max(2ε/(ε₃−ε), 4ε₃)",
                d,
                (2.0 * e / (e3 - e)).max(4.0 * e3),
            ),
        ]
    }
}

/// Whether `dist(w, CH(S)) ≤ ε·diam_w + tol`, with a witness when it is.
pub fn in_soft_hull(
    w: &[f64],
    s: &PointMatrix,
    epsilon: f64,
    diam_w: f64,
    tol: f64,
) -> Result<(bool, Option<SimplexCoeffs>)> {
    if !(diam_w >= 0.0) {
        return Err(Error::param("diam(W) must be nonnegative"));
    }
    let (inside, res) = hull_within(w, s, epsilon * diam_w, tol)?;
    Ok((inside, inside.then_some(res.witness)))
}

fn check_pair(t: &PointMatrix, w: &PointMatrix) -> Result<()> {
    if t.is_empty() {
        return Err(Error::Empty("envelope candidate T"));
    }
    if w.is_empty() {
        return Err(Error::Empty("point set W"));
    }
    t.check_dim(w.dim())
}

fn covered_all(t: &PointMatrix, w: &PointMatrix, epsilon: f64, diam: f64, tol: f64) -> Result<bool> {
    let cols: Vec<&[f64]> = w.columns().collect();
    let results: Result<Vec<bool>> = cols
        .par_iter()
        .map(|x| in_soft_hull(x, t, epsilon, diam, tol).map(|r| r.0))
        .collect();
    Ok(results?.into_iter().all(|b| b))
}

/// Whether `W ⊆ CH(T) + ε·diam(W)·B`.
pub fn is_env(t: &PointMatrix, w: &PointMatrix, epsilon: f64, tol: f64) -> Result<bool> {
    check_pair(t, w)?;
    covered_all(t, w, epsilon, diameter(w)?, tol)
}

/// Whether every `t ∈ T` satisfies `dist(t, CH(T ∖ {t})) > δ·diam − tol`.
pub fn is_separated(t: &PointMatrix, delta: f64, diam: f64, tol: f64) -> Result<bool> {
    if t.count() < 2 {
        return Ok(true);
    }
    let radius = delta * diam - tol;
    for j in 0..t.count() {
        let rest = t.without(j);
        if radius < 0.0 {
            continue;
        }
        let (inside, _) = hull_within(t.col(j), &rest, radius, 0.0)?;
        if inside {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `T` is an `(ε, δ)`-envelope of `W`.
pub fn is_eps_delta_env(t: &PointMatrix, w: &PointMatrix, params: &EnvelopeParams, tol: f64) -> Result<bool> {
    check_pair(t, w)?;
    let diam = diameter(w)?;
    Ok(is_separated(t, params.delta, diam, tol)? && covered_all(t, w, params.epsilon, diam, tol)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Found,
    NoEnvelope,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub verdict: Verdict,
    /// Column indices of `Q` in `W`. On `NoEnvelope` this is the candidate
    /// that failed the envelope check.
    pub selected: Vec<usize>,
    /// Indices of points covered by the soft hull of their far points.
    pub pruned: Vec<usize>,
    /// Indices of the points that survived pruning.
    pub survivors: Vec<usize>,
    /// For each column of `W` (when found), convex weights over `Q` of a
    /// point within `ε·diam(W)` of it.
    pub witnesses: Vec<SimplexCoeffs>,
    pub diameter: f64,
    pub params: EnvelopeParams,
    pub checks: Vec<HypothesisCheck>,
}

impl EnvelopeResult {
    pub fn found(&self) -> bool {
        self.verdict == Verdict::Found
    }

    /// The selected points as columns.
    pub fn points(&self, w: &PointMatrix) -> PointMatrix {
        w.select(&self.selected)
    }
}

/// Prune `W` to an `(ε, δ)`-envelope.
///
/// A point `w` is pruned when it lies in the ε-soft hull of
/// `{x ∈ W : |w − x| ≥ ε₃·diam(W)}` (a point with no far points is kept).
/// The survivors are scanned in column order, keeping each point farther
/// than `2ε₃·diam(W)` from all points kept so far. The result is `Found` iff
/// the kept points form an `(ε, δ)`-envelope.
pub fn find_soft_envelope(w: &PointMatrix, params: &EnvelopeParams, tol: f64) -> Result<EnvelopeResult> {
    if w.is_empty() {
        return Err(Error::Empty("point set W"));
    }
    let checks = params.checks();
    let diam = diameter(w)?;
    let far_radius = params.epsilon3 * diam;

    let flags: Result<Vec<bool>> = (0..w.count())
        .into_par_iter()
        .map(|j| {
            let x = w.col(j);
            let far: Vec<usize> = (0..w.count())
                .filter(|&i| dist(x, w.col(i)) >= far_radius && i != j)
                .collect();
            if far.is_empty() {
                return Ok(false);
            }
            Ok(in_soft_hull(x, &w.select(&far), params.epsilon, diam, tol)?.0)
        })
        .collect();
    let flags = flags?;
    let pruned: Vec<usize> = (0..w.count()).filter(|&j| flags[j]).collect();
    let survivors: Vec<usize> = (0..w.count()).filter(|&j| !flags[j]).collect();

    let spacing = 2.0 * params.epsilon3 * diam;
    let mut selected: Vec<usize> = Vec::new();
    for &j in &survivors {
        if selected.iter().all(|&i| dist(w.col(i), w.col(j)) > spacing) {
            selected.push(j);
        }
    }

    let mut result = EnvelopeResult {
        verdict: Verdict::NoEnvelope,
        selected,
        pruned,
        survivors,
        witnesses: Vec::new(),
        diameter: diam,
        params: *params,
        checks,
    };
    if result.selected.is_empty() {
        return Ok(result);
    }
    let q = w.select(&result.selected);
    if !is_separated(&q, params.delta, diam, tol)? {
        return Ok(result);
    }
    let cols: Vec<&[f64]> = w.columns().collect();
    let covers: Result<Vec<Option<SimplexCoeffs>>> = cols
        .par_iter()
        .map(|x| in_soft_hull(x, &q, params.epsilon, diam, tol).map(|r| r.1))
        .collect();
    let covers: Option<Vec<SimplexCoeffs>> = covers?.into_iter().collect();
    if let Some(witnesses) = covers {
        result.verdict = Verdict::Found;
        result.witnesses = witnesses;
    }
    Ok(result)
}

/// [`find_soft_envelope`] with `ε₃ = 4√ε`, which needs `δ > 16√ε`.
pub fn find_soft_envelope_sqrt(w: &PointMatrix, epsilon: f64, delta: f64, tol: f64) -> Result<EnvelopeResult> {
    if !(epsilon > 0.0) {
        return Err(Error::param(format!("epsilon {epsilon} must be positive")));
    }
    let need = 16.0 * epsilon.sqrt();
    if !(delta > need) {
        return Err(Error::pre(format!(
            "condition δ > 16√ε violated: δ = {delta}, 16√ε = {need}"
        )));
    }
    let params = EnvelopeParams::new(epsilon, delta, 4.0 * epsilon.sqrt())?;
    find_soft_envelope(w, &params, tol)
}
