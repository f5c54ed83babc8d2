//! Random separating hyperplanes.
//!
//! For a point `a` at distance at least `δΔ(K)` from a `k`-vertex polytope
//! `K`, a Gaussian direction `u` in an `m`-dimensional subspace containing
//! `K ∪ {a}` satisfies
//!
//! ```text
//! u·a − max_{y∈K} u·y ≥ |u|·δΔ·√(ln k) / (√(ln k) + 4δ√m)
//! ```
//!
//! with probability at least `k^(−10/δ²) / 40`. This module estimates that
//! probability by Monte Carlo and implements the randomized reduction from
//! separation to approximate optimization built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::HypothesisCheck;
use crate::error::{Error, Result};
use crate::geometry::{dist_to_hull, VPolytope};
use crate::linalg::{dot, norm, orthonormal_basis};
use crate::oracles::OptOracle;
use crate::rng;

/// Trials per independent random stream.
const TRIAL_CHUNK: usize = 1 << 16;

/// Two-sided 99% normal quantile.
const Z_99: f64 = 2.575_829_303_548_901;

/// `u·a − max_ℓ u·M_ℓ`.
pub fn margin(u: &[f64], a: &[f64], k: &VPolytope) -> Result<f64> {
    let d = k.dim();
    for len in [u.len(), a.len()] {
        if len != d {
            return Err(Error::DimensionMismatch { expected: d, found: len });
        }
    }
    if norm(u) == 0.0 {
        return Err(Error::param("margin direction must be nonzero"));
    }
    Ok(dot(u, a) - k.support(u).0)
}

/// `√(ln k) / (√(ln k) + 4δ√m)`; zero for `k = 1`.
pub fn margin_threshold_factor(k: usize, delta: f64, m: usize) -> f64 {
    if k <= 1 {
        return 0.0;
    }
    let s = (k as f64).ln().sqrt();
    s / (s + 4.0 * delta * (m as f64).sqrt())
}

/// `k^(−10/δ²) / 40`.
pub fn theoretical_lower_bound(k: usize, delta: f64) -> f64 {
    (k as f64).powf(-10.0 / (delta * delta)) / 40.0
}

/// Which statistic was compared against the theoretical bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundComparison {
    /// The 99% Wilson interval is narrower than half the bound, so its lower
    /// edge is compared.
    IntervalLowerEdge,
    /// The interval is too wide to be informative; the point estimate is
    /// compared.
    PointEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RshEstimate {
    pub trials: usize,
    pub successes: usize,
    pub vertex_count: usize,
    pub delta: f64,
    pub subspace_dim: usize,
    /// `dist(a, K) / Δ(K)` as measured.
    pub measured_separation: f64,
    pub margin_threshold_factor: f64,
    pub theoretical_lower_bound: f64,
    pub empirical_probability: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub comparison: BoundComparison,
}

impl RshEstimate {
    /// Whether the estimate is at least the theoretical bound, using the
    /// statistic named in `comparison`.
    pub fn meets_bound(&self) -> bool {
        match self.comparison {
            BoundComparison::IntervalLowerEdge => self.wilson_low >= self.theoretical_lower_bound,
            BoundComparison::PointEstimate => {
                self.empirical_probability >= self.theoretical_lower_bound
            }
        }
    }
}

/// 99% Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_99 * Z_99;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_99 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Orthonormal basis of an `m`-dimensional subspace containing `K ∪ {a}`:
/// the span of the vertices and `a`, padded with seeded random directions.
pub fn containing_subspace(k: &VPolytope, a: &[f64], m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let d = k.dim();
    if m == 0 || m > d {
        return Err(Error::param(format!("subspace dimension {m} not in [1, {d}]")));
    }
    let mut vectors: Vec<Vec<f64>> = k.vertices().columns().map(|c| c.to_vec()).collect();
    vectors.push(a.to_vec());
    let mut basis = orthonormal_basis(d, &vectors, 1e-10);
    if basis.len() > m {
        return Err(Error::pre(format!(
            "span(K ∪ {{a}}) has dimension {} > m = {m}",
            basis.len()
        )));
    }
    let mut r = rng::stream(seed, u64::MAX);
    while basis.len() < m {
        let g = rng::gaussian_vec(&mut r, d);
        let mut all = basis.clone();
        all.push(g);
        let grown = orthonormal_basis(d, &all, 1e-8);
        if grown.len() > basis.len() {
            basis = grown;
        }
    }
    Ok(basis)
}

/// Coordinates of `K` and `a` in an orthonormal basis.
struct Reduced {
    a: Vec<f64>,
    vertices: Vec<Vec<f64>>,
}

impl Reduced {
    fn new(k: &VPolytope, a: &[f64], basis: &[Vec<f64>]) -> Self {
        let coords = |x: &[f64]| basis.iter().map(|b| dot(b, x)).collect::<Vec<_>>();
        Self {
            a: coords(a),
            vertices: k.vertices().columns().map(coords).collect(),
        }
    }

    /// `(margin, |g|)` for the Gaussian coordinate vector `g`.
    fn margin(&self, g: &[f64]) -> (f64, f64) {
        let top = self
            .vertices
            .iter()
            .map(|v| dot(g, v))
            .fold(f64::NEG_INFINITY, f64::max);
        (dot(g, &self.a) - top, norm(g))
    }
}

fn check_separation(k: &VPolytope, a: &[f64], delta: f64) -> Result<f64> {
    if a.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: a.len() });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!("delta {delta} not in (0, 1]")));
    }
    let diam = k.diameter();
    let dist = dist_to_hull(a, k.vertices(), 1e-10)?.distance;
    let measured = if diam > 0.0 { dist / diam } else { f64::INFINITY };
    if dist < delta * diam * (1.0 - 1e-9) {
        return Err(Error::pre(format!(
            "point is too close to K: dist/Δ = {measured:.6} < δ = {delta}"
        )));
    }
    Ok(measured)
}

/// Monte-Carlo estimate of the probability of the margin event.
///
/// Trials are split into fixed chunks with one random stream per chunk, so
/// the result does not depend on how chunks are scheduled.
pub fn estimate_rsh_probability(
    k: &VPolytope,
    a: &[f64],
    delta: f64,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<RshEstimate> {
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let measured_separation = check_separation(k, a, delta)?;
    let basis = containing_subspace(k, a, m, seed)?;
    let reduced = Reduced::new(k, a, &basis);
    let factor = margin_threshold_factor(k.vertex_count(), delta, m);
    let scaled = delta * k.diameter() * factor;

    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let successes: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let len = TRIAL_CHUNK.min(trials - c * TRIAL_CHUNK);
            let mut hits = 0;
            for _ in 0..len {
                let g = rng::gaussian_vec(&mut r, m);
                let (mg, gn) = reduced.margin(&g);
                if mg >= gn * scaled {
                    hits += 1;
                }
            }
            hits
        })
        .sum();

    let bound = theoretical_lower_bound(k.vertex_count(), delta);
    let (wilson_low, wilson_high) = wilson_interval(successes, trials);
    let comparison = if wilson_high - wilson_low < bound / 2.0 {
        BoundComparison::IntervalLowerEdge
    } else {
        BoundComparison::PointEstimate
    };
    Ok(RshEstimate {
        trials,
        successes,
        vertex_count: k.vertex_count(),
        delta,
        subspace_dim: m,
        measured_separation,
        margin_threshold_factor: factor,
        theoretical_lower_bound: bound,
        empirical_probability: successes as f64 / trials as f64,
        wilson_low,
        wilson_high,
        comparison,
    })
}

/// Normalized margins `margin(u, a, K) / |u|` for `trials` Gaussian `u` drawn
/// in an `m`-dimensional subspace containing `K ∪ {a}`.
pub fn sample_normalized_margins(
    k: &VPolytope,
    a: &[f64],
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if a.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: a.len() });
    }
    let basis = containing_subspace(k, a, m, seed)?;
    let reduced = Reduced::new(k, a, &basis);
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let out: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let len = TRIAL_CHUNK.min(trials - c * TRIAL_CHUNK);
            (0..len)
                .map(|_| {
                    let g = rng::gaussian_vec(&mut r, m);
                    let (mg, gn) = reduced.margin(&g);
                    mg / gn
                })
                .collect()
        })
        .collect();
    Ok(out.concat())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `a` may lie in `K + δΔB`.
    InsideSoftened,
    /// A strictly separating direction was found.
    Separated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub verdict: Verdict,
    pub separator: Option<Vec<f64>>,
    /// `u·a − u·x(u)` for the returned separator.
    pub margin: Option<f64>,
    /// Acceptance threshold `δΔ / (11√d)` on `u·a − u·x(u)`.
    pub threshold: f64,
    pub queries_used: usize,
    pub checks: Vec<HypothesisCheck>,
}

/// Default query budget `min(10⁶, ⌈40·k^(10/δ²)·ln(1/0.01)⌉)` and whether the
/// cap was hit.
pub fn default_query_budget(k: usize, delta: f64) -> (usize, bool) {
    const CAP: usize = 1_000_000;
    let raw = 40.0 * (k as f64).powf(10.0 / (delta * delta)) * 100f64.ln();
    if !(raw < CAP as f64) {
        (CAP, true)
    } else {
        (raw.ceil() as usize, false)
    }
}

/// Separation oracle built from an optimization oracle: query random unit
/// directions and report the first `u` with `u·a > u·x(u) + δΔ/(11√d)`.
pub fn separate_via_opt(
    a: &[f64],
    oracle: &dyn OptOracle,
    delta: f64,
    d: usize,
    num_queries: usize,
    seed: u64,
) -> Result<SeparationResult> {
    if num_queries == 0 {
        return Err(Error::param("num_queries must be positive"));
    }
    if a.len() != d || oracle.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if a.len() != d { a.len() } else { oracle.dim() },
        });
    }
    let g = oracle
        .guarantee()
        .ok_or_else(|| Error::param("separation needs an oracle with a known (ε, Δ) guarantee"))?;
    let sqrt_d = (d as f64).sqrt();
    let checks = vec![HypothesisCheck::at_most(
        "oracle-accuracy",
        "ε ≤ δ/(100√d)",
        g.epsilon,
        delta / (100.0 * sqrt_d),
    )];
    let threshold = delta * g.diameter / (11.0 * sqrt_d);
    for i in 0..num_queries {
        let mut r = rng::stream(seed, i as u64);
        let u = rng::unit_vec(&mut r, d);
        let x = oracle.query(&u).map_err(|e| Error::Oracle {
            index: i,
            source: Box::new(e),
        })?;
        let gap = dot(&u, a) - dot(&u, &x);
        if gap > threshold {
            return Ok(SeparationResult {
                verdict: Verdict::Separated,
                separator: Some(u),
                margin: Some(gap),
                threshold,
                queries_used: i + 1,
                checks,
            });
        }
    }
    Ok(SeparationResult {
        verdict: Verdict::InsideSoftened,
        separator: None,
        margin: None,
        threshold,
        queries_used: num_queries,
        checks,
    })
}
