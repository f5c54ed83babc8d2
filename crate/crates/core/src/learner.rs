//! Learning a polytope from random optimization-oracle probes.
//!
//! [`random_probes`] queries an oracle with uniformly random unit directions.
//! [`hausdorff_learn`] measures how well the hull of the answers approximates
//! the truth, and [`list_learn`] measures how closely every true vertex is
//! matched by some answer.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{Constants, HypothesisCheck};
use crate::error::{Error, Result};
use crate::geometry::{hausdorff, well_separation, PointMatrix, VPolytope};
use crate::linalg::{axpy, dist, norm};
use crate::oracles::OptOracle;
use crate::rng;

/// Relative tolerance used for Hausdorff and separation measurements.
pub const MEASURE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub directions: PointMatrix,
    pub answers: PointMatrix,
    pub seed: u64,
}

impl ProbeSet {
    pub fn len(&self) -> usize {
        self.answers.count()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.count() == 0
    }

    /// The first `len` probes.
    pub fn prefix(&self, len: usize) -> ProbeSet {
        let idx: Vec<usize> = (0..len.min(self.len())).collect();
        ProbeSet {
            directions: self.directions.select(&idx),
            answers: self.answers.select(&idx),
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub hausdorff_to_truth: Option<f64>,
    pub per_vertex_error: Option<Vec<f64>>,
    pub query_count: usize,
    /// Oracle accuracy `ε` (when advertised) and target accuracy `δ`.
    pub params: (Option<f64>, f64),
    /// `log₁₀` of the probe count `k^(10 + c/δ²)` sufficient in theory.
    pub recommended_log10_m: Option<f64>,
    /// `Δ(K)` of the truth, when supplied.
    pub truth_diameter: Option<f64>,
    /// Whether the measured error meets the target, when measurable.
    pub success: Option<bool>,
    pub checks: Vec<HypothesisCheck>,
}

/// Query `oracle` with `m` independent uniform unit directions.
///
/// Probe `i` draws its direction from random stream `i`, so the result does
/// not depend on scheduling. With `subspace` given (orthonormal vectors of
/// length `dim`), directions are uniform on the unit sphere of their span.
pub fn random_probes(
    oracle: &dyn OptOracle,
    m: usize,
    dim: usize,
    subspace: Option<&[Vec<f64>]>,
    seed: u64,
) -> Result<ProbeSet> {
    if m == 0 {
        return Err(Error::param("probe count must be positive"));
    }
    if oracle.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: oracle.dim() });
    }
    if let Some(basis) = subspace {
        if basis.is_empty() {
            return Err(Error::param("subspace basis is empty"));
        }
        if let Some(b) = basis.iter().find(|b| b.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: b.len() });
        }
    }
    let results: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let u = match subspace {
                None => rng::unit_vec(&mut r, dim),
                Some(basis) => {
                    let g = rng::gaussian_vec(&mut r, basis.len());
                    let mut u = vec![0.0; dim];
                    for (gj, b) in g.iter().zip(basis) {
                        axpy(*gj, b, &mut u);
                    }
                    let n = norm(&u);
                    u.iter_mut().for_each(|v| *v /= n);
                    u
                }
            };
            let x = oracle.query(&u).map_err(|e| Error::Oracle {
                index: i,
                source: Box::new(e),
            })?;
            if x.len() != dim {
                return Err(Error::Oracle {
                    index: i,
                    source: Box::new(Error::DimensionMismatch { expected: dim, found: x.len() }),
                });
            }
            Ok((u, x))
        })
        .collect();

    let mut directions = Vec::with_capacity(m * dim);
    let mut answers = Vec::with_capacity(m * dim);
    for res in results {
        let (u, x) = res?;
        directions.extend_from_slice(&u);
        answers.extend_from_slice(&x);
    }
    Ok(ProbeSet {
        directions: PointMatrix::from_column_major(dim, m, directions)?,
        answers: PointMatrix::from_column_major(dim, m, answers)?,
        seed,
    })
}

/// Distinct columns (bitwise), in order of first occurrence.
pub fn unique_columns(w: &PointMatrix) -> PointMatrix {
    let mut seen = HashSet::new();
    let keep: Vec<usize> = (0..w.count())
        .filter(|&j| seen.insert(w.col(j).iter().map(|v| v.to_bits()).collect::<Vec<_>>()))
        .collect();
    w.select(&keep)
}

/// `Haus(CH(answers), K)`.
pub fn hull_hausdorff(answers: &PointMatrix, truth: &VPolytope) -> Result<f64> {
    hausdorff(&unique_columns(answers), truth.vertices(), MEASURE_TOL)
}

/// Hausdorff distance to `truth` of the hull of each probe prefix of the
/// given lengths.
pub fn hausdorff_prefix_curve(
    probes: &ProbeSet,
    truth: &VPolytope,
    lengths: &[usize],
) -> Result<Vec<f64>> {
    lengths
        .iter()
        .map(|&len| {
            if len == 0 || len > probes.len() {
                return Err(Error::param(format!("prefix length {len} out of range")));
            }
            hull_hausdorff(&probes.prefix(len).answers, truth)
        })
        .collect()
}

fn recommended_log10_m(k: usize, delta: f64, c: f64) -> f64 {
    (10.0 + c / (delta * delta)) * (k as f64).log10()
}

/// Probe `oracle` `m` times and, given the truth, measure
/// `Haus(CH(answers), K)` against the target `δΔ(K)`.
pub fn hausdorff_learn(
    oracle: &dyn OptOracle,
    m: usize,
    truth: Option<&VPolytope>,
    delta: f64,
    constants: &Constants,
    seed: u64,
) -> Result<(ProbeSet, LearnReport)> {
    if !(delta > 0.0) {
        return Err(Error::param(format!("delta {delta} must be positive")));
    }
    let d = oracle.dim();
    let eps = oracle.guarantee().map(|g| g.epsilon);
    let sqrt_d = (d as f64).sqrt();
    let mut checks = vec![HypothesisCheck::greater(
        "dimension-vs-accuracy",
        "δ > c/√d",
        delta,
        constants.c / sqrt_d,
    )];
    if let Some(e) = eps {
        checks.push(HypothesisCheck::greater(
            "oracle-accuracy",
            "δ > cε√d",
            delta,
            constants.c * e * sqrt_d,
        ));
    }
    let probes = random_probes(oracle, m, d, None, seed)?;
    let mut report = LearnReport {
        hausdorff_to_truth: None,
        per_vertex_error: None,
        query_count: m,
        params: (eps, delta),
        recommended_log10_m: None,
        truth_diameter: None,
        success: None,
        checks,
    };
    if let Some(k) = truth {
        let h = hull_hausdorff(&probes.answers, k)?;
        let diam = k.diameter();
        report.hausdorff_to_truth = Some(h);
        report.truth_diameter = Some(diam);
        report.recommended_log10_m = Some(recommended_log10_m(k.vertex_count(), delta, constants.c));
        report.success = Some(h <= delta * diam);
    }
    Ok((probes, report))
}

/// `min_j |M_ℓ − W_j|` for every vertex `ℓ`.
pub fn per_vertex_error(answers: &PointMatrix, truth: &VPolytope) -> Result<Vec<f64>> {
    answers.check_dim(truth.dim())?;
    if answers.is_empty() {
        return Err(Error::Empty("answers"));
    }
    Ok(truth
        .vertices()
        .columns()
        .map(|v| answers.columns().map(|x| dist(v, x)).fold(f64::INFINITY, f64::min))
        .collect())
}

/// Probe `oracle` `m` times; given a δ-well-separated truth with `k`
/// vertices, measure how closely each vertex is matched by an answer.
/// Success means every vertex has an answer within `δΔ/10`.
pub fn list_learn(
    oracle: &dyn OptOracle,
    k_params: (usize, f64),
    m: usize,
    truth: Option<&VPolytope>,
    constants: &Constants,
    seed: u64,
) -> Result<(ProbeSet, LearnReport)> {
    let (k, delta) = k_params;
    if k == 0 {
        return Err(Error::param("vertex count must be positive"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!("delta {delta} not in (0, 1]")));
    }
    if let Some(t) = truth {
        if t.vertex_count() != k {
            return Err(Error::param(format!(
                "truth has {} vertices, expected {k}",
                t.vertex_count()
            )));
        }
        if k >= 2 {
            let sep = well_separation(t, MEASURE_TOL)?;
            if sep < delta * (1.0 - 1e-9) {
                return Err(Error::pre(format!(
                    "truth is not {delta}-well-separated: measured separation {sep:.6}"
                )));
            }
        }
    }
    let d = oracle.dim();
    let eps = oracle.guarantee().map(|g| g.epsilon);
    let mut checks = Vec::new();
    if let Some(e) = eps {
        let c = constants.c;
        checks.push(HypothesisCheck::at_least(
            "separation-vs-accuracy",
            "δ² ≥ cε√d",
            delta * delta,
            c * e * (d as f64).sqrt(),
        ));
        checks.push(HypothesisCheck::at_least(
            "separation-cubed-vs-accuracy",
            "δ³ ≥ cε",
            delta.powi(3),
            c * e,
        ));
    }
    let probes = random_probes(oracle, m, d, None, seed)?;
    let mut report = LearnReport {
        hausdorff_to_truth: None,
        per_vertex_error: None,
        query_count: m,
        params: (eps, delta),
        recommended_log10_m: None,
        truth_diameter: None,
        success: None,
        checks,
    };
    if let Some(t) = truth {
        let errs = per_vertex_error(&probes.answers, t)?;
        let diam = t.diameter();
        let worst = errs.iter().copied().fold(0.0, f64::max);
        report.success = Some(worst <= delta * diam / 10.0);
        report.per_vertex_error = Some(errs);
        report.truth_diameter = Some(diam);
    }
    Ok((probes, report))
}
