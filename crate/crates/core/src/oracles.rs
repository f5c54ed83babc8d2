//! Approximate linear optimization oracles.
//!
//! An `OPT_ε(K)` oracle answers a unit direction `u` with a point `x(u)` such
//! that both
//!
//! - `x(u) ∈ K + εΔ(K)·B` (containment), and
//! - `u·x(u) ≥ max_{y∈K} u·y − εΔ(K)` (near-optimality)
//!
//! hold. [`audit_answer`] measures both slacks against an explicitly known `K`.

use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist_to_hull_abs, PointMatrix, VPolytope};
use crate::linalg::{dist, dot, norm};
use crate::rng;

/// Accepted deviation of a query direction's norm from 1.
pub const UNIT_TOL: f64 = 1e-9;

/// The `(ε, Δ)` pair an oracle advertises.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleGuarantee {
    pub epsilon: f64,
    pub diameter: f64,
}

pub trait OptOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn query(&self, u: &[f64]) -> Result<Vec<f64>>;

    /// The advertised guarantee, when the oracle knows one.
    fn guarantee(&self) -> Option<OracleGuarantee>;

    fn name(&self) -> &'static str;
}

pub(crate) fn check_unit(u: &[f64], dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: u.len(),
        });
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("query direction"));
    }
    let n = norm(u);
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitDirection { norm: n });
    }
    Ok(())
}

/// Returns a maximizing vertex; ties go to the lowest vertex index.
#[derive(Clone, Debug)]
pub struct ExactOracle {
    polytope: VPolytope,
    diameter: f64,
}

pub fn exact_oracle(k: &VPolytope) -> ExactOracle {
    ExactOracle {
        diameter: k.diameter(),
        polytope: k.clone(),
    }
}

impl OptOracle for ExactOracle {
    fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn query(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_unit(u, self.dim())?;
        let (_, l) = self.polytope.support(u);
        Ok(self.polytope.vertex(l).to_vec())
    }

    fn guarantee(&self) -> Option<OracleGuarantee> {
        Some(OracleGuarantee {
            epsilon: 0.0,
            diameter: self.diameter,
        })
    }

    fn name(&self) -> &'static str {
        "exact"
    }
}

/// Exact answer plus a perturbation drawn uniformly from the ball of radius
/// `εΔ`. The perturbation is seeded by `(seed, u)`, so answers are
/// reproducible per query.
#[derive(Clone, Debug)]
pub struct NoisyOracle {
    exact: ExactOracle,
    epsilon: f64,
    seed: u64,
}

pub fn noisy_oracle(k: &VPolytope, epsilon: f64, seed: u64) -> Result<NoisyOracle> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::param(format!("noisy oracle epsilon {epsilon} not in [0, 1]")));
    }
    Ok(NoisyOracle {
        exact: exact_oracle(k),
        epsilon,
        seed,
    })
}

impl OptOracle for NoisyOracle {
    fn dim(&self) -> usize {
        self.exact.dim()
    }

    fn query(&self, u: &[f64]) -> Result<Vec<f64>> {
        let base = self.exact.query(u)?;
        let radius = self.epsilon * self.exact.diameter;
        if radius == 0.0 {
            return Ok(base);
        }
        let d = base.len();
        let mut r = rng::stream(rng::fingerprint(self.seed, u), 0);
        let dir = rng::unit_vec(&mut r, d);
        let mut scale = radius * r.random::<f64>().powf(1.0 / d as f64);
        let support = dot(u, &base);
        // Enforce both clauses on the rounded result; |x − vertex| ≤ εΔ
        // implies containment.
        for _ in 0..64 {
            let x: Vec<f64> = base.iter().zip(&dir).map(|(b, t)| b + scale * t).collect();
            if dist(&x, &base) <= radius && dot(u, &x) >= support - radius {
                return Ok(x);
            }
            scale *= 0.5;
        }
        Ok(base)
    }

    fn guarantee(&self) -> Option<OracleGuarantee> {
        Some(OracleGuarantee {
            epsilon: self.epsilon,
            diameter: self.exact.diameter,
        })
    }

    fn name(&self) -> &'static str {
        "noisy"
    }
}

/// Answers `u` with the mean of the `⌈fraction·n⌉` data columns with the
/// largest `u·A_j` (ties to the lower column index).
#[derive(Clone, Debug)]
pub struct SubsetSmoothingOracle {
    data: PointMatrix,
    subset: usize,
    guarantee: Option<OracleGuarantee>,
}

pub fn subset_smoothing_oracle(a: &PointMatrix, fraction: f64) -> Result<SubsetSmoothingOracle> {
    if a.is_empty() {
        return Err(Error::Empty("subset smoothing data"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param(format!("smoothing fraction {fraction} not in (0, 1]")));
    }
    let subset = smoothing_subset_size(a.count(), fraction);
    Ok(SubsetSmoothingOracle {
        data: a.clone(),
        subset,
        guarantee: None,
    })
}

/// `⌈fraction·n⌉`, computed so that exact products such as `0.1 · 5000` are
/// not pushed up by rounding.
pub fn smoothing_subset_size(n: usize, fraction: f64) -> usize {
    let raw = fraction * n as f64;
    let nearest = raw.round();
    let size = if (raw - nearest).abs() <= 1e-9 * raw.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    (size as usize).clamp(1, n)
}

impl SubsetSmoothingOracle {
    /// Attaches a known guarantee (e.g. derived from a generator's truth).
    pub fn with_guarantee(mut self, g: OracleGuarantee) -> Self {
        self.guarantee = Some(g);
        self
    }

    pub fn subset_size(&self) -> usize {
        self.subset
    }

    pub fn data(&self) -> &PointMatrix {
        &self.data
    }

    /// Indices (ascending) of the selected top subset for an arbitrary
    /// nonzero direction.
    pub fn top_indices(&self, dir: &[f64]) -> Vec<usize> {
        let n = self.data.count();
        let scores: Vec<f64> = self.data.columns().map(|c| dot(c, dir)).collect();
        let mut idx: Vec<usize> = (0..n).collect();
        let order = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
        if self.subset < n {
            idx.select_nth_unstable_by(self.subset - 1, order);
            idx.truncate(self.subset);
        }
        idx.sort_unstable();
        idx
    }

    /// The smoothing answer for any nonzero direction (no unit check).
    pub fn answer_for(&self, dir: &[f64]) -> Vec<f64> {
        let idx = self.top_indices(dir);
        let mut mean = vec![0.0; self.data.dim()];
        for &j in &idx {
            for (m, v) in mean.iter_mut().zip(self.data.col(j)) {
                *m += v;
            }
        }
        let s = idx.len() as f64;
        mean.iter_mut().for_each(|m| *m /= s);
        mean
    }
}

impl OptOracle for SubsetSmoothingOracle {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn query(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_unit(u, self.dim())?;
        Ok(self.answer_for(u))
    }

    fn guarantee(&self) -> Option<OracleGuarantee> {
        self.guarantee
    }

    fn name(&self) -> &'static str {
        "subset-smoothing"
    }
}

/// The adversarial oracle that answers every query with the origin and keeps
/// a log of all queries.
#[derive(Debug)]
pub struct NeedleOracle {
    dim: usize,
    log: Mutex<Vec<f64>>,
}

pub fn needle_oracle(d: usize) -> Result<NeedleOracle> {
    if d < 4 {
        return Err(Error::param(format!("needle oracle needs d >= 4, got {d}")));
    }
    Ok(NeedleOracle {
        dim: d,
        log: Mutex::new(Vec::new()),
    })
}

impl NeedleOracle {
    /// `8 ln d / √d`.
    pub fn epsilon(&self) -> f64 {
        needle_epsilon(self.dim)
    }

    pub fn query_count(&self) -> usize {
        self.log.lock().expect("needle log poisoned").len() / self.dim
    }

    /// Runs `f` over the logged queries (column-major, `dim` values each).
    pub fn with_log<T>(&self, f: impl FnOnce(&[f64]) -> T) -> T {
        let log = self.log.lock().expect("needle log poisoned");
        f(&log)
    }

    /// Largest `|u·vᵢ|` over all logged queries.
    pub fn max_abs_dot(&self, u: &[f64]) -> f64 {
        self.with_log(|log| {
            log.chunks_exact(self.dim)
                .map(|v| dot(u, v).abs())
                .fold(0.0, f64::max)
        })
    }
}

pub fn needle_epsilon(d: usize) -> f64 {
    let d = d as f64;
    8.0 * d.ln() / d.sqrt()
}

impl OptOracle for NeedleOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_unit(u, self.dim)?;
        self.log
            .lock()
            .expect("needle log poisoned")
            .extend_from_slice(u);
        Ok(vec![0.0; self.dim])
    }

    fn guarantee(&self) -> Option<OracleGuarantee> {
        Some(OracleGuarantee {
            epsilon: self.epsilon(),
            diameter: 2.0,
        })
    }

    fn name(&self) -> &'static str {
        "needle"
    }
}

/// Two needle directions that are both consistent with every logged query.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeedlePair {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub bound: f64,
    pub max_dot_u1: f64,
    pub max_dot_u2: f64,
    pub candidates_tried: usize,
}

/// Maximum number of candidate needle directions tried before giving up.
pub const NEEDLE_CANDIDATE_CAP: usize = 10_000_000;

/// Rejection-samples unit `u₁`, `u₂` with `max_i |u·vᵢ| ≤ bound` over the
/// oracle's log, `|u₁ − u₂| ≥ 0.1` and `|u₁ + u₂| ≥ 0.1`.
pub fn find_consistent_needles(
    oracle: &NeedleOracle,
    bound: f64,
    seed: u64,
    cap: usize,
) -> Result<NeedlePair> {
    let d = oracle.dim();
    let mut r = rng::stream(seed, 0);
    let mut tried = 0;
    let mut first: Option<(Vec<f64>, f64)> = None;
    while tried < cap {
        tried += 1;
        let u = rng::unit_vec(&mut r, d);
        if let Some((u1, _)) = &first {
            let minus: f64 = dist(u1, &u);
            let plus: f64 = u1.iter().zip(&u).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
            if minus < 0.1 || plus < 0.1 {
                continue;
            }
        }
        let worst = oracle.max_abs_dot(&u);
        if worst > bound {
            continue;
        }
        match first.take() {
            None => first = Some((u, worst)),
            Some((u1, w1)) => {
                return Ok(NeedlePair {
                    u1,
                    u2: u,
                    bound,
                    max_dot_u1: w1,
                    max_dot_u2: worst,
                    candidates_tried: tried,
                })
            }
        }
    }
    Err(Error::BudgetExhausted {
        attempts: cap,
        what: format!("needle directions with max |u·v| <= {bound}"),
    })
}

/// Slacks of one oracle answer against a known polytope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleAudit {
    /// `dist(x, K) − εΔ`; must be `≤ tol`.
    pub containment_slack: f64,
    /// `u·x − max_y u·y + εΔ`; must be `≥ −tol`.
    pub optimality_slack: f64,
    pub passed: bool,
}

pub fn audit_answer(k: &VPolytope, u: &[f64], x: &[f64], epsilon: f64, tol: f64) -> Result<OracleAudit> {
    audit_answer_radius(k, u, x, epsilon * k.diameter(), tol)
}

/// Audit with an explicit slack radius (`εΔ` for a caller-chosen `Δ`).
pub fn audit_answer_radius(
    k: &VPolytope,
    u: &[f64],
    x: &[f64],
    radius: f64,
    tol: f64,
) -> Result<OracleAudit> {
    let d = k.dim();
    for len in [u.len(), x.len()] {
        if len != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: len,
            });
        }
    }
    let abs_tol = (0.25 * tol).max(1e-15);
    let dist_x = dist_to_hull_abs(x, k.vertices(), abs_tol)?.distance;
    let (support, _) = k.support(u);
    let containment_slack = dist_x - radius;
    let optimality_slack = dot(u, x) - support + radius;
    Ok(OracleAudit {
        containment_slack,
        optimality_slack,
        passed: containment_slack <= tol && optimality_slack >= -tol,
    })
}

/// Aggregate of many audits.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub trials: usize,
    pub passed: usize,
    pub epsilon: f64,
    pub worst_containment_slack: f64,
    pub worst_optimality_slack: f64,
}

impl AuditSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Audits `trials` random unit queries of `oracle` against `k`.
pub fn audit_oracle(
    oracle: &dyn OptOracle,
    k: &VPolytope,
    epsilon: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<AuditSummary> {
    let mut summary = AuditSummary {
        trials,
        epsilon,
        worst_containment_slack: f64::NEG_INFINITY,
        worst_optimality_slack: f64::INFINITY,
        ..Default::default()
    };
    for i in 0..trials {
        let mut r = rng::stream(seed, i as u64);
        let u = rng::unit_vec(&mut r, oracle.dim());
        let x = oracle.query(&u).map_err(|e| Error::Oracle {
            index: i,
            source: Box::new(e),
        })?;
        let a = audit_answer(k, &u, &x, epsilon, tol)?;
        summary.passed += a.passed as usize;
        summary.worst_containment_slack = summary.worst_containment_slack.max(a.containment_slack);
        summary.worst_optimality_slack = summary.worst_optimality_slack.min(a.optimality_slack);
    }
    Ok(summary)
}
