//! Vertex recovery for latent polytope data.
//!
//! The pipeline projects the data onto its top-`k` left singular subspace,
//! answers random directions in that subspace by subset smoothing, prunes the
//! answers to `k` points with a soft envelope, and lifts them back.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::checks::{Constants, HypothesisCheck};
use crate::datagen::LkpInstance;
use crate::error::{Error, Result};
use crate::geometry::{diameter, well_separation, PointMatrix, VPolytope};
use crate::learner::{random_probes, ProbeSet};
use crate::linalg::{dist, dot, left_singular, spectral_norm_power};
use crate::oracles::{audit_answer_radius, subset_smoothing_oracle, AuditSummary, OracleGuarantee};
use crate::rng;
use crate::softhull::{find_soft_envelope, EnvelopeParams, DEFAULT_REL_TOL};

/// Orthonormal basis of the top-`k` left singular subspace of a data matrix,
/// with the data expressed in it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvdProjection {
    /// `d × k`, orthonormal columns; each column's largest-magnitude entry is
    /// positive (first such entry on ties).
    pub basis: PointMatrix,
    /// `k × n` coordinates of the data in `basis`.
    pub projected: PointMatrix,
    /// All singular values of the data, in decreasing order.
    pub singular_values: Vec<f64>,
}

impl SvdProjection {
    pub fn k(&self) -> usize {
        self.basis.count()
    }

    /// Coordinates `Bᵀx`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.basis.columns().map(|b| dot(b, x)).collect()
    }

    /// The ambient point `By`.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.basis.dim()];
        for (yi, b) in y.iter().zip(self.basis.columns()) {
            crate::linalg::axpy(*yi, b, &mut x);
        }
        x
    }

    pub fn project_all(&self, m: &PointMatrix) -> Result<PointMatrix> {
        m.check_dim(self.basis.dim())?;
        m.map_columns(self.k(), |x| self.project(x))
    }

    pub fn lift_all(&self, m: &PointMatrix) -> Result<PointMatrix> {
        m.check_dim(self.k())?;
        m.map_columns(self.basis.dim(), |y| self.lift(y))
    }
}

/// Project `A` onto its top-`k` left singular subspace.
pub fn svd_project(a: &PointMatrix, k: usize) -> Result<SvdProjection> {
    if a.is_empty() {
        return Err(Error::Empty("data matrix"));
    }
    let (d, n) = (a.dim(), a.count());
    if k == 0 || k > d.min(n) {
        return Err(Error::param(format!("k = {k} not in [1, min(d, n) = {}]", d.min(n))));
    }
    let (u, singular_values) = left_singular(a)?;
    let mut cols = Vec::with_capacity(k);
    for c in 0..k {
        let mut v: Vec<f64> = u.column(c).iter().copied().collect();
        let lead = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, x)| if x.abs() > best.1.abs() { (i, *x) } else { best });
        if lead.1 < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        cols.push(v);
    }
    let basis = PointMatrix::from_columns(d, &cols)?;
    let mut proj = SvdProjection {
        basis,
        projected: PointMatrix::empty(k),
        singular_values,
    };
    proj.projected = proj.project_all(a)?;
    Ok(proj)
}

/// One rung of the pruning retry ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneAttempt {
    pub params: EnvelopeParams,
    pub survivors: usize,
    pub selected: usize,
    pub found: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PruneOutcome {
    pub points: PointMatrix,
    /// Column indices of `points` in the input answers (first occurrence).
    pub indices: Vec<usize>,
    pub params_used: EnvelopeParams,
    pub attempts: Vec<PruneAttempt>,
    pub unique_answers: usize,
}

/// Number of times `ε₃` is doubled after the first attempt.
pub const PRUNE_RETRIES: usize = 3;

/// Envelope parameters for pruning list-learning answers at separation `δ`.
///
/// Starts from `δ′ = δ/4` and `ε′ = 32δ²/c` (relative to `Δ(K)`, rescaled to
/// `diam(W)` by `scale = Δ(K)/diam(W)`) with `ε₃ = 4√ε′`. The greedy spacing
/// `2ε₃·diam(W)` must stay below the vertex separation, so `ε₃` is capped at
/// `δ′`, and `ε = min(ε′, ε₃/2)` keeps `ε < ε₃`. The sufficient envelope
/// condition generally fails at these sizes and is reported, not enforced.
pub fn prune_params(delta: f64, c: f64, scale: f64) -> Result<EnvelopeParams> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!("delta {delta} not in (0, 1]")));
    }
    if !(c > 0.0) {
        return Err(Error::param("constant c must be positive"));
    }
    let d_env = delta / 4.0;
    let eps_prime = 32.0 * delta * delta / c * scale;
    let eps3 = (4.0 * eps_prime.sqrt()).min(d_env);
    EnvelopeParams::new(eps_prime.min(eps3 / 2.0), d_env, eps3)
}

fn ladder_params(base: &EnvelopeParams, eps_prime: f64, rung: usize) -> Result<EnvelopeParams> {
    let e3 = base.epsilon3 * 2f64.powi(rung as i32);
    EnvelopeParams::new(eps_prime.min(e3 / 2.0), base.delta, e3)
}

/// Bitwise-distinct columns ordered by decreasing multiplicity (ties by first
/// occurrence), with the first-occurrence index of each.
fn distinct_by_multiplicity(w: &PointMatrix) -> (PointMatrix, Vec<usize>) {
    let mut first: HashMap<Vec<u64>, (usize, usize)> = HashMap::new();
    for (j, x) in w.columns().enumerate() {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        first.entry(key).or_insert((j, 0)).1 += 1;
    }
    let mut entries: Vec<(usize, usize)> = first.into_values().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let idx: Vec<usize> = entries.into_iter().map(|e| e.0).collect();
    (w.select(&idx), idx)
}

fn distance_histogram(w: &PointMatrix, diam: f64) -> String {
    let take = w.count().min(200);
    let mut bins = [0usize; 10];
    for i in 0..take {
        for j in i + 1..take {
            let r = if diam > 0.0 { dist(w.col(i), w.col(j)) / diam } else { 0.0 };
            bins[((r * 10.0) as usize).min(9)] += 1;
        }
    }
    format!("{bins:?}")
}

/// Prune oracle answers `W` to exactly `k` points.
///
/// Identical answers are merged, and the distinct answers are scanned most
/// frequent first. Parameters come from [`prune_params`]; `diam_hint` is
/// `Δ(K)` when known (pass 0 to use `diam(W)`). If no envelope of size `k` is
/// found, `ε₃` is doubled up to [`PRUNE_RETRIES`] times.
pub fn prune_to_k(
    w: &PointMatrix,
    k: usize,
    delta: f64,
    diam_hint: f64,
    constants: &Constants,
) -> Result<PruneOutcome> {
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    if w.is_empty() {
        return Err(Error::Empty("answers"));
    }
    let (distinct, first_idx) = distinct_by_multiplicity(w);
    if distinct.count() < k {
        return Err(Error::EnvelopeNotFound(format!(
            "only {} distinct answers for k = {k}",
            distinct.count()
        )));
    }
    let diam = diameter(&distinct)?;
    let scale = if diam_hint > 0.0 && diam > 0.0 { diam_hint / diam } else { 1.0 };
    let base = prune_params(delta, constants.c, scale)?;
    let tol = DEFAULT_REL_TOL * diam;

    let mut attempts = Vec::new();
    let mut last_survivors = 0;
    for rung in 0..=PRUNE_RETRIES {
        let params = ladder_params(&base, 32.0 * delta * delta / constants.c * scale, rung)?;
        let res = find_soft_envelope(&distinct, &params, tol)?;
        let ok = res.found() && res.selected.len() == k;
        log::info!(
            "prune attempt {rung}: ε = {:.3e}, ε₃ = {:.3e}, {} survivors, {} selected, found = {}",
            params.epsilon,
            params.epsilon3,
            res.survivors.len(),
            res.selected.len(),
            res.found()
        );
        attempts.push(PruneAttempt {
            params,
            survivors: res.survivors.len(),
            selected: res.selected.len(),
            found: res.found(),
        });
        last_survivors = res.survivors.len();
        if ok {
            let indices: Vec<usize> = res.selected.iter().map(|&i| first_idx[i]).collect();
            return Ok(PruneOutcome {
                points: w.select(&indices),
                indices,
                params_used: params,
                attempts,
                unique_answers: distinct.count(),
            });
        }
    }
    let last = attempts.last().expect("at least one attempt");
    Err(Error::EnvelopeNotFound(format!(
        "no envelope of size {k} after {} attempts (last: {} survivors, {} selected); \
         pairwise distance histogram of distinct answers in tenths of diam(W): {}",
        attempts.len(),
        last_survivors,
        last.selected,
        distance_histogram(&distinct, diam)
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KolpOptions {
    /// Share of the data averaged per query; defaults to `w₀`.
    pub fraction: Option<f64>,
    pub constants: Constants,
}

impl Default for KolpOptions {
    fn default() -> Self {
        Self {
            fraction: None,
            constants: Constants::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KolpOutput {
    /// `d × k` estimates in ambient coordinates.
    pub vertex_estimates: PointMatrix,
    /// The same estimates in subspace coordinates.
    pub projected_estimates: PointMatrix,
    /// Directions and answers in subspace coordinates.
    pub probe_log: ProbeSet,
    pub envelope_params_used: EnvelopeParams,
    pub prune_attempts: Vec<PruneAttempt>,
    pub unique_answers: usize,
    pub fraction: f64,
    pub singular_values: Vec<f64>,
    pub basis: PointMatrix,
    pub checks: Vec<HypothesisCheck>,
    pub stage_seconds: Vec<(String, f64)>,
}

/// Hypotheses on `δ` alone: `δ ≥ √(ln k)/√(c₀k)`.
pub fn kolp_checks(k: usize, delta: f64, constants: &Constants) -> Vec<HypothesisCheck> {
    let kf = k as f64;
    vec![HypothesisCheck::at_least(
        "separation-lower-bound",
        "δ ≥ √(ln k)/√(c₀k)",
        delta,
        kf.ln().max(0.0).sqrt() / (constants.c0 * kf).sqrt(),
    )]
}

/// The noise hypothesis `σ₀ ≤ δ²Δ√w₀ / (100c₀√k)`, checkable when the truth
/// is known.
pub fn lkp_noise_check(
    sigma0: f64,
    delta: f64,
    diam: f64,
    w0: f64,
    k: usize,
    constants: &Constants,
) -> HypothesisCheck {
    HypothesisCheck::at_most(
        "noise-bound",
        "σ₀ ≤ δ²Δ√w₀/(100c₀√k)",
        sigma0,
        noise_bound(delta, diam, w0, k, constants.c0),
    )
}

/// `δ²Δ√w₀ / (100c₀√k)`.
pub fn noise_bound(delta: f64, diam: f64, w0: f64, k: usize, c0: f64) -> f64 {
    delta * delta * diam * w0.sqrt() / (100.0 * c0 * (k as f64).sqrt())
}

/// Recover `k` vertex estimates from observed data `A`.
pub fn kolp_run(
    a: &PointMatrix,
    k: usize,
    w0: f64,
    delta: f64,
    m: usize,
    seed: u64,
    opts: &KolpOptions,
) -> Result<KolpOutput> {
    if !(w0 > 0.0 && w0 <= 1.0) {
        return Err(Error::param(format!("w0 {w0} not in (0, 1]")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!("delta {delta} not in (0, 1]")));
    }
    if m == 0 {
        return Err(Error::param("probe count must be positive"));
    }
    let fraction = opts.fraction.unwrap_or(w0);
    let checks = kolp_checks(k, delta, &opts.constants);
    let mut stage_seconds = Vec::new();

    let t = Instant::now();
    let proj = svd_project(a, k).map_err(|e| e.in_stage("svd"))?;
    stage_seconds.push(("svd".to_string(), t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let oracle = subset_smoothing_oracle(&proj.projected, fraction).map_err(|e| e.in_stage("oracle"))?;
    let probes = random_probes(&oracle, m, k, None, seed).map_err(|e| e.in_stage("probes"))?;
    stage_seconds.push(("probes".to_string(), t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let pruned = prune_to_k(&probes.answers, k, delta, 0.0, &opts.constants).map_err(|e| e.in_stage("prune"))?;
    stage_seconds.push(("prune".to_string(), t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let vertex_estimates = proj.lift_all(&pruned.points).map_err(|e| e.in_stage("lift"))?;
    stage_seconds.push(("lift".to_string(), t.elapsed().as_secs_f64()));

    Ok(KolpOutput {
        vertex_estimates,
        projected_estimates: pruned.points,
        probe_log: probes,
        envelope_params_used: pruned.params_used,
        prune_attempts: pruned.attempts,
        unique_answers: pruned.unique_answers,
        fraction,
        singular_values: proj.singular_values,
        basis: proj.basis,
        checks,
        stage_seconds,
    })
}

/// For each true vertex, the distance to its nearest estimate.
pub fn vertex_errors(estimates: &PointMatrix, truth: &VPolytope) -> Result<Vec<f64>> {
    crate::learner::per_vertex_error(estimates, truth)
}

/// Whether each true vertex has its own estimate within `radius`: a perfect
/// matching between vertices and estimates at that distance.
pub fn matched_within(estimates: &PointMatrix, truth: &VPolytope, radius: f64) -> bool {
    let k = truth.vertex_count();
    if estimates.count() != k {
        return false;
    }
    let ok: Vec<Vec<bool>> = truth
        .vertices()
        .columns()
        .map(|v| estimates.columns().map(|x| dist(v, x) <= radius).collect())
        .collect();
    // Kuhn's augmenting paths.
    fn augment(l: usize, ok: &[Vec<bool>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for r in 0..ok[l].len() {
            if ok[l][r] && !seen[r] {
                seen[r] = true;
                if owner[r].is_none_or(|o| augment(o, ok, seen, owner)) {
                    owner[r] = Some(l);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; k];
    (0..k).all(|l| augment(l, &ok, &mut vec![false; k], &mut owner))
}

/// Measurements of the projected subset-smoothing oracle against the truth.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectedAudit {
    pub summary: AuditSummary,
    /// `10σ₀/(√w₀Δ(K))`.
    pub epsilon: f64,
    pub diameter: f64,
    pub sigma0: f64,
    /// `|M_ℓ − M̂_ℓ|` per vertex, `M̂` the projection onto the subspace.
    pub displacement: Vec<f64>,
    /// `5σ₀/√w₀`.
    pub displacement_bound: f64,
    /// `‖P − P̂‖`.
    pub latent_residual: f64,
    /// `3σ₀√n`.
    pub latent_residual_bound: f64,
    /// Well-separation of the projected vertices.
    pub projected_separation: f64,
}

/// Audit the subset-smoothing oracle on the SVD-projected data of `inst`
/// against the projected truth, over `trials` random directions.
pub fn audit_projected_oracle(inst: &LkpInstance, fraction: f64, trials: usize, seed: u64) -> Result<ProjectedAudit> {
    let k = inst.k();
    let proj = svd_project(&inst.a, k)?;
    let diam = inst.m.diameter();
    let sigma0 = inst.sigma0;
    let radius = 10.0 * sigma0 / inst.w0.sqrt();
    let epsilon = if diam > 0.0 { radius / diam } else { 0.0 };
    let khat = VPolytope::new(proj.project_all(inst.m.vertices())?)?;
    let oracle = subset_smoothing_oracle(&proj.projected, fraction)?
        .with_guarantee(OracleGuarantee { epsilon, diameter: diam });
    let tol = 1e-9 * diam.max(1e-300);

    let mut summary = AuditSummary {
        trials,
        epsilon,
        worst_containment_slack: f64::NEG_INFINITY,
        worst_optimality_slack: f64::INFINITY,
        ..Default::default()
    };
    for i in 0..trials {
        let u = rng::unit_vec(&mut rng::stream(seed, i as u64), k);
        let x = oracle.answer_for(&u);
        let a = audit_answer_radius(&khat, &u, &x, radius, tol)?;
        summary.passed += a.passed as usize;
        summary.worst_containment_slack = summary.worst_containment_slack.max(a.containment_slack);
        summary.worst_optimality_slack = summary.worst_optimality_slack.min(a.optimality_slack);
    }

    let displacement = inst
        .m
        .vertices()
        .columns()
        .map(|v| dist(v, &proj.lift(&proj.project(v))))
        .collect();
    let phat = proj.lift_all(&proj.project_all(&inst.p)?)?;
    let resid_data: Vec<f64> = inst.p.as_slice().iter().zip(phat.as_slice()).map(|(a, b)| a - b).collect();
    let resid = PointMatrix::from_column_major(inst.p.dim(), inst.p.count(), resid_data)?;
    let latent_residual = spectral_norm_power(&resid, 1e-12, 100_000);
    let projected_separation = if k >= 2 { well_separation(&khat, 1e-9)? } else { 1.0 };

    Ok(ProjectedAudit {
        summary,
        epsilon,
        diameter: diam,
        sigma0,
        displacement,
        displacement_bound: 5.0 * sigma0 / inst.w0.sqrt(),
        latent_residual,
        latent_residual_bound: 3.0 * sigma0 * (inst.n() as f64).sqrt(),
        projected_separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_lkp, gen_well_separated_polytope};
    use crate::learner::random_probes;
    use crate::oracles::exact_oracle;

    #[test]
    fn rank_one_residual_vanishes() {
        let v = [1.0, -3.0, 2.0];
        let cols: Vec<Vec<f64>> = (1..=5).map(|s| v.iter().map(|x| x * s as f64).collect()).collect();
        let a = PointMatrix::from_columns(3, &cols).unwrap();
        let p = svd_project(&a, 1).unwrap();
        let back = p.lift_all(&p.projected).unwrap();
        for (x, y) in a.as_slice().iter().zip(back.as_slice()) {
            assert!((x - y).abs() < 1e-9);
        }
        // Sign convention: the entry of largest magnitude is positive.
        let b = p.basis.col(0);
        assert!(b[1] > 0.0 && b[0] < 0.0);
    }

    #[test]
    fn k_out_of_range() {
        let a = PointMatrix::from_columns(2, &[[1.0, 0.0]]).unwrap();
        assert!(svd_project(&a, 2).is_err());
        assert!(svd_project(&a, 0).is_err());
    }

    #[test]
    fn projection_is_idempotent() {
        let a = PointMatrix::from_columns(3, &[[1.0, 0.0, 0.5], [0.0, 2.0, 0.1], [1.0, 1.0, 1.0], [3.0, -1.0, 0.0]]).unwrap();
        let p = svd_project(&a, 2).unwrap();
        let once = p.lift_all(&p.projected).unwrap();
        let twice = p.lift_all(&p.project_all(&once).unwrap()).unwrap();
        for (x, y) in once.as_slice().iter().zip(twice.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn prune_exact_triangle_answers() {
        let k = VPolytope::new(PointMatrix::from_columns(2, &[[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]]).unwrap()).unwrap();
        let o = exact_oracle(&k);
        let probes = random_probes(&o, 500, 2, None, 3).unwrap();
        let out = prune_to_k(&probes.answers, 3, 0.5, 0.0, &Constants::default()).unwrap();
        assert_eq!(out.points.count(), 3);
        assert_eq!(out.unique_answers, 3);
        assert!(matched_within(&out.points, &k, 1e-12));
    }

    #[test]
    fn prune_params_ordering() {
        for delta in [0.1, 0.3, 0.5, 1.0] {
            let p = prune_params(delta, 20.0, 1.0).unwrap();
            assert!(p.epsilon < p.epsilon3 && p.epsilon3 <= delta / 4.0, "delta {delta}: {p:?}");
        }
        // δ = 0.5, c = 20: ε′ = 0.4, 4√ε′ > δ′ = 0.125.
        let p = prune_params(0.5, 20.0, 1.0).unwrap();
        assert_eq!((p.epsilon, p.delta, p.epsilon3), (0.0625, 0.125, 0.125));
    }

    #[test]
    fn noiseless_lkp_recovers_vertices() {
        let (m, _) = gen_well_separated_polytope(6, 3, 0.5, 4).unwrap();
        let inst = gen_lkp(&m, 600, 0.2, 0.0, 1).unwrap();
        let out = kolp_run(&inst.a, 3, 0.2, 0.5, 2000, 7, &KolpOptions::default()).unwrap();
        assert!(matched_within(&out.vertex_estimates, &m, 1e-9 * m.diameter()));
    }

    #[test]
    fn matching_requires_distinct_partners() {
        let t = VPolytope::new(PointMatrix::from_columns(1, &[[0.0], [1.0]]).unwrap()).unwrap();
        let est = PointMatrix::from_columns(1, &[[0.0], [0.01]]).unwrap();
        assert!(!matched_within(&est, &t, 0.1));
        let est = PointMatrix::from_columns(1, &[[1.0], [0.01]]).unwrap();
        assert!(matched_within(&est, &t, 0.1));
    }
}
