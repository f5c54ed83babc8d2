use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use polylearn_core::linalg::dist;
use polylearn_core::kolp::audit_projected_oracle;
use polylearn_core::oracles::{
    audit_answer, audit_oracle, find_consistent_needles, needle_oracle, noisy_oracle, subset_smoothing_oracle,
    AuditSummary, OptOracle, NEEDLE_CANDIDATE_CAP,
};
use polylearn_core::{rng, PointMatrix, VPolytope};
use serde::Serialize;
use serde_json::json;

use super::{config_of, load_instance, Context, TargetArgs};
use crate::report::Report;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditKind {
    /// Noisy oracle on a known polytope.
    Noisy,
    /// Subset smoothing on the ambient data of a generated instance.
    Smoothing,
    /// Subset smoothing on the SVD-projected data of a generated instance.
    Projected,
    /// Zero-answer oracle against two consistent needles.
    Needle,
}

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    #[arg(value_enum)]
    pub kind: AuditKind,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Directory written by `polylearn gen`.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Advertised accuracy. Defaults: noisy 0.05; smoothing `4σ₀/(Δ√w₀)`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Share of the data averaged per query; defaults to `w₀`.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Dimension for the needle audit.
    #[arg(long, default_value_t = 400)]
    pub dim: usize,
    /// Zero-answer queries for the needle audit; defaults to `dim²`.
    #[arg(long)]
    pub queries: Option<usize>,
}

pub fn run(ctx: &Context, args: &AuditArgs) -> Result<PathBuf> {
    let mut report = Report::new("audit-oracle", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    match args.kind {
        AuditKind::Noisy => {
            let (k, _) = report.stage("load", || args.target.load())?;
            let eps = args.epsilon.unwrap_or(0.05);
            report.config_set("epsilon", eps);
            let oracle = noisy_oracle(&k, eps, ctx.seed)?;
            let tol = 1e-9 * k.diameter();
            let s = report.stage("audit", || audit_oracle(&oracle, &k, eps, args.trials, ctx.seed, tol))?;
            finish_summary(&mut report, &s);
        }
        AuditKind::Smoothing => {
            let inst = report.stage("load", || load_instance(require_instance(args)?))?;
            let diam = inst.m.diameter();
            let eps = args
                .epsilon
                .unwrap_or(4.0 * inst.sigma0 / (diam * inst.w0.sqrt()));
            let fraction = args.fraction.unwrap_or(inst.w0);
            report.config_set("epsilon", eps);
            report.config_set("fraction", fraction);
            let oracle = subset_smoothing_oracle(&inst.a, fraction)?;
            let s = report.stage("audit", || audit_oracle(&oracle, &inst.m, eps, args.trials, ctx.seed, 1e-9 * diam))?;
            report.result("sigma0", inst.sigma0);
            finish_summary(&mut report, &s);
        }
        AuditKind::Projected => {
            let inst = report.stage("load", || load_instance(require_instance(args)?))?;
            let fraction = args.fraction.unwrap_or(inst.w0);
            report.config_set("fraction", fraction);
            let pa = report.stage("audit", || audit_projected_oracle(&inst, fraction, args.trials, ctx.seed))?;
            report.bound("epsilon", pa.epsilon);
            report.bound("displacement", pa.displacement_bound);
            report.bound("latent_residual", pa.latent_residual_bound);
            report.result("all_passed", pa.summary.all_passed());
            report.result(
                "displacement_within_bound",
                pa.displacement.iter().all(|&x| x <= pa.displacement_bound),
            );
            report.result("latent_residual_within_bound", pa.latent_residual <= pa.latent_residual_bound);
            report.result("audit", &pa);
        }
        AuditKind::Needle => needle(ctx, args, &mut report)?,
    }
    report.finish()
}

fn require_instance(args: &AuditArgs) -> Result<&std::path::Path> {
    match &args.instance {
        Some(p) => Ok(p),
        None => bail!("--instance is required for this audit"),
    }
}

fn finish_summary(report: &mut Report, s: &AuditSummary) {
    report.bound("epsilon", s.epsilon);
    report.result("all_passed", s.all_passed());
    report.result("summary", s);
}

/// Answer `q` random unit queries with the origin, then find two needles
/// consistent with every answer and audit both.
fn needle(ctx: &Context, args: &AuditArgs, report: &mut Report) -> Result<()> {
    let d = args.dim;
    let q = args.queries.unwrap_or(d * d);
    report.config_set("queries", q);
    let oracle = needle_oracle(d)?;
    let eps = oracle.epsilon();
    let consistency = 4.0 * (d as f64).ln() / (d as f64).sqrt();
    report.stage("query", || -> Result<()> {
        for i in 0..q {
            let u = rng::unit_vec(&mut rng::stream(ctx.seed, i as u64), d);
            oracle.query(&u)?;
        }
        Ok(())
    })?;
    let pair = report.stage("needles", || {
        find_consistent_needles(&oracle, consistency, rng::mix64(ctx.seed), NEEDLE_CANDIDATE_CAP)
    })?;
    let audits = report.stage("audit", || -> Result<Vec<usize>> {
        let mut passed = Vec::new();
        for u in [&pair.u1, &pair.u2] {
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let k = VPolytope::new(PointMatrix::from_columns(d, &[u.clone(), neg])?)?;
            let zero = vec![0.0; d];
            let ok = oracle.with_log(|log| -> Result<usize> {
                let mut ok = 0;
                for v in log.chunks_exact(d) {
                    ok += audit_answer(&k, v, &zero, eps, 1e-12)?.passed as usize;
                }
                Ok(ok)
            })?;
            passed.push(ok);
        }
        Ok(passed)
    })?;
    // A point within Δ/10 of a vertex of each needle would put two vertices
    // within 2Δ/10 of each other.
    let diam = 2.0;
    let neg2: Vec<f64> = pair.u2.iter().map(|x| -x).collect();
    let closest = dist(&pair.u1, &pair.u2).min(dist(&pair.u1, &neg2));
    let threshold = 2.0 * diam / 10.0;
    report.bound("consistency", consistency);
    report.bound("epsilon", eps);
    report.bound("needle_gap", 0.1);
    report.bound("shared_point_threshold", threshold);
    report.result("query_count", oracle.query_count());
    report.result(
        "needles",
        json!({
            "max_dot_u1": pair.max_dot_u1,
            "max_dot_u2": pair.max_dot_u2,
            "u1_minus_u2": dist(&pair.u1, &pair.u2),
            "u1_plus_u2": dist(&pair.u1, &neg2),
            "candidates_tried": pair.candidates_tried,
        }),
    );
    report.result("needle_gap_held", dist(&pair.u1, &pair.u2) >= 0.1 && dist(&pair.u1, &neg2) >= 0.1);
    report.result("consistency_held", pair.max_dot_u1.max(pair.max_dot_u2) <= consistency);
    report.result("audits_passed", &audits);
    report.result("all_passed", audits.iter().all(|&p| p == q));
    report.result("closest_vertex_pair", closest);
    report.result("no_shared_point", closest > threshold);
    report.write_matrix("needles.mat", &PointMatrix::from_columns(d, &[pair.u1.clone(), pair.u2.clone()])?)?;
    Ok(())
}
