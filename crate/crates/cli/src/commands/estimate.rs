use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use polylearn_core::geometry::dist_to_hull;
use polylearn_core::rsh::{default_query_budget, estimate_rsh_probability, margin, separate_via_opt, Verdict};
use polylearn_core::PointMatrix;
use serde::Serialize;

use super::{config_of, Context, OracleArgs, TargetArgs};
use crate::report::Report;

#[derive(Debug, Args, Serialize)]
pub struct RshArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    /// Separation of the query relative to the diameter. Defaults to the
    /// measured `dist(a, K)/Δ(K)`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Dimension of the subspace the directions are drawn from. Defaults to
    /// the ambient dimension.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: usize,
}

pub fn run_rsh(ctx: &Context, args: &RshArgs) -> Result<PathBuf> {
    let mut report = Report::new("rsh-estimate", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    let (k, a) = report.stage("load", || args.target.load())?;
    let Some(a) = a else { bail!("a query point is required (--query)") };
    let diam = k.diameter();
    let dist = dist_to_hull(&a, k.vertices(), 1e-12)?.distance;
    let delta = args.delta.unwrap_or(if diam > 0.0 { dist / diam } else { 0.0 });
    let m = args.m.unwrap_or(k.dim());
    report.config_set("delta", delta);
    report.config_set("m", m);
    let est = report.stage("estimate", || estimate_rsh_probability(&k, &a, delta, m, args.trials, ctx.seed))?;
    report.bound("theoretical_lower_bound", est.theoretical_lower_bound);
    report.bound("margin_threshold", delta * diam * est.margin_threshold_factor);
    report.result("meets_bound", est.meets_bound());
    report.result("estimate", &est);
    report.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct SepArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Separation at which the query should be found outside.
    #[arg(long)]
    pub delta: f64,
    /// Query budget; defaults to `min(10⁶, 40·k^(10/δ²)·ln 100)`.
    #[arg(long)]
    pub queries: Option<usize>,
}

pub fn run_sep(ctx: &Context, args: &SepArgs) -> Result<PathBuf> {
    let mut report = Report::new("sep-reduce", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    let (k, a) = report.stage("load", || args.target.load())?;
    let Some(a) = a else { bail!("a query point is required (--query)") };
    let d = k.dim();
    let (budget, capped) = default_query_budget(k.vertex_count(), args.delta);
    let queries = args.queries.unwrap_or(budget);
    report.config_set("queries", queries);
    report.result("default_budget_capped", capped);
    let oracle = args.oracle.build(&k, ctx.seed)?;
    let res = report.stage("separate", || separate_via_opt(&a, oracle.as_ref(), args.delta, d, queries, ctx.seed))?;
    let verified_bound = args.delta * k.diameter() / (20.0 * (d as f64).sqrt());
    report.bound("acceptance_threshold", res.threshold);
    report.bound("verified_margin_bound", verified_bound);
    report.checks(res.checks.clone());
    if let (Verdict::Separated, Some(u)) = (res.verdict, &res.separator) {
        let true_margin = margin(u, &a, &k)?;
        report.result("true_margin", true_margin);
        report.result("verified", true_margin >= verified_bound);
        report.write_matrix("separator.mat", &PointMatrix::from_columns(d, &[u.clone()])?)?;
    }
    report.result("separation", &res);
    report.finish()
}
