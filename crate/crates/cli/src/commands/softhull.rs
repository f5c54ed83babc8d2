use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use polylearn_core::geometry::diameter;
use polylearn_core::softhull::{find_soft_envelope, find_soft_envelope_sqrt, EnvelopeParams, DEFAULT_REL_TOL};
use serde::Serialize;

use super::{config_of, load_points, Context};
use crate::report::Report;

#[derive(Debug, Args, Serialize)]
pub struct SofthullArgs {
    /// Matrix file with the points as columns.
    #[arg(long, conflicts_with = "fixture")]
    pub points: Option<PathBuf>,
    /// A built-in point set (see `polylearn fixtures`).
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    /// Far-point radius. Required unless `--sqrt` is given.
    #[arg(long, conflicts_with = "sqrt")]
    pub epsilon3: Option<f64>,
    /// Use `ε₃ = 4√ε`.
    #[arg(long)]
    pub sqrt: bool,
    /// Tolerance relative to the diameter of the point set.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
}

pub fn run(ctx: &Context, args: &SofthullArgs) -> Result<PathBuf> {
    let mut report = Report::new("softhull", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    if args.epsilon3.is_none() && !args.sqrt {
        bail!("one of --epsilon3 or --sqrt is required");
    }
    let w = report.stage("load", || load_points(args.points.as_deref(), args.fixture.as_deref()))?;
    let tol = args.tol * diameter(&w)?;
    let res = report.stage("prune", || match args.epsilon3 {
        Some(e3) => EnvelopeParams::new(args.epsilon, args.delta, e3).and_then(|p| find_soft_envelope(&w, &p, tol)),
        None => find_soft_envelope_sqrt(&w, args.epsilon, args.delta, tol),
    })?;
    report.config_set("epsilon3", res.params.epsilon3);
    report.checks(res.checks.clone());
    report.bound("spacing", 2.0 * res.params.epsilon3 * res.diameter);
    report.bound("separation", res.params.delta * res.diameter);
    report.bound("cover_radius", res.params.epsilon * res.diameter);
    report.result("verdict", res.verdict);
    report.result("selected", &res.selected);
    report.result("pruned", &res.pruned);
    report.result("survivors", &res.survivors);
    report.result("diameter", res.diameter);
    if res.found() {
        report.write_matrix("Q.mat", &res.points(&w))?;
    }
    report.finish()
}
