use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use polylearn_core::learner::{hausdorff_learn, hausdorff_prefix_curve, list_learn};
use serde::Serialize;

use super::{config_of, Context, OracleArgs, TargetArgs};
use crate::report::Report;

#[derive(Debug, Args, Serialize)]
pub struct LearnArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Number of random probes.
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    /// Target accuracy (Hausdorff) or vertex separation (list learning).
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
}

pub fn run_haus(ctx: &Context, args: &LearnArgs) -> Result<PathBuf> {
    let mut report = Report::new("haus-learn", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    let (k, _) = report.stage("load", || args.target.load())?;
    let oracle = args.oracle.build(&k, ctx.seed)?;
    let (probes, learned) =
        report.stage("probe", || hausdorff_learn(oracle.as_ref(), args.m, Some(&k), args.delta, &ctx.constants, ctx.seed))?;
    let mut lengths: Vec<usize> = std::iter::successors(Some(1usize), |&l| Some(l * 2)).take_while(|&l| l < args.m).collect();
    lengths.push(args.m);
    let curve = report.stage("prefix-curve", || hausdorff_prefix_curve(&probes, &k, &lengths))?;
    let monotone = curve.windows(2).all(|w| w[1] <= w[0]);
    report.checks(learned.checks.clone());
    if let Some(diam) = learned.truth_diameter {
        report.bound("target_hausdorff", args.delta * diam);
    }
    report.result("learn", &learned);
    report.result("prefix_lengths", &lengths);
    report.result("prefix_hausdorff", &curve);
    report.result("prefix_monotone", monotone);
    report.write_matrix("answers.mat", &probes.answers)?;
    report.write_matrix("directions.mat", &probes.directions)?;
    report.finish()
}

pub fn run_list(ctx: &Context, args: &LearnArgs) -> Result<PathBuf> {
    let mut report = Report::new("list-learn", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    let (k, _) = report.stage("load", || args.target.load())?;
    let oracle = args.oracle.build(&k, ctx.seed)?;
    let kk = k.vertex_count();
    let (probes, learned) = report.stage("probe", || {
        list_learn(oracle.as_ref(), (kk, args.delta), args.m, Some(&k), &ctx.constants, ctx.seed)
    })?;
    report.checks(learned.checks.clone());
    if let Some(diam) = learned.truth_diameter {
        report.bound("per_vertex_error", args.delta * diam / 10.0);
    }
    report.result("learn", &learned);
    report.write_matrix("answers.mat", &probes.answers)?;
    report.finish()
}
