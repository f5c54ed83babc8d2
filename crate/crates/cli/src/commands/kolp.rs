use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use polylearn_core::kolp::{kolp_run, lkp_noise_check, matched_within, noise_bound, vertex_errors, KolpOptions};
use polylearn_core::VPolytope;
use serde::Serialize;

use super::{config_of, read_manifest, Context};
use crate::matrix::read_matrix;
use crate::report::{Report, Stage};

#[derive(Debug, Args, Serialize)]
pub struct KolpArgs {
    /// Directory written by `polylearn gen` (reads `A.mat`, `M.mat` and the
    /// manifest).
    #[arg(long, conflicts_with = "data")]
    pub instance: Option<PathBuf>,
    /// Data matrix with observations as columns.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// True vertices, for measuring the error.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Minimum share of the data near each vertex.
    #[arg(long)]
    pub w0: Option<f64>,
    /// Number of vertices; defaults to the truth's vertex count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Vertex separation.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Number of random probes.
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    /// Share of the data averaged per query; defaults to `w0`.
    #[arg(long)]
    pub fraction: Option<f64>,
}

pub fn run(ctx: &Context, args: &KolpArgs) -> Result<PathBuf> {
    let mut report = Report::new("kolp", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    let (a, truth, w0, sigma0) = report.stage("load", || -> Result<_> {
        match (&args.instance, &args.data) {
            (Some(dir), _) => {
                let man = read_manifest(dir)?;
                let a = read_matrix(&dir.join("A.mat"))?;
                let truth = VPolytope::new(read_matrix(&dir.join("M.mat"))?)?;
                let w0 = args.w0.or(man.w0);
                Ok((a, Some(truth), w0, man.sigma0))
            }
            (None, Some(path)) => {
                let a = read_matrix(path)?;
                let truth = match &args.truth {
                    Some(t) => Some(VPolytope::new(read_matrix(t)?)?),
                    None => None,
                };
                Ok((a, truth, args.w0, None))
            }
            (None, None) => bail!("one of --instance or --data is required"),
        }
    })?;
    let Some(w0) = w0 else { bail!("--w0 is required") };
    let k = match (args.k, &truth) {
        (Some(k), _) => k,
        (None, Some(t)) => t.vertex_count(),
        (None, None) => bail!("--k is required without a truth"),
    };
    if let Some(t) = &truth {
        if t.vertex_count() != k || t.dim() != a.dim() {
            bail!("truth has {} vertices in dimension {}, expected {k} in {}", t.vertex_count(), t.dim(), a.dim());
        }
    }
    report.config_set("w0", w0);
    report.config_set("k", k);
    let opts = KolpOptions {
        fraction: args.fraction,
        constants: ctx.constants,
    };
    let out = kolp_run(&a, k, w0, args.delta, args.m, ctx.seed, &opts)?;
    report.stages.extend(out.stage_seconds.iter().map(|(name, seconds)| Stage {
        name: name.clone(),
        seconds: *seconds,
    }));
    report.config_set("fraction", out.fraction);
    report.checks(out.checks.clone());
    report.write_matrix("vertices.mat", &out.vertex_estimates)?;

    if let Some(t) = &truth {
        let diam = t.diameter();
        let radius = args.delta * diam / 5.0;
        report.bound("recovery_radius", radius);
        if let Some(s) = sigma0 {
            report.bound("noise_bound", noise_bound(args.delta, diam, w0, k, ctx.constants.c0));
            report.checks([lkp_noise_check(s, args.delta, diam, w0, k, &ctx.constants)]);
            report.result("sigma0", s);
        }
        let errors = vertex_errors(&out.vertex_estimates, t)?;
        report.result("per_vertex_error", &errors);
        report.result("recovered", matched_within(&out.vertex_estimates, t, radius));
    }
    report.result("envelope_params", out.envelope_params_used);
    report.result("prune_attempts", &out.prune_attempts);
    report.result("unique_answers", out.unique_answers);
    report.result("singular_values", &out.singular_values[..out.singular_values.len().min(k + 2)]);
    report.finish()
}
