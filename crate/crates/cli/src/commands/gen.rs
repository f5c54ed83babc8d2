use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use polylearn_core::datagen::{gen_lkp, gen_two_gaussian_mixture, gen_well_separated_polytope};
use polylearn_core::kolp::{lkp_noise_check, noise_bound};
use serde::Serialize;

use super::{config_of, Context, Manifest};
use crate::report::Report;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Well-separated vertices only (`M.mat`).
    Polytope,
    /// Latent polytope data set (`M.mat`, `P.mat`, `A.mat`).
    Lkp,
    /// Mixture of two standard Gaussians at `±v`.
    TwoGaussian,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    #[arg(long, default_value_t = 50)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub w0: f64,
    /// Well-separation required of the generated vertices.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Entrywise noise standard deviation. Defaults to the value that puts
    /// the expected σ₀ at half the noise bound.
    #[arg(long)]
    pub noise_scale: Option<f64>,
    /// `|v|` for the two-Gaussian mixture.
    #[arg(long, default_value_t = 10.0)]
    pub v_norm: f64,
}

pub fn run(ctx: &Context, args: &GenArgs) -> Result<PathBuf> {
    let mut report = Report::new("gen", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    let manifest = match args.generator {
        Generator::Polytope => {
            let (m, sep) = report.stage("generate", || gen_well_separated_polytope(args.d, args.k, args.delta, ctx.seed))?;
            report.write_matrix("M.mat", &m.vertices().clone())?;
            Manifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                generator: "polytope".into(),
                seed: ctx.seed,
                d: args.d,
                k: args.k,
                n: None,
                w0: None,
                delta_target: Some(args.delta),
                measured_separation: Some(sep),
                diameter: m.diameter(),
                sigma0: None,
                noise_scale: None,
                v_norm: None,
                files: vec!["M.mat".into()],
                cluster_sets: None,
            }
        }
        Generator::Lkp => {
            if !(args.w0 > 0.0 && args.w0 <= 1.0) {
                bail!("w0 = {} not in (0, 1]", args.w0);
            }
            if args.w0 * args.k as f64 > 1.0 {
                bail!("infeasible: w₀·k > 1 (w0 = {}, k = {})", args.w0, args.k);
            }
            let (m, sep) = report.stage("polytope", || gen_well_separated_polytope(args.d, args.k, args.delta, ctx.seed))?;
            let bound = noise_bound(args.delta, m.diameter(), args.w0, args.k, ctx.constants.c0);
            let (d, n) = (args.d as f64, args.n as f64);
            let noise = args
                .noise_scale
                .unwrap_or(0.5 * bound * n.sqrt() / (d.sqrt() + n.sqrt()));
            report.config_set("noise_scale", noise);
            let inst = report.stage("data", || gen_lkp(&m, args.n, args.w0, noise, ctx.seed))?;
            report.checks([lkp_noise_check(inst.sigma0, args.delta, m.diameter(), args.w0, args.k, &ctx.constants)]);
            report.bound("noise_bound", bound);
            for (name, mat) in [("M.mat", inst.m.vertices()), ("P.mat", &inst.p), ("A.mat", &inst.a)] {
                report.write_matrix(name, mat)?;
            }
            Manifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                generator: "lkp".into(),
                seed: ctx.seed,
                d: args.d,
                k: args.k,
                n: Some(args.n),
                w0: Some(args.w0),
                delta_target: Some(args.delta),
                measured_separation: Some(sep),
                diameter: m.diameter(),
                sigma0: Some(inst.sigma0),
                noise_scale: Some(noise),
                v_norm: None,
                files: vec!["M.mat".into(), "P.mat".into(), "A.mat".into()],
                cluster_sets: Some(inst.cluster_sets),
            }
        }
        Generator::TwoGaussian => {
            let inst = report.stage("data", || gen_two_gaussian_mixture(args.d, args.n, args.v_norm, ctx.seed))?;
            report.config_set("k", 2);
            report.config_set("w0", inst.w0);
            report.config_set("noise_scale", 1.0);
            for (name, mat) in [("M.mat", inst.m.vertices()), ("P.mat", &inst.p), ("A.mat", &inst.a)] {
                report.write_matrix(name, mat)?;
            }
            report.result("naive_noise_ratio", inst.sigma0 / (inst.m.diameter() * inst.w0.sqrt()));
            Manifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                generator: "two-gaussian".into(),
                seed: ctx.seed,
                d: args.d,
                k: 2,
                n: Some(args.n),
                w0: Some(inst.w0),
                delta_target: None,
                measured_separation: Some(1.0),
                diameter: inst.m.diameter(),
                sigma0: Some(inst.sigma0),
                noise_scale: Some(1.0),
                v_norm: Some(args.v_norm),
                files: vec!["M.mat".into(), "P.mat".into(), "A.mat".into()],
                cluster_sets: Some(inst.cluster_sets),
            }
        }
    };
    report.result("diameter", manifest.diameter);
    report.result("measured_separation", manifest.measured_separation);
    report.result("sigma0", manifest.sigma0);
    report.write_json("manifest.json", &manifest)?;
    report.finish()
}
