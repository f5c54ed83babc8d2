use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use polylearn_core::Constants;

use crate::commands::{self, audit, estimate, fixtures, gen, kolp, learn, softhull};

#[derive(Debug, Parser)]
#[command(name = "polylearn", version, about = "Learn polytopes from approximate optimization oracles")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for matrices, manifests and reports.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overrides of the theory constants, e.g. `c=20,cprime=100,c0=20`.
    #[arg(long, global = true, value_parser = parse_constants)]
    pub constants: Option<Constants>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a polytope or a latent polytope data set.
    Gen(gen::GenArgs),
    /// Estimate the random separating hyperplane probability.
    RshEstimate(estimate::RshArgs),
    /// Separate a point from a polytope using only an optimization oracle.
    SepReduce(estimate::SepArgs),
    /// Learn a polytope in Hausdorff distance from random probes.
    HausLearn(learn::LearnArgs),
    /// Learn a list of vertex estimates from random probes.
    ListLearn(learn::LearnArgs),
    /// Prune a point set to a soft envelope.
    Softhull(softhull::SofthullArgs),
    /// Recover the vertices of a latent polytope from data.
    Kolp(kolp::KolpArgs),
    /// Audit an optimization oracle against a known polytope.
    AuditOracle(audit::AuditArgs),
    /// Write the built-in point set fixtures.
    Fixtures(fixtures::FixturesArgs),
}

/// Parse `c=..,cprime=..,c0=..`; omitted keys keep their defaults.
pub fn parse_constants(s: &str) -> Result<Constants> {
    let mut c = Constants::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((key, value)) = part.split_once('=') else {
            bail!("expected key=value, found `{part}`");
        };
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("invalid number `{}` for {}", value.trim(), key.trim()))?;
        if !(v > 0.0 && v.is_finite()) {
            bail!("constant {} must be positive, got {v}", key.trim());
        }
        match key.trim() {
            "c" => c.c = v,
            "cprime" => c.c_prime = v,
            "c0" => c.c0 = v,
            other => bail!("unknown constant `{other}` (expected c, cprime, c0)"),
        }
    }
    Ok(c)
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = commands::Context {
        seed: cli.seed,
        out: cli.out.clone(),
        constants: cli.constants.unwrap_or_default(),
    };
    std::fs::create_dir_all(&ctx.out)?;
    let report = match &cli.command {
        Command::Gen(a) => gen::run(&ctx, a)?,
        Command::RshEstimate(a) => estimate::run_rsh(&ctx, a)?,
        Command::SepReduce(a) => estimate::run_sep(&ctx, a)?,
        Command::HausLearn(a) => learn::run_haus(&ctx, a)?,
        Command::ListLearn(a) => learn::run_list(&ctx, a)?,
        Command::Softhull(a) => softhull::run(&ctx, a)?,
        Command::Kolp(a) => kolp::run(&ctx, a)?,
        Command::AuditOracle(a) => audit::run(&ctx, a)?,
        Command::Fixtures(a) => fixtures::run(&ctx, a)?,
    };
    log::info!("report written to {}", report.display());
    Ok(())
}
