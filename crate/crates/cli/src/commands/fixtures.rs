use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use polylearn_core::datagen;
use polylearn_core::PointMatrix;
use serde::Serialize;
use serde_json::json;

use super::{config_of, Context};
use crate::report::Report;

#[derive(Debug, Args, Serialize)]
pub struct FixturesArgs {
    /// Write only this fixture.
    #[arg(long)]
    pub name: Option<String>,
}

pub fn run(ctx: &Context, args: &FixturesArgs) -> Result<PathBuf> {
    let mut report = Report::new("fixtures", ctx.seed, ctx.constants, config_of(args), &ctx.out);
    let all = match &args.name {
        Some(n) => vec![datagen::fixture(n)?],
        None => datagen::fixtures(),
    };
    let mut listed = Vec::new();
    for f in &all {
        report.write_matrix(&format!("{}.mat", f.name), &f.points)?;
        if let Some(q) = &f.query {
            report.write_matrix(&format!("{}.query.mat", f.name), &PointMatrix::from_columns(q.len(), &[q.clone()])?)?;
        }
        listed.push(json!({
            "name": f.name,
            "dim": f.points.dim(),
            "points": f.points.count(),
            "has_query": f.query.is_some(),
        }));
    }
    report.result("fixtures", listed);
    report.finish()
}
