//! Subcommand implementations and the loaders they share.

pub mod audit;
pub mod estimate;
pub mod fixtures;
pub mod gen;
pub mod kolp;
pub mod learn;
pub mod softhull;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use polylearn_core::datagen::{self, LkpInstance};
use polylearn_core::oracles::{exact_oracle, noisy_oracle, OptOracle};
use polylearn_core::{Constants, PointMatrix, VPolytope};
use serde::{Deserialize, Serialize};

use crate::matrix::read_matrix;

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Context {
    pub seed: u64,
    pub out: PathBuf,
    pub constants: Constants,
}

/// Where a known polytope (and optionally a query point) comes from.
#[derive(Debug, Args, Serialize)]
pub struct TargetArgs {
    /// Matrix file with the vertices as columns.
    #[arg(long, conflicts_with = "fixture")]
    pub polytope: Option<PathBuf>,
    /// Matrix file holding one query point.
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Built-in geometry: `example1-segment`, `example2-sphere`, or a point
    /// set fixture (see `polylearn fixtures`).
    #[arg(long)]
    pub fixture: Option<String>,
    /// Ambient dimension of `example1-segment`.
    #[arg(long, default_value_t = 50)]
    pub segment_dim: usize,
    /// Vertex count of `example2-sphere`.
    #[arg(long, default_value_t = 64)]
    pub sphere_vertices: usize,
}

impl TargetArgs {
    pub fn load(&self) -> Result<(VPolytope, Option<Vec<f64>>)> {
        let (k, fixture_query) = match (&self.polytope, self.fixture.as_deref()) {
            (Some(path), _) => (VPolytope::new(read_matrix(path)?)?, None),
            (None, Some("example1-segment")) => {
                let (k, a) = datagen::example1_segment(self.segment_dim);
                (k, Some(a))
            }
            (None, Some("example2-sphere")) => {
                let (k, a) = datagen::sphere_polygon(self.sphere_vertices);
                (k, Some(a))
            }
            (None, Some(name)) => {
                let f = datagen::fixture(name)?;
                (VPolytope::new(f.points)?, f.query)
            }
            (None, None) => bail!("one of --polytope or --fixture is required"),
        };
        let query = match &self.query {
            Some(path) => {
                let q = read_matrix(path)?;
                if q.count() != 1 || q.dim() != k.dim() {
                    bail!(
                        "{}: expected one point of dimension {}, found dims {} {}",
                        path.display(),
                        k.dim(),
                        q.dim(),
                        q.count()
                    );
                }
                Some(q.col(0).to_vec())
            }
            None => fixture_query,
        };
        Ok((k, query))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Exact argmax over the vertices.
    Exact,
    /// Exact answer displaced by up to `ε·Δ`.
    Noisy,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value_t = OracleKind::Exact)]
    pub oracle: OracleKind,
    /// Accuracy of the noisy oracle, relative to the diameter.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
}

impl OracleArgs {
    pub fn build(&self, k: &VPolytope, seed: u64) -> Result<Box<dyn OptOracle>> {
        Ok(match self.oracle {
            OracleKind::Exact => Box::new(exact_oracle(k)),
            OracleKind::Noisy => Box::new(noisy_oracle(k, self.epsilon, seed)?),
        })
    }
}

/// Metadata written next to generated matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub generator: String,
    pub seed: u64,
    pub d: usize,
    pub k: usize,
    pub n: Option<usize>,
    pub w0: Option<f64>,
    pub delta_target: Option<f64>,
    pub measured_separation: Option<f64>,
    pub diameter: f64,
    pub sigma0: Option<f64>,
    pub noise_scale: Option<f64>,
    pub v_norm: Option<f64>,
    pub files: Vec<String>,
    pub cluster_sets: Option<Vec<Vec<usize>>>,
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Load a generated latent polytope instance from its output directory.
pub fn load_instance(dir: &Path) -> Result<LkpInstance> {
    let man = read_manifest(dir)?;
    let (Some(w0), Some(sigma0), Some(cluster_sets)) = (man.w0, man.sigma0, man.cluster_sets) else {
        bail!("{}: manifest does not describe a data set", dir.display());
    };
    let m = VPolytope::new(read_matrix(&dir.join("M.mat"))?)?;
    let p = read_matrix(&dir.join("P.mat"))?;
    let a = read_matrix(&dir.join("A.mat"))?;
    Ok(LkpInstance {
        m,
        p,
        a,
        w0,
        sigma0,
        cluster_sets,
        seed: man.seed,
    })
}

/// Load a point set from a file or a named fixture.
pub fn load_points(path: Option<&Path>, fixture: Option<&str>) -> Result<PointMatrix> {
    match (path, fixture) {
        (Some(p), None) => Ok(read_matrix(p)?),
        (None, Some(name)) => Ok(datagen::fixture(name)?.points),
        _ => bail!("exactly one of --points or --fixture is required"),
    }
}

pub fn config_of(args: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}
