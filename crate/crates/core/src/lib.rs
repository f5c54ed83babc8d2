//! Learning polytopes from approximate linear optimization oracles.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: point matrices, V-polytopes, distance to a convex hull
//!   (Frank-Wolfe with away steps), Hausdorff distance, diameter and
//!   well-separation.
//! - [`oracles`]: the `OPT_ε(K)` oracle interface, four concrete oracles and
//!   an answer auditor.
//! - [`rsh`]: Monte-Carlo estimation of the random separating hyperplane
//!   probability and the randomized separation-from-optimization reduction.
//! - [`learner`]: random probes, Hausdorff learning and list learning.
//! - [`softhull`]: soft convex hulls, envelopes and the envelope pruning
//!   procedure.
//! - [`kolp`]: SVD projection, pruning to exactly `k` points and the
//!   end-to-end latent polytope pipeline.
//! - [`datagen`]: synthetic instances and deterministic fixtures.

pub mod checks;
pub mod datagen;
pub mod error;
pub mod geometry;
pub mod kolp;
pub mod learner;
pub mod linalg;
pub mod oracles;
pub mod rng;
pub mod rsh;
pub mod softhull;

pub use checks::{Constants, HypothesisCheck};
pub use error::{Error, Result};
pub use geometry::{PointMatrix, SimplexCoeffs, VPolytope};
pub use oracles::{OptOracle, OracleAudit, OracleGuarantee};

/// Library version string, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
