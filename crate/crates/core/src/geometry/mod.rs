//! Convex-geometry primitives over finite point sets.

mod hull;
mod metric;
mod points;

pub use hull::{dist_to_hull, dist_to_hull_abs, hull_within, HullDistance};
pub use metric::{diameter, hausdorff, well_separation};
pub use points::{PointMatrix, SimplexCoeffs, VPolytope};
