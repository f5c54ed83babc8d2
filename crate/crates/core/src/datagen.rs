//! Synthetic instances: well-separated polytopes, latent polytope data sets,
//! Gaussian mixtures, and small deterministic fixtures.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist_to_hull, well_separation, PointMatrix, VPolytope};
use crate::linalg::{axpy, dist, spectral_norm_power};
use crate::rng;

/// Rejection budget of [`gen_well_separated_polytope`].
pub const MAX_POLYTOPE_ATTEMPTS: usize = 10_000;

/// Relative tolerance of the power iteration that measures `σ₀`.
const SIGMA_REL_TOL: f64 = 1e-13;
const SIGMA_MAX_ITER: usize = 200_000;

/// Sample `k` Gaussian points in `R^d` until they form a polytope whose
/// well-separation is at least `delta_target`. Returns the polytope and its
/// measured separation.
pub fn gen_well_separated_polytope(d: usize, k: usize, delta_target: f64, seed: u64) -> Result<(VPolytope, f64)> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    if k < 2 {
        return Err(Error::param("need at least two vertices"));
    }
    if !(delta_target >= 0.0 && delta_target <= 1.0) {
        return Err(Error::param(format!("delta_target {delta_target} not in [0, 1]")));
    }
    let mut r = rng::stream(seed, 0);
    let scale = 1.0 / (d as f64).sqrt();
    for _ in 0..MAX_POLYTOPE_ATTEMPTS {
        let data: Vec<f64> = rng::gaussian_vec(&mut r, d * k).into_iter().map(|v| v * scale).collect();
        let poly = VPolytope::new(PointMatrix::from_column_major(d, k, data)?)?;
        let sep = well_separation(&poly, 1e-9)?;
        if sep >= delta_target {
            return Ok((poly, sep));
        }
    }
    Err(Error::BudgetExhausted {
        attempts: MAX_POLYTOPE_ATTEMPTS,
        what: format!("{k}-vertex polytope in R^{d} with separation ≥ {delta_target}"),
    })
}

/// A latent polytope data set: latent points `P` in `CH(M)` with at least
/// `w₀n` of them near each vertex, and observations `A`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LkpInstance {
    pub m: VPolytope,
    pub p: PointMatrix,
    pub a: PointMatrix,
    pub w0: f64,
    /// `‖P − A‖ / √n`, measured.
    pub sigma0: f64,
    pub cluster_sets: Vec<Vec<usize>>,
    pub seed: u64,
}

impl LkpInstance {
    pub fn n(&self) -> usize {
        self.a.count()
    }

    pub fn k(&self) -> usize {
        self.m.vertex_count()
    }

    /// `‖P − A‖ / √n` by power iteration.
    pub fn measure_sigma0(&self) -> f64 {
        measure_sigma0(&self.p, &self.a)
    }

    /// Check the instance invariants: latent points in `CH(M)` within `tol`
    /// (relative to `Δ(M)`), cluster sizes at least `w₀n`, cluster points
    /// within `σ₀/√w₀` of their vertex, and `σ₀` consistent with `(P, A)`.
    pub fn audit(&self, tol: f64) -> Result<()> {
        let n = self.n();
        let k = self.k();
        if self.p.count() != n || self.p.dim() != self.a.dim() || self.m.dim() != self.a.dim() {
            return Err(Error::pre("P, A and M shapes disagree"));
        }
        let diam = self.m.diameter();
        for (j, x) in self.p.columns().enumerate() {
            let h = dist_to_hull(x, self.m.vertices(), tol)?;
            if h.distance > tol * diam.max(1.0) {
                return Err(Error::pre(format!(
                    "latent point {j} is {:.3e} outside CH(M)",
                    h.distance
                )));
            }
        }
        if self.cluster_sets.len() != k {
            return Err(Error::pre("one cluster set per vertex required"));
        }
        let min_size = self.w0 * n as f64;
        let radius = self.sigma0 / self.w0.sqrt();
        for (l, set) in self.cluster_sets.iter().enumerate() {
            if (set.len() as f64) < min_size * (1.0 - 1e-12) {
                return Err(Error::pre(format!(
                    "cluster {l} has {} < w₀n = {min_size} points",
                    set.len()
                )));
            }
            for &j in set {
                let r = dist(self.p.col(j), self.m.vertex(l));
                if r > radius {
                    return Err(Error::pre(format!(
                        "latent point {j} is {r:.3e} from vertex {l}, beyond σ₀/√w₀ = {radius:.3e}"
                    )));
                }
            }
        }
        let measured = self.measure_sigma0();
        if (measured - self.sigma0).abs() > 1e-6 * measured.max(1e-300) {
            return Err(Error::pre(format!(
                "recorded σ₀ = {} disagrees with measured {measured}",
                self.sigma0
            )));
        }
        Ok(())
    }
}

/// `‖P − A‖ / √n` by power iteration.
pub fn measure_sigma0(p: &PointMatrix, a: &PointMatrix) -> f64 {
    let diff = difference(a, p);
    spectral_norm_power(&diff, SIGMA_REL_TOL, SIGMA_MAX_ITER) / (a.count() as f64).sqrt()
}

fn difference(a: &PointMatrix, b: &PointMatrix) -> PointMatrix {
    let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect();
    PointMatrix::from_column_major(a.dim(), a.count(), data).expect("shapes match")
}

fn add(a: &PointMatrix, b: &PointMatrix) -> PointMatrix {
    let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + y).collect();
    PointMatrix::from_column_major(a.dim(), a.count(), data).expect("shapes match")
}

/// Share of the cluster radius over which cluster latent points spread
/// before clamping, as a fraction of the way toward a random point of `K`.
const CLUSTER_SPREAD: f64 = 0.05;

/// Generate an LkP data set over `M` with `n` points.
///
/// `⌈w₀n⌉` latent points sit near each vertex, the rest are Dirichlet(1, …, 1)
/// combinations of the vertices, and `A = P + N(0, noise_scale²)` entrywise.
/// Cluster points lie on segments from their vertex toward random points of
/// `K` and are pulled in to within `σ₀/√w₀` of the vertex, where `σ₀` is
/// measured from the realized noise.
pub fn gen_lkp(m: &VPolytope, n: usize, w0: f64, noise_scale: f64, seed: u64) -> Result<LkpInstance> {
    let k = m.vertex_count();
    let d = m.dim();
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    if !(w0 > 0.0 && w0 <= 1.0) {
        return Err(Error::param(format!("w0 {w0} not in (0, 1]")));
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::param("noise_scale must be nonnegative"));
    }
    let per = crate::oracles::smoothing_subset_size(n, w0);
    if per * k > n {
        return Err(Error::param(format!(
            "infeasible: w₀·k > 1 (⌈w₀n⌉·k = {} > n = {n})",
            per * k
        )));
    }

    let mut r = rng::stream(seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut cluster_sets: Vec<Vec<usize>> = (0..k)
        .map(|l| order[l * per..(l + 1) * per].to_vec())
        .collect();
    cluster_sets.iter_mut().for_each(|s| s.sort_unstable());

    let dirichlet = |r: &mut rng::StreamRng| -> Vec<f64> {
        let mut w: Vec<f64> = (0..k).map(|_| r.sample::<f64, _>(Exp1)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w
    };
    let combine = |w: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; d];
        for (wl, v) in w.iter().zip(m.vertices().columns()) {
            axpy(*wl, v, &mut x);
        }
        x
    };

    let noise_data: Vec<f64> = rng::gaussian_vec(&mut rng::stream(seed, 1), d * n)
        .into_iter()
        .map(|v| v * noise_scale)
        .collect();
    let noise = PointMatrix::from_column_major(d, n, noise_data)?;
    let sigma_noise = spectral_norm_power(&noise, SIGMA_REL_TOL, SIGMA_MAX_ITER) / (n as f64).sqrt();
    let radius = sigma_noise / w0.sqrt() * (1.0 - 1e-9);

    let mut latent = vec![vec![0.0; d]; n];
    let mut in_cluster = vec![None; n];
    for (l, set) in cluster_sets.iter().enumerate() {
        for &j in set {
            in_cluster[j] = Some(l);
        }
    }
    for (j, slot) in latent.iter_mut().enumerate() {
        let target = combine(&dirichlet(&mut r));
        match in_cluster[j] {
            None => *slot = target,
            Some(l) => {
                let v = m.vertex(l);
                let t: f64 = r.random::<f64>() * CLUSTER_SPREAD;
                let span = dist(v, &target);
                let t = if t * span > radius { radius / span } else { t };
                let mut x = v.to_vec();
                for (xi, (vi, yi)) in x.iter_mut().zip(v.iter().zip(&target)) {
                    *xi = (1.0 - t) * vi + t * yi;
                }
                *slot = x;
            }
        }
    }
    let p = PointMatrix::from_columns(d, &latent)?;
    let a = add(&p, &noise);
    let sigma0 = measure_sigma0(&p, &a);
    let inst = LkpInstance {
        m: m.clone(),
        p,
        a,
        w0,
        sigma0,
        cluster_sets,
        seed,
    };
    inst.audit(1e-9)?;
    Ok(inst)
}

/// Two equal-weight standard Gaussians centred at `±v`, `|v| = v_norm`, as an
/// LkP instance over the segment `{v, −v}` with `w₀ = 1/2`.
pub fn gen_two_gaussian_mixture(d: usize, n: usize, v_norm: f64, seed: u64) -> Result<LkpInstance> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    if n == 0 || n % 2 != 0 {
        return Err(Error::param(format!("n = {n} must be positive and even")));
    }
    if !(v_norm > 0.0 && v_norm.is_finite()) {
        return Err(Error::param("v_norm must be positive"));
    }
    let mut r = rng::stream(seed, 0);
    let v: Vec<f64> = rng::unit_vec(&mut r, d).into_iter().map(|x| x * v_norm).collect();
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let m = VPolytope::new(PointMatrix::from_columns(d, &[v.clone(), neg.clone()])?)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut plus = order[..n / 2].to_vec();
    let mut minus = order[n / 2..].to_vec();
    plus.sort_unstable();
    minus.sort_unstable();
    let mut latent = vec![neg.clone(); n];
    for &j in &plus {
        latent[j] = v.clone();
    }
    let p = PointMatrix::from_columns(d, &latent)?;
    let noise = PointMatrix::from_column_major(d, n, rng::gaussian_vec(&mut rng::stream(seed, 1), d * n))?;
    let a = add(&p, &noise);
    let sigma0 = measure_sigma0(&p, &a);
    let inst = LkpInstance {
        m,
        p,
        a,
        w0: 0.5,
        sigma0,
        cluster_sets: vec![plus, minus],
        seed,
    };
    inst.audit(1e-9)?;
    Ok(inst)
}

/// A named deterministic point set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub points: PointMatrix,
    /// A distinguished query point, for fixtures that come with one.
    pub query: Option<Vec<f64>>,
}

/// Two clusters at `(0,0)` and `(1,0)`: each centre followed by 8 points on
/// a circle of the given radius around it.
pub fn two_cluster(radius: f64) -> PointMatrix {
    let mut cols = Vec::with_capacity(18);
    for cx in [0.0, 1.0] {
        cols.push(vec![cx, 0.0]);
        for j in 0..8 {
            let a = TAU * j as f64 / 8.0;
            cols.push(vec![cx + radius * a.cos(), radius * a.sin()]);
        }
    }
    PointMatrix::from_columns(2, &cols).expect("fixture is valid")
}

/// Two rings of 24 points each, of the given radius, around `(0,0)` and
/// `(0,1)`. Every point is close to the hull of the others in its ring.
pub fn two_rings(radius: f64) -> PointMatrix {
    let mut cols = Vec::with_capacity(48);
    for cy in [0.0, 1.0] {
        for j in 0..24 {
            let a = TAU * j as f64 / 24.0;
            cols.push(vec![radius * a.cos(), cy + radius * a.sin()]);
        }
    }
    PointMatrix::from_columns(2, &cols).expect("fixture is valid")
}

/// Unit square corners `v₁..v₄` followed by the midpoint of `v₃v₄`.
pub fn square_plus_midpoint() -> PointMatrix {
    PointMatrix::from_columns(
        2,
        &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 1.0]],
    )
    .expect("fixture is valid")
}

/// Endpoints `±e₁` and `±e₂` of two needles in `R^d`.
pub fn needle_pair(d: usize) -> PointMatrix {
    let d = d.max(2);
    let mut cols = vec![vec![0.0; d]; 4];
    cols[0][0] = 1.0;
    cols[1][0] = -1.0;
    cols[2][1] = 1.0;
    cols[3][1] = -1.0;
    PointMatrix::from_columns(d, &cols).expect("fixture is valid")
}

/// The segment from the origin to `e₁` in `R^d` and the point
/// `a = (1/2, 1, 0, …)` at distance 1 from it.
pub fn example1_segment(d: usize) -> (VPolytope, Vec<f64>) {
    let d = d.max(2);
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let k = VPolytope::new(PointMatrix::from_columns(d, &[vec![0.0; d], e1]).expect("valid"))
        .expect("nonempty");
    let mut a = vec![0.0; d];
    a[0] = 0.5;
    a[1] = 1.0;
    (k, a)
}

/// A regular `k`-gon of radius 1/2 in the plane `x₁ = 0` of `R³` and the
/// point `a = e₁` at distance 1 from it. Vertex `j` sits at angle `2πj/k`,
/// so for powers of two the smaller polygons are exact subsets of the larger.
pub fn sphere_polygon(k: usize) -> (VPolytope, Vec<f64>) {
    let k = k.max(1);
    let cols: Vec<[f64; 3]> = (0..k)
        .map(|j| {
            let a = TAU * j as f64 / k as f64;
            [0.0, 0.5 * a.cos(), 0.5 * a.sin()]
        })
        .collect();
    let poly = VPolytope::new(PointMatrix::from_columns(3, &cols).expect("valid")).expect("nonempty");
    (poly, vec![1.0, 0.0, 0.0])
}

/// All fixtures at their default sizes.
pub fn fixtures() -> Vec<Fixture> {
    let (seg, a1) = example1_segment(50);
    let (sph, a2) = sphere_polygon(64);
    vec![
        Fixture { name: "two-cluster".into(), points: two_cluster(0.01), query: None },
        Fixture { name: "two-rings".into(), points: two_rings(5e-4), query: None },
        Fixture { name: "square-plus-midpoint".into(), points: square_plus_midpoint(), query: None },
        Fixture { name: "needle-pair".into(), points: needle_pair(4), query: None },
        Fixture { name: "example1-segment".into(), points: seg.vertices().clone(), query: Some(a1) },
        Fixture { name: "example2-sphere".into(), points: sph.vertices().clone(), query: Some(a2) },
    ]
}

/// Look up a fixture by name.
pub fn fixture(name: &str) -> Result<Fixture> {
    fixtures()
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::param(format!("unknown fixture `{name}`")))
}
