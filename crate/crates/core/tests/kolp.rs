use nalgebra::{DMatrix, DVector};
use polylearn_core::checks::Constants;
use polylearn_core::datagen::{gen_lkp, gen_two_gaussian_mixture, gen_well_separated_polytope, LkpInstance};
use polylearn_core::geometry::PointMatrix;
use polylearn_core::kolp::{
    audit_projected_oracle, kolp_run, lkp_noise_check, matched_within, noise_bound, svd_project, KolpOptions,
};
use polylearn_core::rng;
use proptest::prelude::*;

fn to_dm(a: &PointMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.dim(), a.count(), a.as_slice())
}

fn from_dm(m: &DMatrix<f64>) -> PointMatrix {
    PointMatrix::from_column_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

/// Largest singular value by power iteration on `MᵀM`.
fn top_singular(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    let mut v = DVector::from_element(m.ncols(), 1.0);
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = &g * &v;
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        let next = w / n;
        lambda = next.dot(&(&g * &next));
        if (&next - &v).norm() < 1e-14 {
            break;
        }
        v = next;
    }
    lambda.sqrt()
}

fn random_orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    let g = DMatrix::from_column_slice(d, d, &rng::gaussian_vec(&mut rng::stream(seed, 0), d * d));
    g.qr().q()
}

fn projector(basis: &PointMatrix) -> DMatrix<f64> {
    let b = to_dm(basis);
    &b * b.transpose()
}

fn lkp(seed: u64, d: usize, n: usize) -> (LkpInstance, f64) {
    let delta = 0.5;
    let (m, _) = gen_well_separated_polytope(d, 3, delta, seed).unwrap();
    let bound = noise_bound(delta, m.diameter(), 0.1, 3, Constants::default().c0);
    let inst = gen_lkp(&m, n, 0.1, 0.5 * bound / 1.1, seed).unwrap();
    (inst, delta)
}

#[test]
fn residual_of_constructed_svd() {
    let u = random_orthogonal(3, 1);
    let v = random_orthogonal(3, 2);
    let s = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
    let a = &u * s * v.transpose();
    let proj = svd_project(&from_dm(&a), 2).unwrap();
    for (got, want) in proj.singular_values.iter().zip([3.0, 2.0, 1.0]) {
        assert!((got - want).abs() < 1e-9);
    }
    let resid = &a - projector(&proj.basis) * &a;
    assert!((top_singular(&resid) - 1.0).abs() < 1e-9);
}

#[test]
fn basis_is_orthonormal_and_spans_data() {
    let (inst, _) = lkp(4, 20, 600);
    let proj = svd_project(&inst.a, 3).unwrap();
    let b = to_dm(&proj.basis);
    assert!((b.transpose() * &b - DMatrix::identity(3, 3)).norm() < 1e-10);
    // Lifting projected coordinates and projecting again is the identity.
    for y in proj.projected.columns().take(50) {
        let again = proj.project(&proj.lift(y));
        assert!(y.iter().zip(&again).all(|(p, q)| (p - q).abs() < 1e-10));
    }
}

#[test]
fn orthogonal_equivariance() {
    let (inst, _) = lkp(5, 12, 600);
    let q = random_orthogonal(12, 9);
    let rotated = from_dm(&(&q * to_dm(&inst.a)));
    let p1 = projector(&svd_project(&inst.a, 3).unwrap().basis);
    let p2 = projector(&svd_project(&rotated, 3).unwrap().basis);
    assert!((&q * p1 * q.transpose() - p2).norm() < 1e-8);
}

#[test]
fn projected_audit_and_bounds() {
    for seed in 0..3 {
        let (inst, delta) = lkp(seed, 30, 2000);
        let audit = audit_projected_oracle(&inst, 0.1, 300, seed).unwrap();
        assert!(audit.summary.all_passed());
        assert!(audit.displacement.iter().all(|&x| x <= audit.displacement_bound));
        assert!(audit.latent_residual <= audit.latent_residual_bound);
        // Each true vertex moves by at most 5σ₀/√w₀ ≪ δΔ, so the projected
        // vertices keep most of their separation.
        assert!(audit.projected_separation >= delta - 2.0 * audit.displacement_bound / audit.diameter - 1e-9);
        let check = lkp_noise_check(inst.sigma0, delta, inst.m.diameter(), 0.1, 3, &Constants::default());
        assert!(check.held);
    }
}

#[test]
fn noiseless_instance_audits_at_zero_epsilon() {
    let (m, _) = gen_well_separated_polytope(10, 3, 0.5, 2).unwrap();
    let inst = gen_lkp(&m, 500, 0.2, 0.0, 2).unwrap();
    let audit = audit_projected_oracle(&inst, 0.2, 200, 1).unwrap();
    assert_eq!(audit.epsilon, 0.0);
    assert!(audit.summary.all_passed());
}

#[test]
fn recovers_lkp_vertices() {
    let (inst, delta) = lkp(11, 30, 2000);
    let out = kolp_run(&inst.a, 3, 0.1, delta, 2000, 3, &KolpOptions::default()).unwrap();
    assert!(matched_within(&out.vertex_estimates, &inst.m, delta * inst.m.diameter() / 5.0));
    let again = kolp_run(&inst.a, 3, 0.1, delta, 2000, 3, &KolpOptions::default()).unwrap();
    assert_eq!(out.vertex_estimates, again.vertex_estimates);
}

#[test]
fn two_gaussian_recovers_plus_minus_v() {
    let inst = gen_two_gaussian_mixture(100, 10_000, 10.0, 7).unwrap();
    let out = kolp_run(&inst.a, 2, 0.5, 0.3, 2000, 1, &KolpOptions::default()).unwrap();
    assert!(matched_within(&out.vertex_estimates, &inst.m, 0.3 * 20.0 / 5.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), k in 1usize..4) {
        let data = rng::gaussian_vec(&mut rng::stream(seed, 0), 6 * 10);
        let a = PointMatrix::from_column_major(6, 10, data).unwrap();
        let p1 = projector(&svd_project(&a, k).unwrap().basis);
        let once = from_dm(&(&p1 * to_dm(&a)));
        let p2 = projector(&svd_project(&once, k).unwrap().basis);
        prop_assert!((p1 - p2).norm() < 1e-8);
    }
}
