use polylearn_core::datagen::{gen_well_separated_polytope, two_cluster, two_rings};
use polylearn_core::geometry::{diameter, dist_to_hull, PointMatrix};
use polylearn_core::rng;
use polylearn_core::softhull::{
    find_soft_envelope, find_soft_envelope_sqrt, is_env, is_eps_delta_env, EnvelopeParams, Verdict, DEFAULT_REL_TOL,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn seg_dist(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (x.iter().zip(a).zip(&ab).map(|((xi, ai), d)| (xi - ai) * d).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    let p: Vec<f64> = a.iter().zip(&ab).map(|(ai, d)| ai + t * d).collect();
    dist(x, &p)
}

/// Test-only baseline: drop every point within `ε·diam(W)` of the hull of
/// all other points.
fn naive_prune(w: &PointMatrix, epsilon: f64) -> Vec<usize> {
    let diam = diameter(w).unwrap();
    (0..w.count())
        .filter(|&j| dist_to_hull(w.col(j), &w.without(j), 1e-12).unwrap().distance > epsilon * diam)
        .collect()
}

fn circle(n: usize, radius: f64) -> PointMatrix {
    let cols: Vec<[f64; 2]> = (0..n)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / n as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect();
    PointMatrix::from_columns(2, &cols).unwrap()
}

/// Clusters of radius `rel_radius·Δ(centers)` around the vertices of a
/// well-separated polytope, plus bulk points inside the hull kept at least
/// `3ε₃·Δ` from every center, in shuffled order.
fn clustered(seed: u64, k: usize, rel_radius: f64, epsilon3: f64) -> (PointMatrix, Vec<Vec<f64>>) {
    let (centers, _) = gen_well_separated_polytope(2, k, 0.3, seed).unwrap();
    let diam = centers.diameter();
    let mut r = rng::stream(seed, 1);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for c in centers.vertices().columns() {
        let size = r.random_range(3..12);
        for _ in 0..size {
            let u = rng::unit_vec(&mut r, 2);
            let s = rel_radius * diam * r.random::<f64>();
            cols.push(c.iter().zip(&u).map(|(a, b)| a + s * b).collect());
        }
    }
    let mut bulk = 0;
    while bulk < 20 {
        let raw: Vec<f64> = (0..k).map(|_| -r.random::<f64>().ln()).collect();
        let total: f64 = raw.iter().sum();
        let mut x = vec![0.0; 2];
        for (wgt, c) in raw.iter().zip(centers.vertices().columns()) {
            x[0] += wgt / total * c[0];
            x[1] += wgt / total * c[1];
        }
        if centers.vertices().columns().all(|c| dist(c, &x) >= 3.0 * epsilon3 * diam) {
            cols.push(x);
            bulk += 1;
        }
    }
    cols.shuffle(&mut r);
    let truth = centers.vertices().columns().map(|c| c.to_vec()).collect();
    (PointMatrix::from_columns(2, &cols).unwrap(), truth)
}

#[test]
fn sqrt_variant_matches_cluster_centers() {
    let w = two_cluster(5e-5);
    let eps = 1e-4;
    let res = find_soft_envelope_sqrt(&w, eps, 0.3, DEFAULT_REL_TOL).unwrap();
    assert_eq!(res.verdict, Verdict::Found);
    assert_eq!(res.selected.len(), 2);
    let diam = diameter(&w).unwrap();
    let truth = [[0.0, 0.0], [1.0, 0.0]];
    let q = res.points(&w);
    for t in truth {
        assert!(q.columns().any(|x| dist(x, &t) <= 8.0 * eps.sqrt() * diam));
    }
}

#[test]
fn circle_has_no_envelope() {
    let w = circle(24, 0.5);
    let params = EnvelopeParams::new(0.01, 0.95, 0.05).unwrap();
    let res = find_soft_envelope(&w, &params, DEFAULT_REL_TOL).unwrap();
    assert_eq!(res.verdict, Verdict::NoEnvelope);

    // Exhaustive: no 2ε₃-separated subset of size ≤ 3 is an envelope.
    let diam = diameter(&w).unwrap();
    let spacing = 2.0 * params.epsilon3 * diam;
    let n = w.count();
    let mut subsets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for i in 0..n {
        for j in i + 1..n {
            subsets.push(vec![i, j]);
            for l in j + 1..n {
                subsets.push(vec![i, j, l]);
            }
        }
    }
    let mut checked = 0;
    for s in subsets {
        let spread = s.iter().all(|&a| s.iter().all(|&b| a == b || dist(w.col(a), w.col(b)) > spacing));
        if !spread {
            continue;
        }
        checked += 1;
        let t = w.select(&s);
        assert!(!is_eps_delta_env(&t, &w, &params, 1e-9).unwrap(), "{s:?}");
        // Independent separation test for |T| ≤ 3: some member is within
        // δ·diam of the segment or point formed by the rest.
        if s.len() >= 2 {
            let separated = (0..s.len()).all(|i| {
                let rest: Vec<&[f64]> = (0..s.len()).filter(|&j| j != i).map(|j| w.col(s[j])).collect();
                let dd = if rest.len() == 1 {
                    dist(w.col(s[i]), rest[0])
                } else {
                    seg_dist(w.col(s[i]), rest[0], rest[1])
                };
                dd > params.delta * diam
            });
            let covered = w.columns().all(|x| {
                let dd = if s.len() == 2 {
                    seg_dist(x, w.col(s[0]), w.col(s[1]))
                } else {
                    dist_to_hull(x, &w.select(&s), 1e-12).unwrap().distance
                };
                dd <= params.epsilon * diam
            });
            assert!(!(separated && covered));
        }
    }
    assert!(checked > 2000);
}

#[test]
fn naive_pruner_fails_on_two_rings() {
    let w = two_rings(5e-4);
    assert!(naive_prune(&w, 0.0015).is_empty());
    let params = EnvelopeParams::new(0.0015, 0.124, 0.03).unwrap();
    let res = find_soft_envelope(&w, &params, DEFAULT_REL_TOL).unwrap();
    assert_eq!(res.verdict, Verdict::Found);
    assert_eq!(res.selected.len(), 2);
    assert!(res.selected.iter().any(|&j| j < 24) && res.selected.iter().any(|&j| j >= 24));
    assert!(is_eps_delta_env(&res.points(&w), &w, &params, 1e-9).unwrap());
}

#[test]
fn randomized_clusters_recover_centers() {
    let params = EnvelopeParams::new(0.0008, 0.11, 0.025).unwrap();
    assert!(params.checks().iter().all(|c| c.held));
    for seed in 0..20 {
        let k = 2 + (seed as usize % 2);
        let (w, truth) = clustered(seed, k, 0.0003, params.epsilon3);
        let res = find_soft_envelope(&w, &params, DEFAULT_REL_TOL).unwrap();
        assert_eq!(res.verdict, Verdict::Found, "seed {seed}");
        assert_eq!(res.selected.len(), k);
        let diam = diameter(&w).unwrap();
        let q = res.points(&w);
        for t in &truth {
            assert_eq!(q.columns().filter(|x| dist(x, t) <= 2.0 * params.epsilon3 * diam).count(), 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selection_structure(seed in 0u64..10_000, k in 2usize..4) {
        let params = EnvelopeParams::new(0.0008, 0.11, 0.025).unwrap();
        let (w, _) = clustered(seed, k, 0.0003, params.epsilon3);
        let res = find_soft_envelope(&w, &params, DEFAULT_REL_TOL).unwrap();
        let spacing = 2.0 * params.epsilon3 * res.diameter;
        for &a in &res.selected {
            prop_assert!(res.survivors.contains(&a));
            for &b in &res.selected {
                prop_assert!(a == b || dist(w.col(a), w.col(b)) > spacing);
            }
        }
        let mut all: Vec<usize> = res.pruned.iter().chain(&res.survivors).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..w.count()).collect::<Vec<_>>());
    }

    #[test]
    fn rigid_motion_invariance(seed in 0u64..10_000, angle in 0.0f64..6.3, tx in -5.0f64..5.0, ty in -5.0f64..5.0) {
        let params = EnvelopeParams::new(0.0008, 0.11, 0.025).unwrap();
        let (w, _) = clustered(seed, 3, 0.0003, params.epsilon3);
        let (c, s) = (angle.cos(), angle.sin());
        let moved = w.map_columns(2, |x| vec![c * x[0] - s * x[1] + tx, s * x[0] + c * x[1] + ty]).unwrap();
        let a = find_soft_envelope(&w, &params, DEFAULT_REL_TOL).unwrap();
        let b = find_soft_envelope(&moved, &params, DEFAULT_REL_TOL).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.selected, b.selected);
    }

    #[test]
    fn envelope_monotone_in_epsilon(seed in 0u64..10_000, e1 in 0.0f64..0.2, e2 in 0.0f64..0.2) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let mut r = rng::stream(seed, 0);
        let cols: Vec<Vec<f64>> = (0..12).map(|_| rng::gaussian_vec(&mut r, 2)).collect();
        let w = PointMatrix::from_columns(2, &cols).unwrap();
        let t = w.select(&[0, 1, 2]);
        if is_env(&t, &w, lo, 1e-9).unwrap() {
            prop_assert!(is_env(&t, &w, hi, 1e-9).unwrap());
        }
    }
}
