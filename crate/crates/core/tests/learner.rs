use polylearn_core::checks::Constants;
use polylearn_core::geometry::{dist_to_hull, PointMatrix, VPolytope};
use polylearn_core::learner::{
    hausdorff_learn, hausdorff_prefix_curve, hull_hausdorff, list_learn, per_vertex_error, random_probes,
};
use polylearn_core::oracles::{exact_oracle, noisy_oracle};
use proptest::prelude::*;

type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain, counter-clockwise.
fn hull_2d(pts: &[P2]) -> Vec<P2> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut h: Vec<P2> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &P2>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

fn seg_dist(x: P2, a: P2, b: P2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 { 0.0 } else { (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0) };
    let p = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt()
}

fn polygon_dist(x: P2, poly: &[P2]) -> f64 {
    let n = poly.len();
    if n >= 3 && (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], x) >= 0.0) {
        return 0.0;
    }
    if n == 1 {
        return seg_dist(x, poly[0], poly[0]);
    }
    (0..n).map(|i| seg_dist(x, poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

fn boundary_samples(poly: &[P2], per_edge: usize) -> Vec<P2> {
    let n = poly.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for s in 0..per_edge {
            let t = s as f64 / per_edge as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Hausdorff distance of two planar hulls by dense boundary sampling.
fn brute_hausdorff(p: &[P2], q: &[P2]) -> f64 {
    let (hp, hq) = (hull_2d(p), hull_2d(q));
    let one = |a: &[P2], b: &[P2]| {
        boundary_samples(a, 200).into_iter().map(|x| polygon_dist(x, b)).fold(0.0, f64::max)
    };
    one(&hp, &hq).max(one(&hq, &hp))
}

fn as_points(m: &PointMatrix) -> Vec<P2> {
    m.columns().map(|c| [c[0], c[1]]).collect()
}

fn square() -> VPolytope {
    VPolytope::new(PointMatrix::from_columns(2, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()).unwrap()
}

fn triangle() -> VPolytope {
    VPolytope::new(PointMatrix::from_columns(2, &[[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]]).unwrap()).unwrap()
}

#[test]
fn square_exact_oracle_within_five_percent() {
    let k = square();
    let (probes, report) = hausdorff_learn(&exact_oracle(&k), 500, Some(&k), 0.05, &Constants::default(), 17).unwrap();
    let brute = brute_hausdorff(&as_points(&probes.answers), &as_points(k.vertices()));
    assert!(brute <= 0.05 * k.diameter());
    assert!((report.hausdorff_to_truth.unwrap() - brute).abs() < 1e-6);
    assert_eq!(report.success, Some(true));
}

#[test]
fn noisy_square_matches_brute_force() {
    let k = square();
    let oracle = noisy_oracle(&k, 0.02, 3).unwrap();
    let probes = random_probes(&oracle, 60, 2, None, 8).unwrap();
    let lib = hull_hausdorff(&probes.answers, &k).unwrap();
    let brute = brute_hausdorff(&as_points(&probes.answers), &as_points(k.vertices()));
    // Boundary sampling at 200 points per edge underestimates by at most
    // half a sample spacing.
    let spacing = 2f64.sqrt() / 200.0;
    assert!(brute <= lib + 1e-9 && lib <= brute + spacing, "{lib} vs {brute}");
}

#[test]
fn prefix_curve_never_increases() {
    let k = square();
    let probes = random_probes(&exact_oracle(&k), 500, 2, None, 5).unwrap();
    let lengths: Vec<usize> = (1..=500).collect();
    let curve = hausdorff_prefix_curve(&probes, &k, &lengths).unwrap();
    for w in curve.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!(curve[499] <= 0.05 * k.diameter());
}

#[test]
fn exact_answers_are_vertices() {
    let k = triangle();
    let probes = random_probes(&exact_oracle(&k), 200, 2, None, 1).unwrap();
    for x in probes.answers.columns() {
        assert!(k.vertices().columns().any(|v| v == x));
    }
}

#[test]
fn noisy_answers_stay_near_truth() {
    let k = triangle();
    let eps = 0.01;
    let probes = random_probes(&noisy_oracle(&k, eps, 2).unwrap(), 500, 2, None, 3).unwrap();
    for x in probes.answers.columns() {
        let dd = dist_to_hull(x, k.vertices(), 1e-12).unwrap().distance;
        assert!(dd <= eps * k.diameter() + 1e-9);
    }
}

#[test]
fn list_learning_on_well_separated_triangle() {
    let k = triangle();
    let (_, exact) = list_learn(&exact_oracle(&k), (3, 0.5), 3000, Some(&k), &Constants::default(), 4).unwrap();
    assert!(exact.per_vertex_error.unwrap().iter().all(|&e| e <= 1e-9));

    let eps = 1e-3;
    let (probes, noisy) = list_learn(&noisy_oracle(&k, eps, 6).unwrap(), (3, 0.5), 3000, Some(&k), &Constants::default(), 4)
        .unwrap();
    let errs = per_vertex_error(&probes.answers, &k).unwrap();
    for (&e, v) in errs.iter().zip(k.vertices().columns()) {
        let direct = probes
            .answers
            .columns()
            .map(|x| ((x[0] - v[0]).powi(2) + (x[1] - v[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(e, direct);
        assert!(e <= 0.5 * k.diameter() / 10.0);
    }
    assert_eq!(noisy.success, Some(true));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn probes_are_deterministic(seed in any::<u64>()) {
        let k = triangle();
        let o = noisy_oracle(&k, 0.05, 9).unwrap();
        let a = random_probes(&o, 40, 2, None, seed).unwrap();
        let b = random_probes(&o, 40, 2, None, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hausdorff_ignores_answer_order(seed in any::<u64>(), rot in 0usize..60) {
        let k = square();
        let o = noisy_oracle(&k, 0.05, 9).unwrap();
        let p = random_probes(&o, 60, 2, None, seed).unwrap();
        let order: Vec<usize> = (0..60).map(|i| (i + rot) % 60).rev().collect();
        let x = hull_hausdorff(&p.answers, &k).unwrap();
        let y = hull_hausdorff(&p.answers.select(&order), &k).unwrap();
        prop_assert!((x - y).abs() < 1e-7);
    }
}
