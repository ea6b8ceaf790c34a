//! Randomized properties, shared by the property suite and the acceptance
//! report so both run the same checks.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use reach_core::bias::{bias_corrected_reach, split_indices};
use reach_core::estimator::{estimate_with_geodesics, pair_critical_radius, EstimatorOptions, DEFAULT_TOLERANCE};
use reach_core::geometry::{hausdorff_distance, nn_statistic};
use reach_core::graph::{build_graph, graph_geodesics};
use reach_core::models::ManifoldModel;
use reach_core::tangent::{tangent_reach, TangentFrame};
use reach_core::{EpsilonRule, PointCloud};

pub const CASES: u32 = 1000;

pub fn xy_cloud(min: usize, max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), min..max).prop_map(|p| PointCloud::from_xy(&p).unwrap())
}

fn rel_le(a: f64, b: f64, rel: f64) -> bool {
    a <= b || a - b <= rel * b.abs()
}

pub fn monotone_radius((e, g, dg, k, dk): (f64, f64, f64, f64, f64)) -> Result<(), TestCaseError> {
    let g = e * g;
    let r = |g: f64, k: f64| pair_critical_radius(e, g, k, DEFAULT_TOLERANCE).unwrap();
    let base = r(g, k);
    prop_assert!(rel_le(r(g + dg * e, k), base, 1e-10), "not nonincreasing in g");
    prop_assert!(rel_le(base, r(g, k + dk), 1e-10), "not nondecreasing in kappa");
    prop_assert!(base >= e / 2.0);
    Ok(())
}

pub fn monotone_strategy() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (1e-3f64..10.0, 1.0f64..2.0, 0.0f64..0.6, 1.0f64..1.3, 0.0f64..0.3)
}

pub fn scale_equivariant((cloud, eps, s, kappa): (PointCloud, f64, f64, f64)) -> Result<(), TestCaseError> {
    let opts = EstimatorOptions::default();
    prop_assume!(cloud.distinct_count() == cloud.len());
    let geo = graph_geodesics(&build_graph(&cloud, eps).unwrap());
    let scaled = cloud.scaled(s);
    let geo_s = graph_geodesics(&build_graph(&scaled, eps * s).unwrap());
    // Skip clouds with an edge sitting on the ε boundary, where rounding
    // may flip it under scaling.
    for i in 0..cloud.len() {
        for j in 0..cloud.len() {
            prop_assume!(geo.get(i, j).is_finite() == geo_s.get(i, j).is_finite());
        }
    }
    let a = estimate_with_geodesics(&cloud, &geo, eps, kappa, opts).unwrap().value;
    let b = estimate_with_geodesics(&scaled, &geo_s, eps * s, kappa, opts).unwrap().value;
    if a.is_infinite() {
        prop_assert!(b.is_infinite());
    } else {
        prop_assert!((b - s * a).abs() <= 1e-9 * b.abs(), "{b} vs {}", s * a);
    }
    Ok(())
}

pub fn scale_strategy() -> impl Strategy<Value = (PointCloud, f64, f64, f64)> {
    (xy_cloud(3, 25), 0.3f64..2.0, 0.01f64..100.0, 1.0f64..1.5)
}

pub fn deterministic((model, n, seed, fraction): (usize, usize, u64, f64)) -> Result<(), TestCaseError> {
    let models = ["circle:R=1", "annulus:r=0.25", "half-ellipse"];
    let m: ManifoldModel = models[model].parse().unwrap();
    let a = m.sample_seeded(n, seed);
    prop_assert_eq!(&a, &m.sample_seeded(n, seed));
    prop_assert_eq!(split_indices(n, fraction, seed).unwrap(), split_indices(n, fraction, seed).unwrap());
    let rule = EpsilonRule::default();
    let x = bias_corrected_reach(&a, fraction, seed, &rule);
    let y = bias_corrected_reach(&a, fraction, seed, &rule);
    match (x, y) {
        (Ok(x), Ok(y)) => {
            prop_assert_eq!(&x, &y);
            if !x.is_uncorrected() {
                prop_assert!(x.value <= x.r1.value && x.value >= 0.5 * x.r1.value);
            }
        }
        (Err(x), Err(y)) => prop_assert_eq!(x.to_string(), y.to_string()),
        _ => prop_assert!(false, "outcomes differ"),
    }
    Ok(())
}

pub fn determinism_strategy() -> impl Strategy<Value = (usize, usize, u64, f64)> {
    (0usize..3, 8usize..40, any::<u64>(), 0.3f64..0.7)
}

pub fn hausdorff_metric((a, b, c, perm): (PointCloud, PointCloud, PointCloud, u64)) -> Result<(), TestCaseError> {
    let d = |x: &PointCloud, y: &PointCloud| hausdorff_distance(x, y).unwrap();
    let (ab, ba, bc, ac) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c));
    prop_assert_eq!(ab, ba);
    prop_assert!(ab >= 0.0);
    prop_assert_eq!(d(&a, &a), 0.0);
    prop_assert!(ac <= ab + bc + 1e-12, "triangle inequality");
    // Same set in another order is at distance zero.
    let mut ids: Vec<usize> = (0..a.len()).collect();
    ids.rotate_left(perm as usize % a.len());
    prop_assert_eq!(d(&a, &a.select(&ids)), 0.0);
    // A point absent from `a` makes the distance positive.
    let mut bigger = a.clone();
    bigger.push(&[5.0, 5.0]).unwrap();
    prop_assert!(d(&a, &bigger) > 0.0);
    Ok(())
}

pub fn hausdorff_strategy() -> impl Strategy<Value = (PointCloud, PointCloud, PointCloud, u64)> {
    (xy_cloud(1, 20), xy_cloud(1, 20), xy_cloud(1, 20), any::<u64>())
}

fn rotate(p: &[f64], theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

pub fn rigid_invariance((cloud, theta, tx, ty, delta): (PointCloud, f64, f64, f64, f64)) -> Result<(), TestCaseError> {
    prop_assume!(cloud.distinct_count() >= 2);
    let moved = cloud
        .map_points(|p| {
            let q = rotate(p, theta);
            vec![q[0] + tx, q[1] + ty]
        })
        .unwrap();
    let a = nn_statistic(&cloud).unwrap();
    let b = nn_statistic(&moved).unwrap();
    prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    let mut rev: Vec<usize> = (0..cloud.len()).collect();
    rev.reverse();
    prop_assert_eq!(nn_statistic(&cloud.select(&rev)).unwrap(), a);

    // Tangent lines along the x axis, carried along by the same motion.
    let frames: Vec<TangentFrame> =
        cloud.points().map(|p| TangentFrame::from_direction(p.to_vec(), &[1.0, 0.0]).unwrap()).collect();
    let moved_frames: Vec<TangentFrame> = moved
        .points()
        .map(|p| TangentFrame::from_direction(p.to_vec(), &rotate(&[1.0, 0.0], theta)).unwrap())
        .collect();
    let t = tangent_reach(&cloud, &frames, delta).unwrap();
    let u = tangent_reach(&moved, &moved_frames, delta).unwrap();
    if t.is_finite() && t < 1e6 {
        prop_assert!((t - u).abs() <= 1e-6 * t.max(1e-3), "{t} vs {u}");
    }
    Ok(())
}

pub fn rigid_strategy() -> impl Strategy<Value = (PointCloud, f64, f64, f64, f64)> {
    (xy_cloud(2, 30), 0.0f64..std::f64::consts::TAU, -10.0f64..10.0, -10.0f64..10.0, 0.0f64..0.5)
}

pub fn chord_below_graph((cloud, eps): (PointCloud, f64)) -> Result<(), TestCaseError> {
    let m = graph_geodesics(&build_graph(&cloud, eps).unwrap());
    for i in 0..cloud.len() {
        for j in 0..cloud.len() {
            let chord = super::dist(cloud.point(i), cloud.point(j));
            prop_assert!(chord <= m.get(i, j) * (1.0 + 1e-12) + 1e-15);
        }
    }
    Ok(())
}

pub fn chord_strategy() -> impl Strategy<Value = (PointCloud, f64)> {
    (xy_cloud(2, 30), 0.1f64..2.0)
}

/// Run `test` over `CASES` cases; `Err` carries the minimal failing input.
pub fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}
