//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod props;

use reach_core::PointCloud;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Dense adjacency of the closed-ball ε-graph, `INFINITY` for non-edges.
pub fn brute_adjacency(cloud: &PointCloud, eps: f64) -> Vec<Vec<f64>> {
    let n = cloud.len();
    let mut w = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        w[i][i] = 0.0;
        for j in 0..n {
            let a = cloud.point(i);
            let b = cloud.point(j);
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            if i != j && d2 <= eps * eps {
                w[i][j] = d2.sqrt();
            }
        }
    }
    w
}

pub fn floyd_warshall(mut d: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = d.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Shortest path by enumerating every simple path (tiny graphs only).
pub fn enumerate_paths(w: &[Vec<f64>], s: usize, t: usize) -> f64 {
    fn go(w: &[Vec<f64>], u: usize, t: usize, seen: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if u == t {
            *best = best.min(acc);
            return;
        }
        for v in 0..w.len() {
            if !seen[v] && v != u && w[u][v].is_finite() {
                seen[v] = true;
                go(w, v, t, seen, acc + w[u][v], best);
                seen[v] = false;
            }
        }
    }
    let mut seen = vec![false; w.len()];
    seen[s] = true;
    let mut best = f64::INFINITY;
    go(w, s, t, &mut seen, 0.0, &mut best);
    best
}

/// Critical radius solved in `x = e/2r` space: `arcsin(x)/x = g/(κe)` on
/// `(0, 1]`, with the left side increasing from 1 to π/2.
pub fn oracle_radius(chord: f64, graph: f64, inflation: f64) -> f64 {
    let t = graph / (inflation * chord);
    if t <= 1.0 {
        return f64::INFINITY;
    }
    if t >= std::f64::consts::FRAC_PI_2 {
        return chord / 2.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = if mid == 0.0 { 1.0 } else { mid.asin() / mid };
        if f < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    chord / (2.0 * 0.5 * (lo + hi))
}

/// Minimum over all pairs of [`oracle_radius`], with `g` clamped below by
/// the chord and duplicates skipped.
pub fn brute_estimate(cloud: &PointCloud, geo: &[Vec<f64>], inflation: f64) -> f64 {
    let n = cloud.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = dist(cloud.point(i), cloud.point(j));
            if e == 0.0 {
                continue;
            }
            best = best.min(oracle_radius(e, geo[i][j].max(e), inflation));
        }
    }
    best
}

pub fn brute_violations(cloud: &PointCloud, geo: &[Vec<f64>], r1: f64, eps2: f64) -> f64 {
    let n = cloud.len();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = dist(cloud.point(i), cloud.point(j));
            if e < 2.0 * r1 && geo[i][j].max(e) > 2.0 * r1 * (1.0 - eps2 * eps2) * (e / (2.0 * r1)).asin() {
                count += 1;
            }
        }
    }
    count as f64 / (n * (n - 1) / 2) as f64
}

pub fn brute_hausdorff(a: &PointCloud, b: &PointCloud) -> f64 {
    let directed = |a: &PointCloud, b: &PointCloud| {
        a.points()
            .map(|p| b.points().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

pub fn brute_nn_statistic(cloud: &PointCloud) -> f64 {
    cloud
        .points()
        .map(|p| cloud.points().map(|q| dist(p, q)).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Deterministic points jittered around n equally spaced angles on a circle.
pub fn jittered_circle(radius: f64, n: usize, jitter: f64, seed: u64) -> PointCloud {
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let step = std::f64::consts::TAU / n as f64;
    let rows: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = step * (i as f64 + jitter * (next() - 0.5));
            (radius * t.cos(), radius * t.sin())
        })
        .collect();
    PointCloud::from_xy(&rows).unwrap()
}
