use std::collections::HashMap;

use super::{squared_distance, PointCloud};
use crate::error::{ReachError, Result};

/// Uniform hash grid over a [`PointCloud`].
///
/// Range queries visit the cells overlapping the query box; nearest-neighbor
/// queries grow Chebyshev rings of cells outward from the query cell.
#[derive(Debug, Clone)]
pub struct GridIndex<'a> {
    cloud: &'a PointCloud,
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl<'a> GridIndex<'a> {
    /// Grid with the given cell side.
    pub fn new(cloud: &'a PointCloud, cell: f64) -> Result<Self> {
        if !(cell.is_finite() && cell > 0.0) {
            return Err(ReachError::InvalidParameter(format!("grid cell side must be positive, got {cell}")));
        }
        let dim = cloud.ambient_dim();
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for (i, p) in cloud.points().enumerate() {
            let key = cell_key(p, cell);
            for d in 0..dim {
                lo[d] = lo[d].min(key[d]);
                hi[d] = hi[d].max(key[d]);
            }
            cells.entry(key).or_default().push(i);
        }
        Ok(GridIndex { cloud, cell, cells, lo, hi })
    }

    /// Grid whose cell side targets about one point per cell.
    pub fn auto(cloud: &'a PointCloud) -> Result<Self> {
        Self::new(cloud, auto_cell(cloud))
    }

    pub fn cloud(&self) -> &'a PointCloud {
        self.cloud
    }

    pub fn cell_side(&self) -> f64 {
        self.cell
    }

    /// Ids of all points with `‖p − q‖ ≤ radius`, ascending.
    pub fn range_query(&self, q: &[f64], radius: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_within(q, radius, |i, _| out.push(i))?;
        out.sort_unstable();
        Ok(out)
    }

    /// Calls `f(id, squared distance)` for every point within `radius` of `q`
    /// (closed ball). Visit order is unspecified.
    pub fn for_each_within(&self, q: &[f64], radius: f64, mut f: impl FnMut(usize, f64)) -> Result<()> {
        self.cloud.check_dim(q.len())?;
        if radius.is_nan() || radius < 0.0 {
            return Err(ReachError::InvalidParameter(format!("query radius must be nonnegative, got {radius}")));
        }
        let r2 = radius * radius;
        if self.cloud.is_empty() {
            return Ok(());
        }
        let dim = q.len();
        let mut from = Vec::with_capacity(dim);
        let mut to = Vec::with_capacity(dim);
        let mut volume: f64 = 1.0;
        for d in 0..dim {
            let a = (((q[d] - radius) / self.cell).floor() as i64).max(self.lo[d]);
            let b = (((q[d] + radius) / self.cell).floor() as i64).min(self.hi[d]);
            if a > b {
                return Ok(());
            }
            volume *= (b - a + 1) as f64;
            from.push(a);
            to.push(b);
        }
        if volume > self.cells.len() as f64 {
            // Query box covers more cells than are occupied: walk occupied cells.
            for ids in self.cells.values() {
                self.visit(ids, q, r2, &mut f);
            }
            return Ok(());
        }
        let mut key = from.clone();
        loop {
            if let Some(ids) = self.cells.get(&key[..]) {
                self.visit(ids, q, r2, &mut f);
            }
            if !odometer(&mut key, &from, &to) {
                break;
            }
        }
        Ok(())
    }

    fn visit(&self, ids: &[usize], q: &[f64], r2: f64, f: &mut impl FnMut(usize, f64)) {
        for &i in ids {
            let d2 = squared_distance(self.cloud.point(i), q);
            if d2 <= r2 {
                f(i, d2);
            }
        }
    }

    /// The `k` nearest points to `q`, as `(id, distance)` sorted by distance
    /// then id. `skip` filters out candidates (e.g. the query point itself).
    pub fn nearest(&self, q: &[f64], k: usize, skip: impl Fn(usize, f64) -> bool) -> Result<Vec<(usize, f64)>> {
        self.cloud.check_dim(q.len())?;
        let dim = q.len();
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        if k == 0 || self.cloud.is_empty() {
            return Ok(best);
        }
        let center: Vec<i64> = cell_key(q, self.cell);
        let max_ring = (0..dim)
            .map(|d| (center[d] - self.lo[d]).abs().max((self.hi[d] - center[d]).abs()))
            .max()
            .unwrap_or(0);
        let worst = |best: &Vec<(usize, f64)>| best.last().map_or(f64::INFINITY, |b| b.1);
        let mut offset = vec![0i64; dim];
        let mut key = vec![0i64; dim];
        for ring in 0..=max_ring {
            let from = vec![-ring; dim];
            let to = vec![ring; dim];
            offset.copy_from_slice(&from);
            loop {
                if offset.iter().any(|o| o.abs() == ring) {
                    for d in 0..dim {
                        key[d] = center[d] + offset[d];
                    }
                    if let Some(ids) = self.cells.get(&key[..]) {
                        for &i in ids {
                            let dist = squared_distance(self.cloud.point(i), q).sqrt();
                            if skip(i, dist) {
                                continue;
                            }
                            if best.len() < k || (dist, i) < (worst(&best), best[best.len() - 1].0) {
                                let pos = best.partition_point(|&(j, dj)| (dj, j) < (dist, i));
                                best.insert(pos, (i, dist));
                                best.truncate(k);
                            }
                        }
                    }
                }
                if !odometer(&mut offset, &from, &to) {
                    break;
                }
            }
            // Unvisited points lie outside the (2·ring+1)^D block around the
            // query cell, hence farther than ring·cell.
            if best.len() == k && worst(&best) <= ring as f64 * self.cell {
                break;
            }
        }
        Ok(best)
    }
}

fn cell_key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|c| (c / cell).floor() as i64).collect()
}

/// Advance a multi-index through the box `[from, to]`. False once exhausted.
fn odometer(key: &mut [i64], from: &[i64], to: &[i64]) -> bool {
    for d in 0..key.len() {
        if key[d] < to[d] {
            key[d] += 1;
            return true;
        }
        key[d] = from[d];
    }
    false
}

/// Cell side giving roughly one point per cell over the occupied extent.
pub(crate) fn auto_cell(cloud: &PointCloud) -> f64 {
    let n = cloud.len().max(1) as f64;
    let dim = cloud.ambient_dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in cloud.points() {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let extents: Vec<f64> = (0..dim).map(|d| hi[d] - lo[d]).filter(|e| *e > 0.0).collect();
    if extents.is_empty() {
        return 1.0;
    }
    let log_vol: f64 = extents.iter().map(|e| e.ln()).sum();
    ((log_vol - n.ln()) / extents.len() as f64).exp().max(f64::MIN_POSITIVE)
}
