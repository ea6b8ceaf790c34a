//! The ε-neighborhood graph on a sample and its shortest-path metric.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use crate::error::{ReachError, Result};
use crate::geometry::{euclidean_distance, GridIndex, PointCloud};
use crate::par::{self, Exec};

/// Graph with an edge between every pair of distinct ids at distance `≤ ε`,
/// weighted by that distance. Adjacency is stored in CSR form.
#[derive(Debug, Clone)]
pub struct NeighborhoodGraph {
    epsilon: f64,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    lengths: Vec<f64>,
    components: Vec<usize>,
    component_count: usize,
}

pub fn build_graph(cloud: &PointCloud, epsilon: f64) -> Result<NeighborhoodGraph> {
    build_graph_with(cloud, epsilon, Exec::default())
}

pub fn build_graph_with(cloud: &PointCloud, epsilon: f64, exec: Exec) -> Result<NeighborhoodGraph> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ReachError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if cloud.len() < 2 {
        return Err(ReachError::TooFewPoints { found: cloud.len(), required: 2 });
    }
    if cloud.len() > u32::MAX as usize {
        return Err(ReachError::InvalidParameter("too many points for u32 vertex ids".into()));
    }
    let index = GridIndex::new(cloud, epsilon)?;
    let lists = par::map_range(exec, cloud.len(), |i| {
        let mut nb: Vec<(u32, f64)> = Vec::new();
        index
            .for_each_within(cloud.point(i), epsilon, |j, d2| {
                if j != i {
                    nb.push((j as u32, d2.sqrt()));
                }
            })
            .map(|_| {
                nb.sort_unstable_by_key(|e| e.0);
                nb
            })
    });
    let mut offsets = Vec::with_capacity(cloud.len() + 1);
    offsets.push(0);
    let mut targets = Vec::new();
    let mut lengths = Vec::new();
    for nb in lists {
        for (j, len) in nb? {
            targets.push(j);
            lengths.push(len);
        }
        offsets.push(targets.len());
    }
    let (components, component_count) = label_components(&offsets, &targets);
    Ok(NeighborhoodGraph { epsilon, offsets, targets, lengths, components, component_count })
}

fn label_components(offsets: &[usize], targets: &[u32]) -> (Vec<usize>, usize) {
    let n = offsets.len() - 1;
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = count;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in &targets[offsets[u]..offsets[u + 1]] {
                let v = v as usize;
                if label[v] == usize::MAX {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

#[derive(Clone, Copy)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // min-heap on distance
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl NeighborhoodGraph {
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// `(neighbor, edge length)` pairs of `i`, ascending by neighbor id.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.targets[r.clone()].iter().map(|&j| j as usize).zip(self.lengths[r].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn component(&self, i: usize) -> usize {
        self.components[i]
    }

    pub fn component_labels(&self) -> &[usize] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count == 1
    }

    /// Number of unordered vertex pairs lying in different components.
    pub fn disconnected_pairs(&self) -> usize {
        let mut sizes = vec![0usize; self.component_count];
        for &c in &self.components {
            sizes[c] += 1;
        }
        let n = self.vertex_count();
        let same: usize = sizes.iter().map(|s| s * s.saturating_sub(1) / 2).sum();
        n * (n - 1) / 2 - same
    }

    /// Single-source shortest paths; `+∞` for unreachable vertices.
    pub fn shortest_paths_from(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        dist[source] = 0.0;
        self.relax_from(&mut dist, &[(source, 0.0)]);
        dist
    }

    /// Label-setting search from several seeded vertices. `dist` must hold
    /// the seed distances (and `+∞` elsewhere).
    fn relax_from(&self, dist: &mut [f64], seeds: &[(usize, f64)]) {
        let mut heap: BinaryHeap<HeapEntry> =
            seeds.iter().map(|&(node, dist)| HeapEntry { dist, node: node as u32 }).collect();
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            let u = node as usize;
            if d > dist[u] {
                continue;
            }
            let (lo, hi) = (self.offsets[u], self.offsets[u + 1]);
            for (&v, &w) in self.targets[lo..hi].iter().zip(&self.lengths[lo..hi]) {
                let nd = d + w;
                let slot = &mut dist[v as usize];
                if nd < *slot {
                    *slot = nd;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
    }

    pub fn write_edge_list<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["i", "j", "length"])?;
        for i in 0..self.vertex_count() {
            for (j, len) in self.neighbors(i).filter(|&(j, _)| j > i) {
                wtr.write_record([i.to_string(), j.to_string(), format!("{len:?}")])?;
            }
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Dense symmetric matrix of graph distances, `+∞` across components.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GeodesicMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Wrap a precomputed matrix (e.g. an oracle metric).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        GeodesicMatrix { n, data }
    }
}

/// All-pairs graph geodesics, one label-setting run per source.
pub fn graph_geodesics(g: &NeighborhoodGraph) -> GeodesicMatrix {
    graph_geodesics_with(g, Exec::default())
}

pub fn graph_geodesics_with(g: &NeighborhoodGraph, exec: Exec) -> GeodesicMatrix {
    let n = g.vertex_count();
    let rows = par::map_range(exec, n, |s| g.shortest_paths_from(s));
    GeodesicMatrix { n, data: rows.concat() }
}

/// Geodesic rows for the requested sources only, in the given order.
pub fn geodesic_rows(g: &NeighborhoodGraph, sources: &[usize], exec: Exec) -> Vec<Vec<f64>> {
    par::map_slice(exec, sources, |&s| g.shortest_paths_from(s))
}

/// Graph distance between arbitrary points `x`, `y`, treating them as extra
/// vertices joined to the sample by the same ε rule (and to each other when
/// `‖x − y‖ ≤ ε`).
pub fn augmented_geodesic(g: &NeighborhoodGraph, cloud: &PointCloud, x: &[f64], y: &[f64]) -> Result<f64> {
    let index = GridIndex::new(cloud, g.epsilon())?;
    augmented_geodesic_indexed(g, &index, x, y)
}

/// As [`augmented_geodesic`], reusing an index over the graph's cloud.
pub fn augmented_geodesic_indexed(g: &NeighborhoodGraph, index: &GridIndex<'_>, x: &[f64], y: &[f64]) -> Result<f64> {
    let cloud = index.cloud();
    if cloud.len() != g.vertex_count() {
        return Err(ReachError::LengthMismatch { left: cloud.len(), right: g.vertex_count() });
    }
    let eps = g.epsilon();
    let direct = euclidean_distance(x, y)?;
    cloud.check_dim(x.len())?;
    let mut best = if direct <= eps { direct } else { f64::INFINITY };

    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let mut seeds = Vec::new();
    index.for_each_within(x, eps, |j, d2| {
        let d = d2.sqrt();
        if d < dist[j] {
            dist[j] = d;
            seeds.push((j, d));
        }
    })?;
    g.relax_from(&mut dist, &seeds);
    index.for_each_within(y, eps, |k, d2| {
        best = best.min(dist[k] + d2.sqrt());
    })?;
    Ok(best)
}
