//! Tangent-space comparison estimator and local-PCA tangent estimation.
//!
//! `r̃ = inf_{i ≠ j} ‖Xⱼ − Xᵢ‖² / (2·dist(Xⱼ − Xᵢ, Tᵢ))` over ordered pairs,
//! where `Tᵢ` is a tangent frame at `Xᵢ`, given either by an oracle or by
//! local principal components.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{ReachError, Result};
use crate::geometry::{squared_distance, GridIndex, PointCloud};
use crate::par::{self, Exec};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Orthonormal basis of an affine tangent estimate through `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    base: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl TangentFrame {
    pub fn new(base: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        let dim = base.len();
        if basis.is_empty() || basis.len() >= dim {
            return Err(ReachError::InvalidParameter(format!(
                "tangent dimension {} must lie in [1, {})",
                basis.len(),
                dim
            )));
        }
        for b in &basis {
            if b.len() != dim {
                return Err(ReachError::DimensionMismatch { expected: dim, found: b.len() });
            }
        }
        for (a, u) in basis.iter().enumerate() {
            for (b, v) in basis.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                if (dot(u, v) - target).abs() > ORTHONORMAL_TOL {
                    return Err(ReachError::InvalidParameter("tangent basis is not orthonormal".into()));
                }
            }
        }
        Ok(TangentFrame { base, basis })
    }

    /// One-dimensional frame along `direction` (normalized here).
    pub fn from_direction(base: Vec<f64>, direction: &[f64]) -> Result<Self> {
        let norm = dot(direction, direction).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(ReachError::InvalidParameter("zero tangent direction".into()));
        }
        Self::new(base, vec![direction.iter().map(|c| c / norm).collect()])
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.basis.len()
    }

    /// `P = B Bᵀ`.
    pub fn projection_matrix(&self) -> DMatrix<f64> {
        let dim = self.ambient_dim();
        DMatrix::from_fn(dim, dim, |r, c| self.basis.iter().map(|b| b[r] * b[c]).sum())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖v − Πv‖` with `Π` the orthogonal projection onto the frame's span.
pub fn subspace_distance(v: &[f64], frame: &TangentFrame) -> Result<f64> {
    if v.len() != frame.ambient_dim() {
        return Err(ReachError::DimensionMismatch { expected: frame.ambient_dim(), found: v.len() });
    }
    Ok(residual_norm(v, frame))
}

fn residual_norm(v: &[f64], frame: &TangentFrame) -> f64 {
    let mut r = v.to_vec();
    for b in &frame.basis {
        let c = dot(v, b);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= c * bi;
        }
    }
    dot(&r, &r).sqrt()
}

/// `⌈5 log n⌉ ∨ (d′ + 2)`.
pub fn default_neighbor_count(n: usize, intrinsic_dim: usize) -> usize {
    ((5.0 * (n as f64).ln()).ceil() as usize).max(intrinsic_dim + 2)
}

/// Tangent frame at point `i` from the top-`d′` principal directions of its
/// `k` nearest neighbors (excluding `i`), centered on their mean.
pub fn local_pca_tangent(cloud: &PointCloud, i: usize, k: usize, intrinsic_dim: usize) -> Result<TangentFrame> {
    let index = GridIndex::auto(cloud)?;
    local_pca_tangent_indexed(&index, i, k, intrinsic_dim)
}

pub fn local_pca_tangent_indexed(index: &GridIndex<'_>, i: usize, k: usize, intrinsic_dim: usize) -> Result<TangentFrame> {
    let cloud = index.cloud();
    let dim = cloud.ambient_dim();
    if intrinsic_dim < 1 || intrinsic_dim >= dim {
        return Err(ReachError::InvalidParameter(format!(
            "intrinsic dimension {intrinsic_dim} must lie in [1, {dim})"
        )));
    }
    if k < intrinsic_dim + 1 {
        return Err(ReachError::InvalidParameter(format!("need k ≥ {} neighbors, got {k}", intrinsic_dim + 1)));
    }
    if cloud.len() <= k {
        return Err(ReachError::TooFewPoints { found: cloud.len(), required: k + 1 });
    }
    let neighbors = index.nearest(cloud.point(i), k, |j, _| j == i)?;
    let mut mean = DVector::<f64>::zeros(dim);
    for &(j, _) in &neighbors {
        mean += DVector::from_column_slice(cloud.point(j));
    }
    mean /= k as f64;
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for &(j, _) in &neighbors {
        let x = DVector::from_column_slice(cloud.point(j)) - &mean;
        cov += &x * x.transpose();
    }
    cov /= k as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    let cutoff = eig.eigenvalues[order[intrinsic_dim - 1]];
    if !(top > 0.0) || cutoff <= 1e-12 * top {
        return Err(ReachError::DegenerateNeighborhood { point: i, dim: intrinsic_dim });
    }
    let basis = order[..intrinsic_dim]
        .iter()
        .map(|&c| {
            let v = eig.eigenvectors.column(c);
            let norm = v.norm();
            v.iter().map(|x| x / norm).collect()
        })
        .collect();
    TangentFrame::new(cloud.point(i).to_vec(), basis)
}

/// Local-PCA frames at every point.
pub fn local_pca_frames(cloud: &PointCloud, k: usize, intrinsic_dim: usize, exec: Exec) -> Result<Vec<TangentFrame>> {
    let index = GridIndex::auto(cloud)?;
    par::map_range(exec, cloud.len(), |i| local_pca_tangent_indexed(&index, i, k, intrinsic_dim))
        .into_iter()
        .collect()
}

/// Infimum over ordered pairs `(i, j)`, `i ≠ j`, `‖Xⱼ − Xᵢ‖ ≥ δ`, of
/// `‖Xⱼ − Xᵢ‖² / (2·dist(Xⱼ − Xᵢ, Tᵢ))`. Pairs with zero denominator are
/// skipped; `+∞` when none remain.
pub fn tangent_reach(cloud: &PointCloud, frames: &[TangentFrame], delta: f64) -> Result<f64> {
    tangent_reach_with(cloud, frames, delta, Exec::default())
}

pub fn tangent_reach_with(cloud: &PointCloud, frames: &[TangentFrame], delta: f64, exec: Exec) -> Result<f64> {
    if frames.len() != cloud.len() {
        return Err(ReachError::LengthMismatch { left: cloud.len(), right: frames.len() });
    }
    if !(delta >= 0.0) {
        return Err(ReachError::InvalidParameter(format!("delta must be nonnegative, got {delta}")));
    }
    if let Some(f) = frames.iter().find(|f| f.ambient_dim() != cloud.ambient_dim()) {
        return Err(ReachError::DimensionMismatch { expected: cloud.ambient_dim(), found: f.ambient_dim() });
    }
    let n = cloud.len();
    let d2_min = delta * delta;
    let rows = par::map_range(exec, n, |i| {
        let xi = cloud.point(i);
        let mut v = vec![0.0; xi.len()];
        let mut best = f64::INFINITY;
        for j in (0..n).filter(|&j| j != i) {
            let xj = cloud.point(j);
            let e2 = squared_distance(xi, xj);
            if e2 < d2_min {
                continue;
            }
            for (vk, (a, b)) in v.iter_mut().zip(xj.iter().zip(xi)) {
                *vk = a - b;
            }
            let normal = residual_norm(&v, &frames[i]);
            if normal > 0.0 {
                best = best.min(e2 / (2.0 * normal));
            }
        }
        best
    });
    Ok(rows.into_iter().fold(f64::INFINITY, f64::min))
}

/// `δ = c_δ·log(n)/n`.
pub fn default_delta(n: usize, c_delta: f64) -> f64 {
    c_delta * (n as f64).ln() / n as f64
}

/// Spectral norm of a symmetric matrix by power iteration on `M²`, started
/// from every coordinate axis.
pub fn symmetric_operator_norm(m: &DMatrix<f64>, tol: f64) -> f64 {
    let dim = m.nrows();
    let sq = m * m;
    let mut best: f64 = 0.0;
    for start in 0..dim {
        let mut v = DVector::<f64>::zeros(dim);
        v[start] = 1.0;
        let mut lambda = 0.0;
        for _ in 0..10_000 {
            let w = &sq * &v;
            let norm = w.norm();
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            let next = v.dot(&w);
            v = w / norm;
            if (next - lambda).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        best = best.max(lambda.max(0.0).sqrt());
    }
    best
}

/// `max_i ‖P(Tᵢ) − P(Ŝᵢ)‖_op` over matched frames.
pub fn tangent_error(true_frames: &[TangentFrame], est_frames: &[TangentFrame]) -> Result<f64> {
    if true_frames.len() != est_frames.len() {
        return Err(ReachError::LengthMismatch { left: true_frames.len(), right: est_frames.len() });
    }
    let mut worst: f64 = 0.0;
    for (a, b) in true_frames.iter().zip(est_frames) {
        if a.ambient_dim() != b.ambient_dim() {
            return Err(ReachError::DimensionMismatch { expected: a.ambient_dim(), found: b.ambient_dim() });
        }
        let diff = a.projection_matrix() - b.projection_matrix();
        worst = worst.max(symmetric_operator_norm(&diff, 1e-10));
    }
    Ok(worst)
}

/// CSV with one row per frame: `id`, then the basis vectors row-major.
pub fn write_frames_csv<W: Write>(frames: &[TangentFrame], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    if let Some(f) = frames.first() {
        let mut header = vec!["id".to_string()];
        for b in 0..f.intrinsic_dim() {
            for d in 0..f.ambient_dim() {
                header.push(format!("b{b}_x{d}"));
            }
        }
        wtr.write_record(&header)?;
    }
    for (i, f) in frames.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(f.basis().iter().flatten().map(|c| format!("{c:?}")));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}
