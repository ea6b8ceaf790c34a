use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};

/// An ordered point sample in ℝ^D, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Build from flat row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(ReachError::InvalidParameter("ambient dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(ReachError::Format(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(ReachError::NonFinite { point: pos / dim });
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(ReachError::Empty)?;
        let mut coords = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(ReachError::DimensionMismatch { expected: dim, found: row.len() });
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(dim, coords)
    }

    /// Two-dimensional convenience constructor.
    pub fn from_xy(points: &[(f64, f64)]) -> Result<Self> {
        Self::from_flat(2, points.iter().flat_map(|&(x, y)| [x, y]).collect())
    }

    pub fn empty(dim: usize) -> Self {
        PointCloud { dim, coords: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(ReachError::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        if !p.iter().all(|c| c.is_finite()) {
            return Err(ReachError::NonFinite { point: self.len() });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    /// New cloud holding the points at `ids`, in that order.
    pub fn select(&self, ids: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, coords }
    }

    /// Apply `f` to every point.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<PointCloud> {
        let rows: Vec<Vec<f64>> = self.points().map(&mut f).collect();
        if rows.is_empty() {
            return Ok(PointCloud::empty(self.dim));
        }
        Self::from_rows(&rows)
    }

    pub fn scaled(&self, s: f64) -> PointCloud {
        PointCloud { dim: self.dim, coords: self.coords.iter().map(|c| c * s).collect() }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(ReachError::DimensionMismatch { expected: self.dim, found });
        }
        Ok(())
    }

    /// Number of distinct points (exact coordinate equality).
    pub fn distinct_count(&self) -> usize {
        let mut rows: Vec<&[f64]> = self.points().collect();
        rows.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        rows.dedup();
        rows.len()
    }
}
