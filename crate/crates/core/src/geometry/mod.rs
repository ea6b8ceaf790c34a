//! Euclidean primitives, the grid index, and point-set distances.

mod cloud;
mod index;
pub mod io;

pub use cloud::PointCloud;
pub use index::GridIndex;

use crate::error::{ReachError, Result};
use crate::par::{self, Exec};

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `‖a − b‖`.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ReachError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(squared_distance(a, b).sqrt())
}

/// `d(q, B) = min_{b ∈ B} ‖q − b‖` through an index over `B`.
pub fn distance_to_set(q: &[f64], index: &GridIndex<'_>) -> Result<f64> {
    Ok(index.nearest(q, 1, |_, _| false)?.first().map_or(f64::INFINITY, |p| p.1))
}

/// One-sided term `max_{a ∈ A} d(a, B)`.
pub fn directed_hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    directed_hausdorff_with(a, b, Exec::default())
}

pub fn directed_hausdorff_with(a: &PointCloud, b: &PointCloud, exec: Exec) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(ReachError::Empty);
    }
    b.check_dim(a.ambient_dim())?;
    let index = GridIndex::auto(b)?;
    let dists = par::map_range(exec, a.len(), |i| distance_to_set(a.point(i), &index));
    let mut worst: f64 = 0.0;
    for d in dists {
        worst = worst.max(d?);
    }
    Ok(worst)
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// `max_i min_{j ≠ i} ‖X_i − X_j‖`, ignoring coincident copies of `X_i`.
pub fn nn_statistic(cloud: &PointCloud) -> Result<f64> {
    nn_statistic_with(cloud, Exec::default())
}

pub fn nn_statistic_with(cloud: &PointCloud, exec: Exec) -> Result<f64> {
    if cloud.len() < 2 {
        return Err(ReachError::TooFewPoints { found: cloud.len(), required: 2 });
    }
    let index = GridIndex::auto(cloud)?;
    let nearest = par::map_range(exec, cloud.len(), |i| {
        index
            .nearest(cloud.point(i), 1, |_, d| d == 0.0)
            .map(|v| v.first().map(|p| p.1))
    });
    let mut worst: f64 = 0.0;
    for d in nearest {
        match d? {
            Some(d) => worst = worst.max(d),
            None => return Err(ReachError::TooFewPoints { found: 1, required: 2 }),
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_flat(1, xs.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean_distance(&[0.7, -2.0], &[0.7, -2.0]).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 2.0);
        assert!(euclidean_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_distance(&line(&[0.0]), &line(&[1.0])).unwrap(), 1.0);
        let a = PointCloud::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let b = PointCloud::from_xy(&[(0.0, 0.0)]).unwrap();
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
        assert!(matches!(hausdorff_distance(&a, &PointCloud::empty(2)), Err(ReachError::Empty)));
    }

    #[test]
    fn nn_statistic_examples() {
        assert_eq!(nn_statistic(&line(&[0.0, 1.0, 2.0])).unwrap(), 1.0);
        assert_eq!(nn_statistic(&line(&[0.0, 1.0, 3.0])).unwrap(), 2.0);
        assert!(nn_statistic(&line(&[0.0])).is_err());
        // duplicates are not neighbors of each other
        assert_eq!(nn_statistic(&line(&[0.0, 0.0, 1.0])).unwrap(), 1.0);
        assert!(nn_statistic(&line(&[2.0, 2.0])).is_err());
    }
}
