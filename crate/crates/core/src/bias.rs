//! Split-sample bias correction.
//!
//! The sample is split into `X₁`, `X₂`. A first estimate `r₁` comes from `X₁`;
//! `X₂` then measures how often its pairs break the arc constraint at `r₁`
//! with the deflated factor `1 − ε₂²`, and the estimate is shrunk by
//! `max(1 − p̂, 1/2)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::estimator::{estimate_reach_with, EpsilonRule, EstimateWarning, EstimatorOptions, ReachEstimate};
use crate::geometry::{squared_distance, PointCloud};
use crate::graph::{build_graph_with, NeighborhoodGraph};
use crate::inf_serde;
use crate::par::{self, Exec};

pub const DEFAULT_SPLIT: f64 = 0.5;

/// Random partition of ids: `⌊fraction·n⌋` ids first, the rest second, each
/// part in ascending order.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(ReachError::InvalidParameter(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let n1 = (fraction * n as f64).floor() as usize;
    let n2 = n - n1;
    if n1 < 2 || n2 < 2 {
        return Err(ReachError::InvalidParameter(format!(
            "split of {n} points at {fraction} gives parts of {n1} and {n2}; both need at least 2"
        )));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let mut first = ids[..n1].to_vec();
    let mut second = ids[n1..].to_vec();
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

pub fn split_sample(cloud: &PointCloud, fraction: f64, seed: u64) -> Result<(PointCloud, PointCloud)> {
    let (a, b) = split_indices(cloud.len(), fraction, seed)?;
    Ok((cloud.select(&a), cloud.select(&b)))
}

/// Fraction of all `C(n₂, 2)` pairs with `‖Xᵢ − Xⱼ‖ < 2r₁` and
/// `d_G(Xᵢ, Xⱼ) > 2r₁(1 − ε₂²)·arcsin(‖Xᵢ − Xⱼ‖ / 2r₁)`.
pub fn violation_fraction(x2: &PointCloud, r1: f64, epsilon2: f64) -> Result<f64> {
    violation_fraction_with(x2, r1, epsilon2, Exec::default())
}

pub fn violation_fraction_with(x2: &PointCloud, r1: f64, epsilon2: f64, exec: Exec) -> Result<f64> {
    if !(r1.is_finite() && r1 > 0.0) {
        return Err(ReachError::InvalidParameter(format!("first-stage reach must be finite and positive, got {r1}")));
    }
    let graph = build_graph_with(x2, epsilon2, exec)?;
    Ok(violation_fraction_on_graph(x2, &graph, r1, exec))
}

pub fn violation_fraction_on_graph(x2: &PointCloud, graph: &NeighborhoodGraph, r1: f64, exec: Exec) -> f64 {
    let n = x2.len();
    let eps = graph.epsilon();
    let deflation = 1.0 - eps * eps;
    let limit = 2.0 * r1;
    let counts = par::map_range(exec, n, |i| {
        let xi = x2.point(i);
        let mut row: Option<Vec<f64>> = None;
        let mut count = 0usize;
        for j in (i + 1)..n {
            let chord = squared_distance(xi, x2.point(j)).sqrt();
            if chord >= limit {
                continue;
            }
            let dist = row.get_or_insert_with(|| graph.shortest_paths_from(i));
            let g = dist[j].max(chord);
            if g > limit * deflation * (chord / limit).asin() {
                count += 1;
            }
        }
        count
    });
    let total = n * (n - 1) / 2;
    counts.iter().sum::<usize>() as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCorrectedEstimate {
    pub r1: ReachEstimate,
    pub p_hat: f64,
    #[serde(with = "inf_serde")]
    pub value: f64,
    #[serde(rename = "seed")]
    pub split_seed: u64,
    pub sizes: [usize; 2],
    pub epsilon2: f64,
    pub warnings: Vec<EstimateWarning>,
}

impl BiasCorrectedEstimate {
    /// True when the first stage was infinite and no correction was applied.
    pub fn is_uncorrected(&self) -> bool {
        self.warnings.contains(&EstimateWarning::CorrectionUndefined)
    }
}

/// `max(1 − p̂, 1/2)·r₁`.
pub fn correction_factor(p_hat: f64) -> f64 {
    (1.0 - p_hat).max(0.5)
}

pub fn bias_corrected_reach(
    cloud: &PointCloud,
    fraction: f64,
    seed: u64,
    rule: &EpsilonRule,
) -> Result<BiasCorrectedEstimate> {
    bias_corrected_reach_with(cloud, fraction, seed, rule, EstimatorOptions::default())
}

pub fn bias_corrected_reach_with(
    cloud: &PointCloud,
    fraction: f64,
    seed: u64,
    rule: &EpsilonRule,
    opts: EstimatorOptions,
) -> Result<BiasCorrectedEstimate> {
    let (x1, x2) = split_sample(cloud, fraction, seed)?;
    let sizes = [x1.len(), x2.len()];
    let eps1 = rule.epsilon(&x1)?;
    let r1 = estimate_reach_with(&x1, eps1, opts)?;
    let eps2 = rule.epsilon(&x2)?;
    let mut warnings = r1.warnings.clone();
    if !r1.is_finite() {
        log::warn!("{}", EstimateWarning::CorrectionUndefined);
        warnings.push(EstimateWarning::CorrectionUndefined);
        let value = r1.value;
        return Ok(BiasCorrectedEstimate { r1, p_hat: 0.0, value, split_seed: seed, sizes, epsilon2: eps2, warnings });
    }
    let p_hat = violation_fraction_with(&x2, r1.value, eps2, opts.exec)?;
    let value = correction_factor(p_hat) * r1.value;
    Ok(BiasCorrectedEstimate { r1, p_hat, value, split_seed: seed, sizes, epsilon2: eps2, warnings })
}
