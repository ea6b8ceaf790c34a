//! Graph-geodesic plug-in reach estimator.
//!
//! For a pair with chord `e` and graph distance `g`, the constraint
//! `g ≤ h(r) = 2κr·arcsin(e / 2r)` holds exactly on an interval
//! `(e/2, r*]` because `h` is strictly decreasing in `r`. The estimate is
//! therefore the smallest per-pair `r*` over all pairs of distinct points,
//! computed without any search over `r`.

use std::f64::consts::PI;
use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::geometry::{nn_statistic_with, squared_distance, PointCloud};
use crate::graph::{build_graph_with, GeodesicMatrix, NeighborhoodGraph};
use crate::inf_serde;
use crate::par::{self, Exec};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;

/// Largest `r` for which `g ≤ 2κr·arcsin(e/(2r))` holds; `+∞` when it holds
/// for every `r`, `e/2` when it fails for every `r > e/2`.
pub fn pair_critical_radius(chord: f64, graph: f64, inflation: f64, tol: f64) -> Result<f64> {
    if !(chord.is_finite() && chord > 0.0) {
        return Err(ReachError::InvalidParameter(format!("chord must be positive, got {chord}")));
    }
    if graph.is_nan() || graph < chord {
        return Err(ReachError::InconsistentPair { chord, graph });
    }
    if !(inflation.is_finite() && inflation >= 1.0) {
        return Err(ReachError::InvalidParameter(format!("inflation must be ≥ 1, got {inflation}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(ReachError::InvalidParameter(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    if graph <= inflation * chord {
        return Ok(f64::INFINITY);
    }
    if graph >= inflation * PI * chord / 2.0 {
        return Ok(chord / 2.0);
    }
    let h = |r: f64| 2.0 * inflation * r * (chord / (2.0 * r)).min(1.0).asin();

    let mut lo = chord / 2.0 * (1.0 + 1e-15);
    let mut hi = chord;
    let mut doublings = 0;
    while h(hi) > graph {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_ITERATIONS {
            return Err(ReachError::NoConvergence { iterations: doublings });
        }
    }
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= tol * lo {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if h(mid) > graph {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(ReachError::NoConvergence { iterations: MAX_ITERATIONS })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateWarning {
    /// The ε-graph has several components; cross pairs were treated as `g = +∞`.
    Disconnected { components: usize, pairs: usize },
    /// Pairs of coincident points were skipped.
    DuplicatePoints { pairs: usize },
    /// Bias correction needs a finite first-stage estimate.
    CorrectionUndefined,
}

impl fmt::Display for EstimateWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateWarning::Disconnected { components, pairs } => write!(
                f,
                "neighborhood graph has {components} components ({pairs} disconnected pairs); epsilon may be too small"
            ),
            EstimateWarning::DuplicatePoints { pairs } => write!(f, "skipped {pairs} zero-length pairs"),
            EstimateWarning::CorrectionUndefined => {
                write!(f, "first-stage estimate is infinite; bias correction not applied")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachEstimate {
    #[serde(with = "inf_serde")]
    pub value: f64,
    #[serde(rename = "epsilon")]
    pub epsilon_used: f64,
    /// κ = 1 + ε².
    pub inflation: f64,
    pub critical_pair: Option<[usize; 2]>,
    pub n_active_pairs: usize,
    pub warnings: Vec<EstimateWarning>,
}

impl ReachEstimate {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EstimatorOptions {
    pub exec: Exec,
    pub tolerance: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions { exec: Exec::default(), tolerance: DEFAULT_TOLERANCE }
    }
}

/// Estimate reach from `cloud` using the ε-graph geodesics and κ = 1 + ε².
pub fn estimate_reach(cloud: &PointCloud, epsilon: f64) -> Result<ReachEstimate> {
    estimate_reach_with(cloud, epsilon, EstimatorOptions::default())
}

pub fn estimate_reach_with(cloud: &PointCloud, epsilon: f64, opts: EstimatorOptions) -> Result<ReachEstimate> {
    check_distinct(cloud)?;
    let graph = build_graph_with(cloud, epsilon, opts.exec)?;
    estimate_on_graph(cloud, &graph, opts)
}

/// Estimate from an already-built graph over `cloud`.
pub fn estimate_on_graph(cloud: &PointCloud, graph: &NeighborhoodGraph, opts: EstimatorOptions) -> Result<ReachEstimate> {
    if graph.vertex_count() != cloud.len() {
        return Err(ReachError::LengthMismatch { left: cloud.len(), right: graph.vertex_count() });
    }
    let eps = graph.epsilon();
    let inflation = 1.0 + eps * eps;
    let scan = scan_pairs(cloud, inflation, opts, |i| graph.shortest_paths_from(i))?;
    let mut warnings = Vec::new();
    if !graph.is_connected() {
        let w = EstimateWarning::Disconnected {
            components: graph.component_count(),
            pairs: graph.disconnected_pairs(),
        };
        warn!("{w}");
        warnings.push(w);
    }
    Ok(scan.into_estimate(eps, inflation, warnings))
}

/// Estimate with a caller-supplied geodesic matrix in place of graph
/// distances (e.g. an exact manifold metric) and an explicit inflation.
pub fn estimate_with_geodesics(
    cloud: &PointCloud,
    geodesics: &GeodesicMatrix,
    epsilon: f64,
    inflation: f64,
    opts: EstimatorOptions,
) -> Result<ReachEstimate> {
    check_distinct(cloud)?;
    if geodesics.size() != cloud.len() {
        return Err(ReachError::LengthMismatch { left: cloud.len(), right: geodesics.size() });
    }
    let scan = scan_pairs(cloud, inflation, opts, |i| geodesics.row(i).to_vec())?;
    Ok(scan.into_estimate(epsilon, inflation, Vec::new()))
}

fn check_distinct(cloud: &PointCloud) -> Result<()> {
    if cloud.len() < 2 {
        return Err(ReachError::TooFewPoints { found: cloud.len(), required: 2 });
    }
    let distinct = cloud.distinct_count();
    if distinct < 2 {
        return Err(ReachError::TooFewPoints { found: distinct, required: 2 });
    }
    Ok(())
}

struct PairScan {
    best: Option<(f64, usize, usize)>,
    active: usize,
    duplicates: usize,
}

impl PairScan {
    fn into_estimate(self, epsilon: f64, inflation: f64, mut warnings: Vec<EstimateWarning>) -> ReachEstimate {
        if self.duplicates > 0 {
            let w = EstimateWarning::DuplicatePoints { pairs: self.duplicates };
            warn!("{w}");
            warnings.push(w);
        }
        let (value, critical_pair) = match self.best {
            Some((v, i, j)) => (v, Some([i, j])),
            None => (f64::INFINITY, None),
        };
        ReachEstimate { value, epsilon_used: epsilon, inflation, critical_pair, n_active_pairs: self.active, warnings }
    }
}

struct RowScan {
    best: Option<(f64, usize, usize)>,
    active: usize,
    duplicates: usize,
}

/// Minimum critical radius over all pairs `i < j`, row by row. Pairs with
/// `g ≤ κe` never bind. Every critical radius is at least `e/2`, so
/// candidates are visited by increasing chord and the scan stops once `e/2`
/// reaches the running minimum.
fn scan_pairs<F>(cloud: &PointCloud, inflation: f64, opts: EstimatorOptions, row: F) -> Result<PairScan>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    let n = cloud.len();
    let rows = par::map_range(opts.exec, n, |i| -> Result<RowScan> {
        let dist = row(i);
        let xi = cloud.point(i);
        let mut candidates: Vec<(f64, f64, usize)> = Vec::new();
        let mut duplicates = 0;
        for j in (i + 1)..n {
            let chord = squared_distance(xi, cloud.point(j)).sqrt();
            if chord == 0.0 {
                duplicates += 1;
                continue;
            }
            // A path is never shorter than the straight segment.
            let g = dist[j].max(chord);
            if g > inflation * chord {
                candidates.push((chord, g, j));
            }
        }
        let active = candidates.len();
        candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        let mut best: Option<(f64, usize, usize)> = None;
        for (chord, g, j) in candidates {
            let bound = best.map_or(f64::INFINITY, |b| b.0);
            if chord / 2.0 >= bound {
                break;
            }
            let r = pair_critical_radius(chord, g, inflation, opts.tolerance)?;
            if r < bound {
                best = Some((r, i, j));
            }
        }
        Ok(RowScan { best, active, duplicates })
    });
    let mut scan = PairScan { best: None, active: 0, duplicates: 0 };
    for r in rows {
        let r = r?;
        scan.active += r.active;
        scan.duplicates += r.duplicates;
        if let Some(b) = r.best {
            if scan.best.is_none_or(|s| b.0 < s.0) {
                scan.best = Some(b);
            }
        }
    }
    Ok(scan)
}

/// `√(max_i min_{j≠i} ‖X_i − X_j‖)`.
pub fn epsilon_nn(cloud: &PointCloud) -> Result<f64> {
    Ok(nn_statistic_with(cloud, Exec::default())?.sqrt())
}

/// Slowly diverging factor β_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaRule {
    Constant { value: f64 },
    /// `log log(max(n, 27))`.
    LogLog,
}

impl BetaRule {
    pub fn at(&self, n: f64) -> f64 {
        match *self {
            BetaRule::Constant { value } => value,
            BetaRule::LogLog => n.max(27.0).ln().ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonTheoryParams {
    pub c: f64,
    /// Standardness constant.
    pub eta: f64,
    /// Standardness radius; carried for the record only.
    pub lambda: f64,
    /// Dimension in the exponent: ambient `d`, or intrinsic `d′` for
    /// manifold-supported samples.
    pub dim: u32,
    pub beta: BetaRule,
}

impl EpsilonTheoryParams {
    pub fn new(c: f64, eta: f64, dim: u32) -> Self {
        EpsilonTheoryParams { c, eta, lambda: 1.0, dim, beta: BetaRule::LogLog }
    }

    /// Lower bound `(2 / (η ω_d))^{1/d}` that `c` must exceed.
    pub fn c_threshold(&self) -> f64 {
        (2.0 / (self.eta * unit_ball_volume(self.dim))).powf(1.0 / self.dim as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(ReachError::InvalidParameter("dimension must be ≥ 1".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(ReachError::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.c.is_finite() && self.c > self.c_threshold()) {
            return Err(ReachError::InvalidParameter(format!(
                "c = {} must exceed (2/(eta*omega_d))^(1/d) = {}",
                self.c,
                self.c_threshold()
            )));
        }
        if let BetaRule::Constant { value } = self.beta {
            if !(value.is_finite() && value > 0.0) {
                return Err(ReachError::InvalidParameter(format!("beta must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Volume of the unit ball in ℝ^d, via `ω_d = ω_{d−2}·2π/d`.
pub fn unit_ball_volume(dim: u32) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// `c·(log n / n)^{1/(3d)}·β_n`.
pub fn epsilon_theory(n: f64, params: &EpsilonTheoryParams) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(ReachError::InvalidParameter(format!("sample size must be ≥ 2, got {n}")));
    }
    params.validate()?;
    let rate = (n.ln() / n).powf(1.0 / (3.0 * params.dim as f64));
    Ok(params.c * rate * params.beta.at(n))
}

/// How ε is chosen for a given sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EpsilonRule {
    /// `multiplier · √(nn_statistic)`.
    NearestNeighbor { multiplier: f64 },
    Theory(EpsilonTheoryParams),
    Fixed { epsilon: f64 },
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule::NearestNeighbor { multiplier: 1.0 }
    }
}

impl EpsilonRule {
    pub fn epsilon(&self, cloud: &PointCloud) -> Result<f64> {
        match self {
            EpsilonRule::NearestNeighbor { multiplier } => {
                if !(multiplier.is_finite() && *multiplier > 0.0) {
                    return Err(ReachError::InvalidParameter(format!("multiplier must be positive, got {multiplier}")));
                }
                Ok(multiplier * epsilon_nn(cloud)?)
            }
            EpsilonRule::Theory(p) => epsilon_theory(cloud.len() as f64, p),
            EpsilonRule::Fixed { epsilon } => {
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(ReachError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
                }
                Ok(*epsilon)
            }
        }
    }
}
