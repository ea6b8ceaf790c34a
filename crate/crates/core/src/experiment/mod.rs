//! Replicated simulation studies on the model shapes.
//!
//! Each `(model, n)` cell draws `replicates` independent samples, each from
//! its own ChaCha20 stream keyed by the master seed, runs the requested
//! estimators, and stores every replicate value in replicate order.

mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bias::{bias_corrected_reach_with, DEFAULT_SPLIT};
use crate::error::{ReachError, Result};
use crate::estimator::{estimate_reach_with, EpsilonRule, EstimatorOptions};
use crate::inf_serde;
use crate::models::{stream_rng, ManifoldModel};
use crate::par::{self, Exec};
use crate::stats::Summary;
use crate::tangent::{default_delta, default_neighbor_count, local_pca_frames, tangent_error, tangent_reach_with};

pub use report::{
    emit_report, write_boxplot_svg, write_replicates_csv, write_summary_csv, write_table1_csv, ReportFormat,
};

pub const EPSILON_SERIES: &str = "epsilon";
pub const TANGENT_ERROR_SERIES: &str = "tangent-error";
pub const SD_CONVENTION: &str = "sample standard deviation (divisor n-1)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Graph-geodesic plug-in estimate r̂.
    Plain,
    /// Split-sample corrected r̂.
    BiasCorrected,
    /// Tangent comparison estimate with analytic tangents.
    TangentOracle,
    /// Tangent comparison estimate with local-PCA tangents (r̃).
    TangentPca,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Plain => "plain",
            EstimatorKind::BiasCorrected => "bias-corrected",
            EstimatorKind::TangentOracle => "tangent-oracle",
            EstimatorKind::TangentPca => "tangent-pca",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Self::Plain, Self::BiasCorrected, Self::TangentOracle, Self::TangentPca]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ReachError::Config(format!("unknown estimator `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub models: Vec<String>,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub epsilon: EpsilonRule,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
    pub split: f64,
    /// δ = `delta_c`·log(n)/n for the tangent estimators.
    pub delta_c: f64,
    /// PCA neighbor count; `None` uses the `⌈5 log n⌉` default.
    pub pca_neighbors: Option<usize>,
}

impl ExperimentConfig {
    /// Annulus study: r ∈ {0.25, 0.5}, n ∈ {500, …, 1500}, 100 replicates.
    pub fn table1() -> Self {
        ExperimentConfig {
            models: vec!["annulus:r=0.25".into(), "annulus:r=0.5".into()],
            sizes: vec![500, 750, 1000, 1250, 1500],
            replicates: 100,
            epsilon: EpsilonRule::default(),
            estimators: vec![EstimatorKind::Plain],
            seed: 2023,
            split: DEFAULT_SPLIT,
            delta_c: 1.0,
            pca_neighbors: None,
        }
    }

    /// Half-ellipse comparison: n ∈ {400, 600}, 100 replicates.
    pub fn ellipse() -> Self {
        ExperimentConfig {
            models: vec!["half-ellipse".into()],
            sizes: vec![400, 600],
            estimators: vec![EstimatorKind::TangentPca, EstimatorKind::Plain, EstimatorKind::BiasCorrected],
            ..Self::table1()
        }
    }

    pub fn parsed_models(&self) -> Result<Vec<ManifoldModel>> {
        self.models.iter().map(|m| m.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(ReachError::Config("replicate count must be at least 1".into()));
        }
        if self.models.is_empty() || self.sizes.is_empty() || self.estimators.is_empty() {
            return Err(ReachError::Config("models, sizes and estimators must be non-empty".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 4) {
            return Err(ReachError::Config(format!("sample size {n} is too small")));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(ReachError::Config(format!("split fraction {} outside (0, 1)", self.split)));
        }
        if !(self.delta_c >= 0.0) {
            return Err(ReachError::Config(format!("delta constant {} must be nonnegative", self.delta_c)));
        }
        if let EpsilonRule::Theory(p) = &self.epsilon {
            p.validate().map_err(|e| ReachError::Config(e.to_string()))?;
        }
        for model in self.parsed_models()? {
            let tangent = self
                .estimators
                .iter()
                .any(|k| matches!(k, EstimatorKind::TangentOracle | EstimatorKind::TangentPca));
            if tangent && model.intrinsic_dim().is_none() {
                return Err(ReachError::Config(format!("tangent estimators need a curve model, got {model}")));
            }
        }
        Ok(())
    }
}

/// All replicate values of one statistic in one `(model, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub model: String,
    pub n: usize,
    pub estimator: String,
    #[serde(with = "inf_serde::vec")]
    pub values: Vec<f64>,
}

impl Series {
    pub fn summary(&self) -> Summary {
        Summary::of(&self.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub sd_convention: String,
    pub series: Vec<Series>,
    pub warnings: usize,
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn series(&self, model: &str, n: usize, estimator: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.model == model && s.n == n && s.estimator == estimator)
    }
}

struct Replicate {
    epsilon: f64,
    values: Vec<f64>,
    tangent_error: Option<f64>,
    warnings: usize,
}

/// Master-seed mixing for one `(model, n)` cell.
fn cell_seed(master: u64, model_index: usize, n: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ ((model_index as u64) << 48) ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_replicate(config: &ExperimentConfig, model: &ManifoldModel, n: usize, seed: u64, rep: usize) -> Result<Replicate> {
    use rand::Rng;
    let mut rng = stream_rng(seed, rep as u64);
    let cloud = model.sample(n, &mut rng);
    let split_seed: u64 = rng.random();
    let opts = EstimatorOptions { exec: Exec::Sequential, ..Default::default() };
    let epsilon = config.epsilon.epsilon(&cloud)?;
    let mut warnings = 0;
    let mut values = Vec::with_capacity(config.estimators.len());
    let mut tangent_err = None;
    let delta = default_delta(n, config.delta_c);
    for kind in &config.estimators {
        let v = match kind {
            EstimatorKind::Plain => {
                let est = estimate_reach_with(&cloud, epsilon, opts)?;
                warnings += est.warnings.len();
                est.value
            }
            EstimatorKind::BiasCorrected => {
                let est = bias_corrected_reach_with(&cloud, config.split, split_seed, &config.epsilon, opts)?;
                warnings += est.warnings.len();
                est.value
            }
            EstimatorKind::TangentOracle => {
                let frames = model.tangent_frames(&cloud)?;
                tangent_reach_with(&cloud, &frames, delta, Exec::Sequential)?
            }
            EstimatorKind::TangentPca => {
                let d = model.intrinsic_dim().unwrap_or(1);
                let k = config.pca_neighbors.unwrap_or_else(|| default_neighbor_count(n, d));
                let frames = local_pca_frames(&cloud, k, d, Exec::Sequential)?;
                if let Ok(truth) = model.tangent_frames(&cloud) {
                    tangent_err = Some(tangent_error(&truth, &frames)?);
                }
                tangent_reach_with(&cloud, &frames, delta, Exec::Sequential)?
            }
        };
        values.push(v);
    }
    Ok(Replicate { epsilon, values, tangent_error: tangent_err, warnings })
}

/// Run every `(model, n)` cell of `config`.
pub fn run_experiment(name: &str, config: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let models = config.parsed_models()?;
    let mut series = Vec::new();
    let mut warnings = 0;
    for (mi, model) in models.iter().enumerate() {
        let id = model.to_string();
        for &n in &config.sizes {
            let seed = cell_seed(config.seed, mi, n);
            let reps: Vec<Replicate> = par::map_range(exec, config.replicates, |rep| {
                run_replicate(config, model, n, seed, rep)
            })
            .into_iter()
            .collect::<Result<_>>()?;
            for (k, kind) in config.estimators.iter().enumerate() {
                series.push(Series {
                    model: id.clone(),
                    n,
                    estimator: kind.name().to_string(),
                    values: reps.iter().map(|r| r.values[k]).collect(),
                });
            }
            series.push(Series {
                model: id.clone(),
                n,
                estimator: EPSILON_SERIES.to_string(),
                values: reps.iter().map(|r| r.epsilon).collect(),
            });
            if reps.iter().all(|r| r.tangent_error.is_some()) && config.estimators.contains(&EstimatorKind::TangentPca) {
                series.push(Series {
                    model: id.clone(),
                    n,
                    estimator: TANGENT_ERROR_SERIES.to_string(),
                    values: reps.iter().filter_map(|r| r.tangent_error).collect(),
                });
            }
            warnings += reps.iter().map(|r| r.warnings).sum::<usize>();
        }
    }
    Ok(ExperimentReport {
        experiment: name.to_string(),
        config: config.clone(),
        sd_convention: SD_CONVENTION.to_string(),
        series,
        warnings,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

/// Annulus study with the plain estimator.
pub fn run_table1(config: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    for model in config.parsed_models()? {
        if !matches!(model, ManifoldModel::Annulus { .. }) {
            return Err(ReachError::Config(format!("table1 runs on annulus models, got {model}")));
        }
    }
    let mut config = config.clone();
    if !config.estimators.contains(&EstimatorKind::Plain) {
        config.estimators.insert(0, EstimatorKind::Plain);
    }
    run_experiment("table1", &config, exec)
}

/// Half-ellipse comparison of r̃ (PCA tangents), r̂ and the corrected r̂.
pub fn run_ellipse_comparison(config: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    if config.parsed_models()? != [ManifoldModel::HalfEllipse] {
        return Err(ReachError::Config("ellipse comparison runs on the half-ellipse model only".into()));
    }
    let mut config = config.clone();
    for kind in [EstimatorKind::TangentPca, EstimatorKind::Plain, EstimatorKind::BiasCorrected] {
        if !config.estimators.contains(&kind) {
            config.estimators.push(kind);
        }
    }
    run_experiment("ellipse", &config, exec)
}
