//! Reach estimation from finite point samples.

pub mod error;
pub mod experiment;
pub mod stats;
pub mod estimator;
pub mod geometry;
pub mod bias;
pub mod graph;
pub mod models;
mod inf_serde;
pub mod par;
pub mod tangent;

pub use error::{ReachError, Result};
pub use estimator::{estimate_reach, pair_critical_radius, EpsilonRule, ReachEstimate};
pub use geometry::PointCloud;
pub use graph::{build_graph, graph_geodesics, NeighborhoodGraph};
pub use par::Exec;
