//! Test shapes with known reach: samplers and exact oracles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{ReachError, Result};
use crate::geometry::{directed_hausdorff, PointCloud};
use crate::tangent::TangentFrame;

pub const REFERENCE_GRID_SIZE: usize = 10_000;

/// ChaCha20 stream `stream` under key `seed_from_u64(master)`.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManifoldModel {
    /// `{ r² < x² + y² < r² + 1/π }`, unit area, reach `r`.
    Annulus { r: f64 },
    /// `{ x² + 4y² = 1, x ≥ 0 }`, reach `1/4`.
    HalfEllipse,
    /// Circle of radius `R` centered at the origin, reach `R`.
    Circle { radius: f64 },
}

pub fn circle_sample(radius: f64, n: usize, seed: u64) -> PointCloud {
    ManifoldModel::Circle { radius }.sample_seeded(n, seed)
}

pub fn annulus_sample(r: f64, n: usize, seed: u64) -> PointCloud {
    ManifoldModel::Annulus { r }.sample_seeded(n, seed)
}

pub fn half_ellipse_sample(n: usize, seed: u64) -> PointCloud {
    ManifoldModel::HalfEllipse.sample_seeded(n, seed)
}

impl ManifoldModel {
    pub fn annulus(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(ReachError::InvalidParameter(format!("annulus inner radius must be positive, got {r}")));
        }
        Ok(ManifoldModel::Annulus { r })
    }

    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(ReachError::InvalidParameter(format!("circle radius must be positive, got {radius}")));
        }
        Ok(ManifoldModel::Circle { radius })
    }

    pub fn ambient_dim(&self) -> usize {
        2
    }

    /// `None` for full-dimensional sets.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            ManifoldModel::Annulus { .. } => None,
            ManifoldModel::HalfEllipse | ManifoldModel::Circle { .. } => Some(1),
        }
    }

    pub fn true_reach(&self) -> f64 {
        match *self {
            ManifoldModel::Annulus { r } => r,
            ManifoldModel::HalfEllipse => 0.25,
            ManifoldModel::Circle { radius } => radius,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PointCloud {
        let mut coords = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let [x, y] = self.draw(rng);
            coords.push(x);
            coords.push(y);
        }
        PointCloud::from_flat(2, coords).expect("samplers produce finite points")
    }

    pub fn sample_seeded(&self, n: usize, seed: u64) -> PointCloud {
        self.sample(n, &mut stream_rng(seed, 0))
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match *self {
            ManifoldModel::Annulus { r } => {
                let u: f64 = rng.sample(Open01);
                let rho = (r * r + u / PI).sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                [rho * theta.cos(), rho * theta.sin()]
            }
            ManifoldModel::Circle { radius } => {
                let theta = 2.0 * PI * rng.random::<f64>();
                [radius * theta.cos(), radius * theta.sin()]
            }
            ManifoldModel::HalfEllipse => loop {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                let (x, y) = (x.abs(), y);
                let norm = (x * x + 4.0 * y * y).sqrt();
                if norm > 0.0 {
                    break [x / norm, y / norm];
                }
            },
        }
    }

    /// Membership test; curves are checked to `tol`, the annulus exactly.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        let (x, y) = (p[0], p[1]);
        match *self {
            ManifoldModel::Annulus { r } => {
                let rho2 = x * x + y * y;
                r * r < rho2 && rho2 < r * r + 1.0 / PI
            }
            ManifoldModel::Circle { radius } => ((x * x + y * y).sqrt() - radius).abs() <= tol * radius.max(1.0),
            ManifoldModel::HalfEllipse => (x * x + 4.0 * y * y - 1.0).abs() <= tol && x >= 0.0,
        }
    }

    /// Intrinsic distance on the shape; `None` where no oracle is provided.
    pub fn geodesic(&self, a: &[f64], b: &[f64]) -> Option<f64> {
        match *self {
            ManifoldModel::Circle { radius } => Some(radius * central_angle(a, b)),
            ManifoldModel::HalfEllipse => {
                let (ta, tb) = (ellipse_param(a), ellipse_param(b));
                Some(ellipse_arc_length(ta.min(tb), ta.max(tb)))
            }
            ManifoldModel::Annulus { .. } => None,
        }
    }

    /// Nearest point of the (closed) shape.
    pub fn project(&self, p: &[f64]) -> Option<[f64; 2]> {
        let norm = (p[0] * p[0] + p[1] * p[1]).sqrt();
        match *self {
            ManifoldModel::Circle { radius } if norm > 0.0 => Some([radius * p[0] / norm, radius * p[1] / norm]),
            ManifoldModel::Annulus { r } if norm > 0.0 => {
                let rho = norm.clamp(r, (r * r + 1.0 / PI).sqrt());
                Some([rho * p[0] / norm, rho * p[1] / norm])
            }
            _ => None,
        }
    }

    /// Analytic tangent frame at a point of a curve model.
    pub fn tangent(&self, p: &[f64]) -> Option<TangentFrame> {
        let (x, y) = (p[0], p[1]);
        let dir = match self {
            ManifoldModel::Circle { .. } => [-y, x],
            // orthogonal to the gradient (2x, 8y)
            ManifoldModel::HalfEllipse => [-4.0 * y, x],
            ManifoldModel::Annulus { .. } => return None,
        };
        TangentFrame::from_direction(vec![x, y], &dir).ok()
    }

    pub fn tangent_frames(&self, cloud: &PointCloud) -> Result<Vec<TangentFrame>> {
        cloud
            .points()
            .map(|p| {
                self.tangent(p).ok_or(ReachError::MissingOracle { model: self.to_string(), what: "tangent oracle" })
            })
            .collect()
    }

    /// Dense point set on the shape, uniform in its natural parametrization.
    pub fn reference_grid(&self) -> PointCloud {
        let m = REFERENCE_GRID_SIZE;
        let mut coords = Vec::with_capacity(2 * m);
        match *self {
            ManifoldModel::Circle { radius } => {
                for k in 0..m {
                    let t = 2.0 * PI * k as f64 / m as f64;
                    coords.extend([radius * t.cos(), radius * t.sin()]);
                }
            }
            ManifoldModel::HalfEllipse => {
                for k in 0..m {
                    let t = -PI / 2.0 + PI * k as f64 / (m - 1) as f64;
                    coords.extend([t.cos(), 0.5 * t.sin()]);
                }
            }
            ManifoldModel::Annulus { r } => {
                let (radial, angular) = (25, m / 25);
                for i in 0..radial {
                    let rho = (r * r + i as f64 / (radial - 1) as f64 / PI).sqrt();
                    for j in 0..angular {
                        let t = 2.0 * PI * j as f64 / angular as f64;
                        coords.extend([rho * t.cos(), rho * t.sin()]);
                    }
                }
            }
        }
        PointCloud::from_flat(2, coords).expect("grid points are finite")
    }
}

/// Parameter `t ∈ [−π/2, π/2]` of `(cos t, sin(t)/2)`.
fn ellipse_param(p: &[f64]) -> f64 {
    (2.0 * p[1]).atan2(p[0])
}

/// `∫_{t0}^{t1} √(sin²t + cos²t / 4) dt` by composite 5-point Gauss–Legendre.
fn ellipse_arc_length(t0: f64, t1: f64) -> f64 {
    const NODES: [f64; 5] = [0.0, -0.5384693101056831, 0.5384693101056831, -0.906179845938664, 0.906179845938664];
    const WEIGHTS: [f64; 5] = [0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891, 0.2369268850561891];
    let span = t1 - t0;
    if span == 0.0 {
        return 0.0;
    }
    let pieces = ((span * 64.0).ceil() as usize).max(1);
    let h = span / pieces as f64;
    let speed = |t: f64| (t.sin().powi(2) + 0.25 * t.cos().powi(2)).sqrt();
    (0..pieces)
        .map(|k| {
            let mid = t0 + (k as f64 + 0.5) * h;
            NODES.iter().zip(WEIGHTS).map(|(x, w)| w * speed(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// One-sided Hausdorff gap `max_{g ∈ grid} d(g, 𝒳)` between the model's
/// reference grid and the sample.
pub fn covering_radius(cloud: &PointCloud, model: &ManifoldModel) -> Result<f64> {
    covering_radius_to(cloud, &model.reference_grid())
}

pub fn covering_radius_to(cloud: &PointCloud, grid: &PointCloud) -> Result<f64> {
    if grid.is_empty() {
        return Err(ReachError::Empty);
    }
    directed_hausdorff(grid, cloud)
}

/// Angle between `a` and `b` as `2·atan2(‖u − v‖, ‖u + v‖)`. When the norms
/// agree the raw points are used, so the difference stays exact for close
/// pairs instead of going through a subtraction of two angles.
fn central_angle(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a[0].hypot(a[1]), b[0].hypot(b[1]));
    let (u, v) = if (na - nb).abs() <= 4.0 * f64::EPSILON * na.max(nb) {
        ([a[0], a[1]], [b[0], b[1]])
    } else {
        ([a[0] / na, a[1] / na], [b[0] / nb, b[1] / nb])
    };
    let diff = (u[0] - v[0]).hypot(u[1] - v[1]);
    let sum = (u[0] + v[0]).hypot(u[1] + v[1]);
    2.0 * diff.atan2(sum)
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldModel::Annulus { r } => write!(f, "annulus:r={r}"),
            ManifoldModel::HalfEllipse => write!(f, "half-ellipse"),
            ManifoldModel::Circle { radius } => write!(f, "circle:R={radius}"),
        }
    }
}

impl FromStr for ManifoldModel {
    type Err = ReachError;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || ReachError::UnknownModel(s.to_string());
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let value = |key: &str, default: f64| -> Result<f64> {
            match params {
                None => Ok(default),
                Some(p) => {
                    let (k, v) = p.split_once('=').ok_or_else(unknown)?;
                    if k.trim() != key {
                        return Err(unknown());
                    }
                    v.trim().parse::<f64>().map_err(|_| unknown())
                }
            }
        };
        match name {
            "annulus" => ManifoldModel::annulus(value("r", 0.25)?),
            "circle" => ManifoldModel::circle(value("R", 1.0)?),
            "half-ellipse" if params.is_none() => Ok(ManifoldModel::HalfEllipse),
            _ => Err(unknown()),
        }
    }
}
