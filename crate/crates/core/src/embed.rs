//! Embeddings `m: M → R^d` and estimates of their admissibility constants.
//!
//! An embedding is admissible when it is bilipschitz with constant `L`,
//! satisfies the N-point curvature condition
//! `‖mean(m(x_i)) − m(z)‖ ≥ C · mean(‖m(x_i) − m(z)‖²)` and integrates to the
//! origin. `L` and `C` are estimated by sampling, so `L̂` is a lower bound and
//! `Ĉ` an upper bound on the true constants.

mod catalog;
mod estimate;

pub use catalog::*;
pub use estimate::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate, ManifoldGrid};

/// Construction record attached to every embedding.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Descriptor {
    CanonicalCircle { radius: f64 },
    Helix { profile: String },
    ParaboloidGraph { dim: usize },
    LpSphere { p: f64 },
    ScaledCircle { scale: f64 },
    KthPowerGraph { k: u32 },
    FunctionGraph,
    CanonicalSphere,
    Identity,
    CircleUnion { centers: Vec<Vec<f64>>, radius: f64 },
    Custom { label: String },
}

impl Descriptor {
    /// Closed-form curve for one-parameter embeddings, before centering.
    fn curve_point(&self, t: f64) -> Option<Vec<f64>> {
        match *self {
            Descriptor::CanonicalCircle { radius } => Some(vec![radius * t.cos(), radius * t.sin()]),
            Descriptor::LpSphere { p } => Some(lp_project(t, p).to_vec()),
            Descriptor::ScaledCircle { scale } => {
                let theta = scaled_circle_angle(t, scale);
                Some(vec![scale * theta.cos(), scale * theta.sin()])
            }
            Descriptor::ParaboloidGraph { dim: 1 } => Some(vec![t, t * t - 1.0 / 3.0]),
            Descriptor::KthPowerGraph { k } => {
                Some(vec![t, t.abs().powi(k as i32) - 1.0 / (k as f64 + 1.0)])
            }
            Descriptor::Identity => Some(vec![t]),
            _ => None,
        }
    }
}

/// Node-indexed points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    ambient_dim: usize,
    points: Vec<f64>,
    descriptor: Descriptor,
    shift: Vec<f64>,
    centered: bool,
}

impl Embedding {
    /// Wraps raw points; each must have `ambient_dim` finite coordinates.
    pub fn from_points(
        grid: &ManifoldGrid,
        ambient_dim: usize,
        points: Vec<Vec<f64>>,
        descriptor: Descriptor,
    ) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be >= 1".into()));
        }
        if points.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} points for {} nodes",
                points.len(),
                grid.len()
            )));
        }
        let mut flat = Vec::with_capacity(points.len() * ambient_dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient_dim || p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("bad point at node {i}: {p:?}")));
            }
            flat.extend_from_slice(p);
        }
        Ok(Embedding {
            ambient_dim,
            points: flat,
            descriptor,
            shift: vec![0.0; ambient_dim],
            centered: false,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.ambient_dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, node: usize) -> &[f64] {
        &self.points[node * self.ambient_dim..(node + 1) * self.ambient_dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.ambient_dim)
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Total translation subtracted by [`Embedding::centered`].
    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// `∫ m dg`, componentwise.
    pub fn moment(&self, grid: &ManifoldGrid) -> Vec<f64> {
        (0..self.ambient_dim)
            .map(|k| {
                let col: Vec<f64> = self.points().map(|p| p[k]).collect();
                integrate(grid, &col)
            })
            .collect()
    }

    /// `‖∫ m dg‖`.
    pub fn centering_residual(&self, grid: &ManifoldGrid) -> f64 {
        norm(&self.moment(grid))
    }

    /// Subtracts the mean so that `∫ m dg = 0`.
    pub fn centered(mut self, grid: &ManifoldGrid) -> Self {
        let vol = grid.total_volume();
        let mean: Vec<f64> = self.moment(grid).iter().map(|m| m / vol).collect();
        for p in self.points.chunks_exact_mut(self.ambient_dim) {
            for (x, m) in p.iter_mut().zip(&mean) {
                *x -= m;
            }
        }
        for (s, m) in self.shift.iter_mut().zip(&mean) {
            *s += m;
        }
        self.centered = true;
        self
    }

    /// Closed-form point at parameter `t` (after centering), when available.
    pub fn eval_param(&self, t: f64) -> Option<Vec<f64>> {
        let mut p = self.descriptor.curve_point(t)?;
        for (x, s) in p.iter_mut().zip(&self.shift) {
            *x -= s;
        }
        Some(p)
    }

    /// Applies `f` to every point. The result is a custom, uncentered embedding.
    pub fn map_points(&self, grid: &ManifoldGrid, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let pts: Vec<Vec<f64>> = self.points().map(f).collect();
        let dim = pts.first().map_or(self.ambient_dim, Vec::len);
        Embedding::from_points(
            grid,
            dim,
            pts,
            Descriptor::Custom {
                label: "mapped".into(),
            },
        )
    }

    /// Largest `‖m(z)‖` over nodes.
    pub fn sup_norm(&self) -> f64 {
        self.points().map(norm).fold(0.0, f64::max)
    }
}

/// Embedding recipe as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EmbeddingSpec {
    CanonicalCircle {
        #[serde(default = "one")]
        radius: f64,
    },
    /// `t ↦ (cos t, sin t, amplitude · cos(frequency · t))`.
    Helix { amplitude: f64, frequency: f64 },
    ParaboloidGraph,
    LpSphere { p: f64 },
    ScaledCircle {
        #[serde(rename = "L")]
        scale: f64,
    },
    KthPowerGraph { k: u32 },
    CanonicalSphere,
    Identity,
    CircleUnion { centers: Vec<Vec<f64>>, radius: f64 },
}

fn one() -> f64 {
    1.0
}

impl EmbeddingSpec {
    pub fn build(&self, grid: &ManifoldGrid) -> Result<Embedding> {
        match self {
            EmbeddingSpec::CanonicalCircle { radius } => canonical_circle(grid, *radius),
            EmbeddingSpec::Helix {
                amplitude,
                frequency,
            } => {
                let (a, k) = (*amplitude, *frequency);
                helix_circle(grid, &format!("{a}*cos({k}t)"), move |t| a * (k * t).cos())
            }
            EmbeddingSpec::ParaboloidGraph => paraboloid_graph(grid),
            EmbeddingSpec::LpSphere { p } => lp_sphere(grid, *p),
            EmbeddingSpec::ScaledCircle { scale } => scaled_circle_example(grid, *scale),
            EmbeddingSpec::KthPowerGraph { k } => kth_power_graph(grid, *k),
            EmbeddingSpec::CanonicalSphere => canonical_sphere(grid),
            EmbeddingSpec::Identity => identity(grid),
            EmbeddingSpec::CircleUnion { centers, radius } => circle_union(grid, centers, *radius),
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}
