//! Discretized compact manifolds.
//!
//! A [`ManifoldGrid`] is a finite set of nodes with positive quadrature
//! weights, a component label per node and enough structure to evaluate
//! geodesic distances and Dirichlet energies. Supported pieces are the circle
//! of length 2π, the unit sphere S² on a latitude-longitude grid, closed
//! intervals and the flat unit disc; disjoint unions of these model
//! disconnected manifolds.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral;

/// Tolerance on `∫ f² dg = 1` used by every normalization check.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// The connected building blocks of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    /// Uniform nodes `t_j = 2πj/n` on the circle of length 2π.
    Circle { n: usize },
    /// Latitude-longitude nodes with midpoint latitudes (no node at a pole).
    Sphere2 { n_theta: usize, n_phi: usize },
    /// Uniform nodes on `[a, b]` including both endpoints.
    Interval { n: usize, a: f64, b: f64 },
    /// Polar nodes on the flat unit disc with midpoint radii.
    Disc { n_r: usize, n_ang: usize },
}

impl Shape {
    fn node_count(&self) -> usize {
        match *self {
            Shape::Circle { n } | Shape::Interval { n, .. } => n,
            Shape::Sphere2 { n_theta, n_phi } => n_theta * n_phi,
            Shape::Disc { n_r, n_ang } => n_r * n_ang,
        }
    }

    /// Intrinsic dimension of the piece.
    pub fn dim(&self) -> usize {
        match self {
            Shape::Circle { .. } | Shape::Interval { .. } => 1,
            Shape::Sphere2 { .. } | Shape::Disc { .. } => 2,
        }
    }

    fn volume(&self) -> f64 {
        match *self {
            Shape::Circle { .. } => 2.0 * PI,
            Shape::Sphere2 { .. } => 4.0 * PI,
            Shape::Interval { a, b, .. } => b - a,
            Shape::Disc { .. } => PI,
        }
    }

    fn diameter(&self) -> f64 {
        match *self {
            Shape::Circle { .. } | Shape::Sphere2 { .. } => PI,
            Shape::Interval { a, b, .. } => b - a,
            Shape::Disc { .. } => 2.0,
        }
    }
}

/// What kind of manifold a grid discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridKind {
    Circle,
    Sphere2,
    Interval,
    Ball { dim: usize },
    DisjointUnion { components: usize },
}

/// One connected component: its shape and the contiguous node range it owns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub shape: Shape,
    pub start: usize,
    pub len: usize,
    pub volume: f64,
}

impl Component {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Quadrature nodes and weights for a compact (possibly disconnected) manifold.
///
/// Grids are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldGrid {
    kind: GridKind,
    components: Vec<Component>,
    coords: Vec<[f64; 2]>,
    weights: Vec<f64>,
    component_id: Vec<usize>,
    total_volume: f64,
}

fn connected(kind: GridKind, shape: Shape) -> ManifoldGrid {
    let mut coords = Vec::with_capacity(shape.node_count());
    let mut weights = Vec::with_capacity(shape.node_count());
    match shape {
        Shape::Circle { n } => {
            let h = 2.0 * PI / n as f64;
            for j in 0..n {
                coords.push([h * j as f64, 0.0]);
                weights.push(h);
            }
        }
        Shape::Sphere2 { n_theta, n_phi } => {
            let dt = PI / n_theta as f64;
            let dp = 2.0 * PI / n_phi as f64;
            for i in 0..n_theta {
                let theta = (i as f64 + 0.5) * dt;
                // exact area of the latitude band cell: Δφ (cos θ⁻ − cos θ⁺)
                let w = 2.0 * theta.sin() * (0.5 * dt).sin() * dp;
                for j in 0..n_phi {
                    coords.push([theta, dp * j as f64]);
                    weights.push(w);
                }
            }
        }
        Shape::Interval { n, a, b } => {
            let h = (b - a) / (n - 1) as f64;
            for i in 0..n {
                let x = if i == n - 1 { b } else { a + h * i as f64 };
                coords.push([x, 0.0]);
                weights.push(if i == 0 || i == n - 1 { 0.5 * h } else { h });
            }
        }
        Shape::Disc { n_r, n_ang } => {
            let dr = 1.0 / n_r as f64;
            let da = 2.0 * PI / n_ang as f64;
            for i in 0..n_r {
                let r = (i as f64 + 0.5) * dr;
                for j in 0..n_ang {
                    coords.push([r, da * j as f64]);
                    weights.push(r * dr * da);
                }
            }
        }
    }
    let len = coords.len();
    ManifoldGrid {
        kind,
        components: vec![Component {
            shape,
            start: 0,
            len,
            volume: shape.volume(),
        }],
        coords,
        weights,
        component_id: vec![0; len],
        total_volume: shape.volume(),
    }
}

/// Uniform grid on the circle of length 2π.
pub fn build_circle_grid(n: usize) -> Result<ManifoldGrid> {
    if n < 8 {
        return Err(Error::InvalidResolution(format!(
            "circle needs at least 8 nodes, got {n}"
        )));
    }
    Ok(connected(GridKind::Circle, Shape::Circle { n }))
}

/// Latitude-longitude grid on the unit sphere S².
pub fn build_sphere2_grid(n_theta: usize, n_phi: usize) -> Result<ManifoldGrid> {
    if n_theta < 16 || n_phi < 16 {
        return Err(Error::InvalidResolution(format!(
            "sphere needs n_theta, n_phi >= 16, got {n_theta}x{n_phi}"
        )));
    }
    Ok(connected(GridKind::Sphere2, Shape::Sphere2 { n_theta, n_phi }))
}

/// Uniform grid with trapezoid weights on `[a, b]`.
pub fn build_interval_grid(n: usize, a: f64, b: f64) -> Result<ManifoldGrid> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidInput(format!(
            "interval needs finite a < b, got [{a}, {b}]"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidResolution(format!(
            "interval needs at least 3 nodes, got {n}"
        )));
    }
    Ok(connected(GridKind::Interval, Shape::Interval { n, a, b }))
}

/// Flat unit ball. `dim = 1` is `[-1, 1]` with `2 n_r + 1` nodes (the origin is a
/// node); `dim = 2` is a polar grid with `n_r` radii and `n_ang` angles.
pub fn build_ball_grid(n_r: usize, n_ang: usize, dim: usize) -> Result<ManifoldGrid> {
    match dim {
        1 => {
            if n_r < 2 {
                return Err(Error::InvalidResolution(format!(
                    "ball needs n_r >= 2, got {n_r}"
                )));
            }
            Ok(connected(
                GridKind::Ball { dim: 1 },
                Shape::Interval {
                    n: 2 * n_r + 1,
                    a: -1.0,
                    b: 1.0,
                },
            ))
        }
        2 => {
            if n_r < 2 || n_ang < 8 {
                return Err(Error::InvalidResolution(format!(
                    "disc needs n_r >= 2 and n_ang >= 8, got {n_r}x{n_ang}"
                )));
            }
            Ok(connected(GridKind::Ball { dim: 2 }, Shape::Disc { n_r, n_ang }))
        }
        d => Err(Error::UnsupportedManifold(format!(
            "ball of dimension {d} (only 1 and 2)"
        ))),
    }
}

/// Disjoint union of connected grids. Component ids follow the input order.
pub fn disjoint_union(grids: &[ManifoldGrid]) -> Result<ManifoldGrid> {
    if grids.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "disjoint union needs at least 2 grids, got {}",
            grids.len()
        )));
    }
    let mut out = ManifoldGrid {
        kind: GridKind::DisjointUnion {
            components: grids.len(),
        },
        components: Vec::with_capacity(grids.len()),
        coords: Vec::new(),
        weights: Vec::new(),
        component_id: Vec::new(),
        total_volume: 0.0,
    };
    for (id, g) in grids.iter().enumerate() {
        if !g.is_connected() {
            return Err(Error::InvalidInput(format!(
                "union member {id} is itself disconnected"
            )));
        }
        let c = &g.components[0];
        out.components.push(Component {
            shape: c.shape,
            start: out.coords.len(),
            len: c.len,
            volume: c.volume,
        });
        out.coords.extend_from_slice(&g.coords);
        out.weights.extend_from_slice(&g.weights);
        out.component_id.extend(std::iter::repeat_n(id, c.len));
        out.total_volume += g.total_volume;
    }
    Ok(out)
}

impl ManifoldGrid {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Intrinsic coordinates: `t` (circle), `x` (interval), `(θ, φ)` (sphere),
    /// `(r, θ)` (disc). Unused slots are zero.
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn component_id(&self) -> &[usize] {
        &self.component_id
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    /// Largest intrinsic diameter over the components.
    pub fn diameter(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.shape.diameter())
            .fold(0.0, f64::max)
    }

    pub fn component_of(&self, node: usize) -> &Component {
        &self.components[self.component_id[node]]
    }

    /// Number of nodes in every dimension of the finest component, used for
    /// budget caps and reporting.
    pub fn resolution(&self) -> Vec<usize> {
        self.components
            .iter()
            .flat_map(|c| match c.shape {
                Shape::Circle { n } | Shape::Interval { n, .. } => vec![n],
                Shape::Sphere2 { n_theta, n_phi } => vec![n_theta, n_phi],
                Shape::Disc { n_r, n_ang } => vec![n_r, n_ang],
            })
            .collect()
    }

    /// Position of a sphere node as a unit vector in R³.
    pub fn sphere_point(&self, node: usize) -> [f64; 3] {
        let [theta, phi] = self.coords[node];
        [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
    }

    /// Cartesian position of a disc node.
    pub fn disc_point(&self, node: usize) -> [f64; 2] {
        let [r, a] = self.coords[node];
        [r * a.cos(), r * a.sin()]
    }

    /// Geodesic distance between two nodes, or `None` when they lie on
    /// different components (the distance is infinite there).
    pub fn geodesic(&self, i: usize, j: usize) -> Option<f64> {
        if self.component_id[i] != self.component_id[j] {
            return None;
        }
        let d = match self.component_of(i).shape {
            Shape::Circle { .. } => {
                let d = (self.coords[i][0] - self.coords[j][0]).abs();
                d.min(2.0 * PI - d)
            }
            Shape::Interval { .. } => (self.coords[i][0] - self.coords[j][0]).abs(),
            Shape::Sphere2 { .. } => {
                let u = self.sphere_point(i);
                let v = self.sphere_point(j);
                let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                let cross = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
                sin.atan2(dot)
            }
            Shape::Disc { .. } => {
                let p = self.disc_point(i);
                let q = self.disc_point(j);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            }
        };
        Some(d)
    }

    /// Stencil neighbours of a node (the nodes joined to it by a difference edge).
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let c = self.component_of(node);
        let local = node - c.start;
        let mut out = Vec::with_capacity(4);
        match c.shape {
            Shape::Circle { n } => {
                out.push(c.start + (local + 1) % n);
                out.push(c.start + (local + n - 1) % n);
            }
            Shape::Interval { n, .. } => {
                if local + 1 < n {
                    out.push(node + 1);
                }
                if local > 0 {
                    out.push(node - 1);
                }
            }
            Shape::Sphere2 {
                n_theta: rows,
                n_phi: cols,
            }
            | Shape::Disc {
                n_r: rows,
                n_ang: cols,
            } => {
                let (i, j) = (local / cols, local % cols);
                if i + 1 < rows {
                    out.push(node + cols);
                }
                if i > 0 {
                    out.push(node - cols);
                }
                out.push(c.start + i * cols + (j + 1) % cols);
                out.push(c.start + i * cols + (j + cols - 1) % cols);
            }
        }
        out.dedup();
        out
    }

    /// Node of component `comp` nearest to the fractional coordinates `(u, v)`.
    /// Periodic coordinates wrap, bounded ones clamp; `v` is ignored on 1-d pieces.
    pub fn node_at(&self, comp: usize, u: f64, v: f64) -> usize {
        let c = &self.components[comp];
        let wrap = |x: f64, n: usize| ((x.rem_euclid(1.0) * n as f64) as usize).min(n - 1);
        let clamp = |x: f64, n: usize| ((x.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1);
        let local = match c.shape {
            Shape::Circle { n } => wrap(u, n),
            Shape::Interval { n, .. } => {
                ((u.clamp(0.0, 1.0) * (n - 1) as f64).round() as usize).min(n - 1)
            }
            Shape::Sphere2 { n_theta, n_phi } => clamp(u, n_theta) * n_phi + wrap(v, n_phi),
            Shape::Disc { n_r, n_ang } => clamp(u, n_r) * n_ang + wrap(v, n_ang),
        };
        c.start + local
    }

    /// Evenly spread subset of at most `max_per_component` nodes per component.
    pub fn coarse_nodes(&self, max_per_component: usize) -> Vec<usize> {
        let max = max_per_component.max(2);
        let mut out = Vec::new();
        for c in &self.components {
            match c.shape {
                Shape::Circle { n } => {
                    let m = n.min(max);
                    out.extend((0..m).map(|k| c.start + k * n / m));
                }
                Shape::Interval { n, .. } => {
                    let m = n.min(max);
                    out.extend(
                        (0..m).map(|k| c.start + (k as f64 * (n - 1) as f64 / (m - 1) as f64).round() as usize),
                    );
                }
                Shape::Sphere2 {
                    n_theta: rows,
                    n_phi: cols,
                }
                | Shape::Disc {
                    n_r: rows,
                    n_ang: cols,
                } => {
                    let side = (max as f64).sqrt().floor() as usize;
                    let r = rows.min(side.max(1));
                    let q = cols.min((max / r).max(1));
                    for a in 0..r {
                        let i = ((a as f64 + 0.5) * rows as f64 / r as f64) as usize;
                        for b in 0..q {
                            out.push(c.start + i.min(rows - 1) * cols + b * cols / q);
                        }
                    }
                }
            }
        }
        out.dedup();
        out
    }

    /// One-parameter coordinate of a node on a 1-d component.
    pub fn parameter(&self, node: usize) -> Option<f64> {
        match self.component_of(node).shape {
            Shape::Circle { .. } | Shape::Interval { .. } => Some(self.coords[node][0]),
            _ => None,
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::InvalidField(format!(
                "field has {n} values, grid has {} nodes",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Node-indexed real values, optionally carrying the unit L² mass contract.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    normalized: bool,
}

impl Field {
    /// Wraps raw values; the result is not marked normalized.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at node {i}")));
        }
        Ok(Field {
            values,
            normalized: false,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn negated(&self) -> Field {
        Field {
            values: self.values.iter().map(|v| -v).collect(),
            normalized: self.normalized,
        }
    }

    /// Errors unless the field is flagged normalized and `∫ f² dg = 1` holds on `grid`.
    pub fn require_normalized(&self, grid: &ManifoldGrid) -> Result<()> {
        grid.check_len(self.len())?;
        let mass = integrate(grid, &self.values.iter().map(|v| v * v).collect::<Vec<_>>());
        if !self.normalized || (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { mass });
        }
        Ok(())
    }
}

/// Quadrature `Σ w_i v_i`.
pub fn integrate(grid: &ManifoldGrid, values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    grid.weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Rescales raw values to unit L² mass.
pub fn normalize_field(grid: &ManifoldGrid, raw: &[f64]) -> Result<Field> {
    grid.check_len(raw.len())?;
    let field = Field::new(raw.to_vec())?;
    let mass = integrate(grid, &raw.iter().map(|v| v * v).collect::<Vec<_>>());
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::ZeroMass);
    }
    let s = mass.sqrt().recip();
    Ok(Field {
        values: field.values.iter().map(|v| v * s).collect(),
        normalized: true,
    })
}

/// Dirichlet energy `∫ |∇f|² dg` by every available route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirichletEnergy {
    /// Preferred value: spectral on circle components, finite differences elsewhere.
    pub value: f64,
    /// Finite-difference (staggered edge) evaluation on every component.
    pub finite_difference: f64,
    /// Spectral evaluation, present when every component is a circle.
    pub spectral: Option<f64>,
}

fn fd_energy(shape: Shape, f: &[f64]) -> f64 {
    match shape {
        Shape::Circle { n } => {
            let h = 2.0 * PI / n as f64;
            (0..n).map(|j| (f[(j + 1) % n] - f[j]).powi(2)).sum::<f64>() / h
        }
        Shape::Interval { n, a, b } => {
            let h = (b - a) / (n - 1) as f64;
            f.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h
        }
        Shape::Sphere2 { n_theta, n_phi } => {
            let dt = PI / n_theta as f64;
            let dp = 2.0 * PI / n_phi as f64;
            let mut e = 0.0;
            for i in 0..n_theta {
                let row = &f[i * n_phi..(i + 1) * n_phi];
                let s = ((i as f64 + 0.5) * dt).sin();
                let ang: f64 = (0..n_phi).map(|j| (row[(j + 1) % n_phi] - row[j]).powi(2)).sum();
                e += ang * dt / (s * dp);
                if i + 1 < n_theta {
                    let next = &f[(i + 1) * n_phi..(i + 2) * n_phi];
                    let edge = ((i + 1) as f64 * dt).sin();
                    let rad: f64 = row.iter().zip(next).map(|(a, b)| (b - a).powi(2)).sum();
                    e += rad * edge * dp / dt;
                }
            }
            e
        }
        Shape::Disc { n_r, n_ang } => {
            let dr = 1.0 / n_r as f64;
            let da = 2.0 * PI / n_ang as f64;
            let mut e = 0.0;
            for i in 0..n_r {
                let row = &f[i * n_ang..(i + 1) * n_ang];
                let r = (i as f64 + 0.5) * dr;
                let ang: f64 = (0..n_ang).map(|j| (row[(j + 1) % n_ang] - row[j]).powi(2)).sum();
                e += ang * dr / (r * da);
                if i + 1 < n_r {
                    let next = &f[(i + 1) * n_ang..(i + 2) * n_ang];
                    let edge = (i + 1) as f64 * dr;
                    let rad: f64 = row.iter().zip(next).map(|(a, b)| (b - a).powi(2)).sum();
                    e += rad * edge * da / dr;
                }
            }
            e
        }
    }
}

/// `∫ |∇f|² dg`, summed over components.
pub fn dirichlet_energy(grid: &ManifoldGrid, f: &Field) -> Result<DirichletEnergy> {
    grid.check_len(f.len())?;
    let mut fd = 0.0;
    let mut preferred = 0.0;
    let mut spectral_total = Some(0.0);
    for c in &grid.components {
        let vals = &f.values[c.range()];
        let e_fd = fd_energy(c.shape, vals);
        fd += e_fd;
        match c.shape {
            Shape::Circle { .. } => {
                let e_sp = spectral::energy(vals);
                preferred += e_sp;
                spectral_total = spectral_total.map(|s| s + e_sp);
            }
            _ => {
                preferred += e_fd;
                spectral_total = None;
            }
        }
    }
    Ok(DirichletEnergy {
        value: preferred,
        finite_difference: fd,
        spectral: spectral_total,
    })
}

/// Quadratic form `⟨-Δf, f⟩ = -∫ f Δf dg` with a node-centred second-difference
/// Laplacian (no-flux at interval ends and sphere poles). Together with
/// [`dirichlet_energy`] this checks integration by parts.
pub fn laplacian_form(grid: &ManifoldGrid, f: &Field) -> Result<f64> {
    grid.check_len(f.len())?;
    let mut total = 0.0;
    for c in &grid.components {
        let v = &f.values[c.range()];
        let w = &grid.weights[c.range()];
        let lap: Vec<f64> = match c.shape {
            Shape::Circle { n } => {
                let h = 2.0 * PI / n as f64;
                (0..n)
                    .map(|j| (v[(j + 1) % n] - 2.0 * v[j] + v[(j + n - 1) % n]) / (h * h))
                    .collect()
            }
            Shape::Interval { n, a, b } => {
                let h = (b - a) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        let right = if i + 1 < n { v[i + 1] - v[i] } else { 0.0 };
                        let left = if i > 0 { v[i] - v[i - 1] } else { 0.0 };
                        // half-cells at the ends carry half the weight
                        let scale = if i == 0 || i == n - 1 { 2.0 } else { 1.0 };
                        scale * (right - left) / (h * h)
                    })
                    .collect()
            }
            Shape::Sphere2 { n_theta, n_phi } => {
                let dt = PI / n_theta as f64;
                let dp = 2.0 * PI / n_phi as f64;
                let mut out = vec![0.0; v.len()];
                for i in 0..n_theta {
                    let s = ((i as f64 + 0.5) * dt).sin();
                    let s_up = ((i + 1) as f64 * dt).sin();
                    let s_dn = (i as f64 * dt).sin();
                    for j in 0..n_phi {
                        let k = i * n_phi + j;
                        let up = if i + 1 < n_theta { s_up * (v[k + n_phi] - v[k]) } else { 0.0 };
                        let dn = if i > 0 { s_dn * (v[k] - v[k - n_phi]) } else { 0.0 };
                        let east = v[i * n_phi + (j + 1) % n_phi];
                        let west = v[i * n_phi + (j + n_phi - 1) % n_phi];
                        out[k] = (up - dn) / (s * dt * dt) + (east - 2.0 * v[k] + west) / (s * s * dp * dp);
                    }
                }
                out
            }
            Shape::Disc { .. } => {
                return Err(Error::UnsupportedManifold(
                    "laplacian form on the disc".into(),
                ))
            }
        };
        total -= w.iter().zip(v).zip(&lap).map(|((w, v), l)| w * v * l).sum::<f64>();
    }
    Ok(total)
}

/// Grid recipe as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    Circle { n: usize },
    Sphere2 { n_theta: usize, n_phi: usize },
    Interval { n: usize, a: f64, b: f64 },
    Ball {
        dim: usize,
        n_r: usize,
        #[serde(default = "default_n_ang")]
        n_ang: usize,
    },
    /// `count` disjoint copies of the circle with `n` nodes each.
    Circles { count: usize, n: usize },
    /// Disjoint union of intervals `[a_i, b_i]` with `n` nodes each.
    Intervals { bounds: Vec<[f64; 2]>, n: usize },
}

fn default_n_ang() -> usize {
    64
}

impl GridSpec {
    pub fn build(&self) -> Result<ManifoldGrid> {
        match self {
            GridSpec::Circle { n } => build_circle_grid(*n),
            GridSpec::Sphere2 { n_theta, n_phi } => build_sphere2_grid(*n_theta, *n_phi),
            GridSpec::Interval { n, a, b } => build_interval_grid(*n, *a, *b),
            GridSpec::Ball { dim, n_r, n_ang } => build_ball_grid(*n_r, *n_ang, *dim),
            GridSpec::Circles { count, n } => {
                let parts = (0..*count)
                    .map(|_| build_circle_grid(*n))
                    .collect::<Result<Vec<_>>>()?;
                disjoint_union(&parts)
            }
            GridSpec::Intervals { bounds, n } => {
                let parts = bounds
                    .iter()
                    .map(|[a, b]| build_interval_grid(*n, *a, *b))
                    .collect::<Result<Vec<_>>>()?;
                disjoint_union(&parts)
            }
        }
    }

    /// Same recipe at twice the resolution in every direction.
    pub fn refined(&self) -> GridSpec {
        match self.clone() {
            GridSpec::Circle { n } => GridSpec::Circle { n: 2 * n },
            GridSpec::Sphere2 { n_theta, n_phi } => GridSpec::Sphere2 {
                n_theta: 2 * n_theta,
                n_phi: 2 * n_phi,
            },
            GridSpec::Interval { n, a, b } => GridSpec::Interval { n: 2 * n - 1, a, b },
            GridSpec::Ball { dim, n_r, n_ang } => GridSpec::Ball {
                dim,
                n_r: 2 * n_r,
                n_ang: 2 * n_ang,
            },
            GridSpec::Circles { count, n } => GridSpec::Circles { count, n: 2 * n },
            GridSpec::Intervals { bounds, n } => GridSpec::Intervals { bounds, n: 2 * n - 1 },
        }
    }

    /// Node count of the grid this recipe builds, without building it.
    pub fn node_count(&self) -> usize {
        match self {
            GridSpec::Circle { n } | GridSpec::Interval { n, .. } => *n,
            GridSpec::Sphere2 { n_theta, n_phi } => n_theta * n_phi,
            GridSpec::Ball { dim: 1, n_r, .. } => 2 * n_r + 1,
            GridSpec::Ball { n_r, n_ang, .. } => n_r * n_ang,
            GridSpec::Circles { count, n } => count * n,
            GridSpec::Intervals { bounds, n } => bounds.len() * n,
        }
    }
}
