use std::f64::consts::PI;

use super::{Descriptor, Embedding};
use crate::error::{Error, Result};
use crate::grid::{Field, GridKind, ManifoldGrid, Shape};

fn require_circle(grid: &ManifoldGrid, what: &str) -> Result<()> {
    if grid.kind() != GridKind::Circle {
        return Err(Error::UnsupportedManifold(format!(
            "{what} needs a circle grid, got {:?}",
            grid.kind()
        )));
    }
    Ok(())
}

fn params(grid: &ManifoldGrid) -> impl Iterator<Item = f64> + '_ {
    grid.coords().iter().map(|c| c[0])
}

/// `t ↦ (R cos t, R sin t)`.
pub fn canonical_circle(grid: &ManifoldGrid, radius: f64) -> Result<Embedding> {
    require_circle(grid, "canonical circle")?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")));
    }
    let pts = params(grid).map(|t| vec![radius * t.cos(), radius * t.sin()]).collect();
    Ok(Embedding::from_points(grid, 2, pts, Descriptor::CanonicalCircle { radius })?.centered(grid))
}

/// `t ↦ (cos t, sin t, φ(t))`, centered in the third coordinate.
pub fn helix_circle(grid: &ManifoldGrid, profile: &str, phi: impl Fn(f64) -> f64) -> Result<Embedding> {
    require_circle(grid, "helix")?;
    let pts = params(grid).map(|t| vec![t.cos(), t.sin(), phi(t)]).collect();
    let desc = Descriptor::Helix {
        profile: profile.to_string(),
    };
    Ok(Embedding::from_points(grid, 3, pts, desc)?.centered(grid))
}

/// Graph of `|x|²` over the flat unit ball, `x ↦ (x, |x|² − mean |z|²)`.
pub fn paraboloid_graph(grid: &ManifoldGrid) -> Result<Embedding> {
    let dim = match grid.kind() {
        GridKind::Ball { dim } => dim,
        other => {
            return Err(Error::UnsupportedManifold(format!(
                "paraboloid graph needs a ball grid, got {other:?}"
            )))
        }
    };
    // mean of |x|² over B(0,1): 1/3 on [-1,1], 1/2 on the disc
    let mean = dim as f64 / (dim as f64 + 2.0);
    let pts = match dim {
        1 => params(grid).map(|x| vec![x, x * x - mean]).collect(),
        _ => (0..grid.len())
            .map(|i| {
                let [x, y] = grid.disc_point(i);
                vec![x, y, x * x + y * y - mean]
            })
            .collect(),
    };
    Ok(Embedding::from_points(grid, dim + 1, pts, Descriptor::ParaboloidGraph { dim })?.centered(grid))
}

/// Radial projection of `(cos t, sin t)` onto the ℓᵖ unit circle.
pub(crate) fn lp_project(t: f64, p: f64) -> [f64; 2] {
    let (s, c) = t.sin_cos();
    let r = (c.abs().powf(p) + s.abs().powf(p)).powf(1.0 / p);
    [c / r, s / r]
}

/// The circle mapped onto `{‖x‖_p = 1} ⊂ R²`.
pub fn lp_sphere(grid: &ManifoldGrid, p: f64) -> Result<Embedding> {
    require_circle(grid, "lp sphere")?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let pts = params(grid).map(|t| lp_project(t, p).to_vec()).collect();
    Ok(Embedding::from_points(grid, 2, pts, Descriptor::LpSphere { p })?.centered(grid))
}

/// Image angle of parameter `t` under the four-arc reparametrization used by
/// [`scaled_circle_example`]. The arcs `[a,b]` and `[d,c]` (parameter length
/// π/2 each) compress to image angle `1/L²`; the other two stretch to fill
/// the rest of the circle.
pub(crate) fn scaled_circle_angle(t: f64, scale: f64) -> f64 {
    let quarter = PI / 2.0;
    let alpha = 1.0 / (scale * scale);
    let extents = [alpha, PI - alpha, alpha, PI - alpha];
    let s = (t - 5.0 * PI / 4.0).rem_euclid(2.0 * PI);
    let piece = ((s / quarter) as usize).min(3);
    let local = s - piece as f64 * quarter;
    let start: f64 = extents[..piece].iter().sum();
    1.5 * PI - 0.5 * alpha + start + extents[piece] * local / quarter
}

/// Parameter values of the marked points `a, b, c, d`.
pub const SCALED_CIRCLE_MARKS: [f64; 4] = [5.0 * PI / 4.0, 7.0 * PI / 4.0, 3.0 * PI / 4.0, PI / 4.0];

/// Circle of radius `L` whose marked pairs `(a,b)` and `(c,d)` sit `≍ 1/L`
/// apart while `‖m(a) − m(c)‖ ≍ L`.
pub fn scaled_circle_example(grid: &ManifoldGrid, scale: f64) -> Result<Embedding> {
    require_circle(grid, "scaled circle")?;
    if !(scale >= 2.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be >= 2, got {scale}")));
    }
    let pts = params(grid)
        .map(|t| {
            let th = scaled_circle_angle(t, scale);
            vec![scale * th.cos(), scale * th.sin()]
        })
        .collect();
    Ok(Embedding::from_points(grid, 2, pts, Descriptor::ScaledCircle { scale })?.centered(grid))
}

/// `x ↦ (x, |x|^k − 1/(k+1))` on `[-1, 1]`.
pub fn kth_power_graph(grid: &ManifoldGrid, k: u32) -> Result<Embedding> {
    let on_unit_interval = grid.is_connected()
        && matches!(grid.components()[0].shape, Shape::Interval { a, b, .. } if a == -1.0 && b == 1.0);
    if !on_unit_interval {
        return Err(Error::UnsupportedManifold(
            "kth power graph needs the interval [-1, 1]".into(),
        ));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    let c = 1.0 / (k as f64 + 1.0);
    let pts = params(grid).map(|x| vec![x, x.abs().powi(k as i32) - c]).collect();
    // k = 2 is the one-dimensional paraboloid graph
    let desc = if k == 2 {
        Descriptor::ParaboloidGraph { dim: 1 }
    } else {
        Descriptor::KthPowerGraph { k }
    };
    Ok(Embedding::from_points(grid, 2, pts, desc)?.centered(grid))
}

/// `t ↦ (cos t, sin t, f(t)² − 1/2π)` for a unit-mass field on the circle.
pub fn function_graph_circle(grid: &ManifoldGrid, f: &Field) -> Result<Embedding> {
    require_circle(grid, "function graph")?;
    f.require_normalized(grid)?;
    let pts = params(grid)
        .zip(f.values())
        .map(|(t, v)| vec![t.cos(), t.sin(), v * v - 1.0 / (2.0 * PI)])
        .collect();
    Ok(Embedding::from_points(grid, 3, pts, Descriptor::FunctionGraph)?.centered(grid))
}

/// Inclusion `S² ⊂ R³`.
pub fn canonical_sphere(grid: &ManifoldGrid) -> Result<Embedding> {
    if grid.kind() != GridKind::Sphere2 {
        return Err(Error::UnsupportedManifold(
            "canonical sphere needs a sphere grid".into(),
        ));
    }
    let pts = (0..grid.len()).map(|i| grid.sphere_point(i).to_vec()).collect();
    Ok(Embedding::from_points(grid, 3, pts, Descriptor::CanonicalSphere)?.centered(grid))
}

/// Identity on flat pieces: `x ↦ x` on intervals, `(r, θ) ↦ (x, y)` on the disc.
pub fn identity(grid: &ManifoldGrid) -> Result<Embedding> {
    let flat = grid
        .components()
        .iter()
        .all(|c| matches!(c.shape, Shape::Interval { .. } | Shape::Disc { .. }));
    let dims: Vec<usize> = grid.components().iter().map(|c| c.shape.dim()).collect();
    if !flat || dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::UnsupportedManifold(
            "identity embedding needs flat pieces of one dimension".into(),
        ));
    }
    let pts = (0..grid.len())
        .map(|i| match grid.component_of(i).shape {
            Shape::Disc { .. } => grid.disc_point(i).to_vec(),
            _ => vec![grid.coords()[i][0]],
        })
        .collect();
    Embedding::from_points(grid, dims[0], pts, Descriptor::Identity)
}

/// Each circle component mapped to a circle of `radius` about its own center.
pub fn circle_union(grid: &ManifoldGrid, centers: &[Vec<f64>], radius: f64) -> Result<Embedding> {
    if centers.len() != grid.n_components() {
        return Err(Error::InvalidInput(format!(
            "{} centers for {} components",
            centers.len(),
            grid.n_components()
        )));
    }
    if !grid.components().iter().all(|c| matches!(c.shape, Shape::Circle { .. })) {
        return Err(Error::UnsupportedManifold(
            "circle union needs circle components".into(),
        ));
    }
    if centers.iter().any(|c| c.len() != 2) {
        return Err(Error::InvalidParameter("centers must be points in R²".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")));
    }
    let pts = (0..grid.len())
        .map(|i| {
            let c = &centers[grid.component_id()[i]];
            let t = grid.coords()[i][0];
            vec![c[0] + radius * t.cos(), c[1] + radius * t.sin()]
        })
        .collect();
    let desc = Descriptor::CircleUnion {
        centers: centers.to_vec(),
        radius,
    };
    Ok(Embedding::from_points(grid, 2, pts, desc)?.centered(grid))
}
