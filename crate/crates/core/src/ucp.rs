//! Uncertainty functionals: the three-factor product, the circle and sphere
//! variance products and the disconnected variant.
//!
//! Every functional takes an `L²`-normalized real field. When the mean
//! localization `τ` vanishes the middle factor diverges; reports then carry a
//! degenerate flag and `+∞` instead of failing, so sweeps never abort on it.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{dist, dist2, norm, AdmissibilityReport, Embedding};
use crate::error::{Error, Result};
use crate::grid::{dirichlet_energy, integrate, Field, GridKind, ManifoldGrid, Shape};
use crate::spectral;

/// `‖τ‖` (or a simplex distance) below this is treated as zero.
pub const DEGENERATE_TAU: f64 = 1e-12;

/// Allowed `‖∫ m dg‖`, relative to `sup ‖m‖ · vol(M)`.
pub const CENTERING_TOL: f64 = 1e-9;

/// Convex-combination weights may undershoot zero by this much in the simplex search.
const FEASIBILITY_TOL: f64 = 1e-12;

fn check_embedding(grid: &ManifoldGrid, emb: &Embedding) -> Result<()> {
    if emb.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "embedding has {} points, grid has {} nodes",
            emb.len(),
            grid.len()
        )));
    }
    let residual = emb.centering_residual(grid);
    if residual > CENTERING_TOL * (emb.sup_norm() * grid.total_volume()).max(1.0) {
        return Err(Error::InvalidInput(format!("embedding is not centered (residual {residual:e})")));
    }
    Ok(())
}

fn squares(f: &Field) -> Vec<f64> {
    f.values().iter().map(|v| v * v).collect()
}

/// `τ = ∫ m f² dg`, componentwise.
pub fn center_of_mass(grid: &ManifoldGrid, emb: &Embedding, f: &Field) -> Result<Vec<f64>> {
    f.require_normalized(grid)?;
    check_embedding(grid, emb)?;
    let density = squares(f);
    let mut tau = vec![0.0; emb.ambient_dim()];
    for ((p, w), d) in emb.points().zip(grid.weights()).zip(&density) {
        for (t, x) in tau.iter_mut().zip(p) {
            *t += w * d * x;
        }
    }
    Ok(tau)
}

/// Closest image point to a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearestPoint {
    pub node: usize,
    /// Refined distance; never larger than `node_distance`.
    pub distance: f64,
    /// Exact minimum over grid nodes.
    pub node_distance: f64,
    /// Refined parameter on one-parameter components.
    pub parameter: Option<f64>,
}

fn golden_section(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn segment_distance(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let ab2 = dist2(a, b);
    if ab2 == 0.0 {
        return dist(a, p);
    }
    let t: f64 = a.iter().zip(b).zip(p).map(|((a, b), p)| (b - a) * (p - a)).sum::<f64>() / ab2;
    let t = t.clamp(0.0, 1.0);
    a.iter()
        .zip(b)
        .zip(p)
        .map(|((a, b), p)| (a + t * (b - a) - p).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `inf_z ‖m(z) − τ‖`: exact over nodes, then refined between the neighbours of
/// the best node on one-parameter components. Closed-form curves are refined by
/// golden section, other curves by projection onto the adjacent chords.
pub fn nearest_embedded_point(grid: &ManifoldGrid, emb: &Embedding, tau: &[f64]) -> Result<NearestPoint> {
    if emb.len() != grid.len() || emb.is_empty() {
        return Err(Error::InvalidInput("embedding does not match grid".into()));
    }
    if tau.len() != emb.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "target has dimension {}, embedding {}",
            tau.len(),
            emb.ambient_dim()
        )));
    }
    let (node, d2) = (0..emb.len())
        .into_par_iter()
        .map(|i| (i, dist2(emb.point(i), tau)))
        .reduce(|| (usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    let node_distance = d2.sqrt();
    let mut best = NearestPoint {
        node,
        distance: node_distance,
        node_distance,
        parameter: grid.parameter(node),
    };
    let comp = grid.component_of(node);
    let (lo, hi) = match (comp.shape, grid.parameter(node)) {
        (Shape::Circle { n }, Some(t)) => {
            let h = 2.0 * std::f64::consts::PI / n as f64;
            (t - h, t + h)
        }
        (Shape::Interval { n, a, b }, Some(t)) => {
            let h = (b - a) / (n - 1) as f64;
            ((t - h).max(a), (t + h).min(b))
        }
        _ => return Ok(best),
    };
    if emb.eval_param(lo).is_some() {
        let (t, d) = golden_section(lo, hi, |t| dist(&emb.eval_param(t).unwrap(), tau));
        if d < best.distance {
            best.distance = d;
            best.parameter = Some(t);
        }
    } else {
        for j in grid.neighbors(node) {
            if comp.range().contains(&j) {
                best.distance = best.distance.min(segment_distance(emb.point(node), emb.point(j), tau));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Terms {
    /// `inf_z ‖m(z) − τ‖`.
    pub infdist: f64,
    /// `‖τ‖⁻²`.
    pub invtau2: f64,
    /// `∫ |∇f|² dg`.
    pub energy: f64,
}

/// The three-factor product and its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub tau: Vec<f64>,
    pub tau_norm: f64,
    pub nearest_point_index: usize,
    pub nearest_dist: f64,
    pub dirichlet: f64,
    pub terms: Terms,
    /// `+∞` (serialized as `null`) when `degenerate_tau` is set.
    #[serde(rename = "U")]
    pub u: f64,
    /// `Ĉ / L̂⁴`, when admissibility data was supplied.
    pub ref_bound: Option<f64>,
    pub degenerate_tau: bool,
    pub flags: Vec<String>,
}

impl UncertaintyReport {
    /// Product with the first factor raised to `exponent`.
    pub fn modified_product(&self, exponent: f64) -> f64 {
        if self.degenerate_tau {
            return f64::INFINITY;
        }
        self.terms.infdist.powf(exponent) * self.terms.invtau2 * self.terms.energy
    }

    pub fn ratio_to_bound(&self) -> Option<f64> {
        self.ref_bound.map(|b| self.u / b)
    }
}

/// The three factors and `U` without a reference bound.
pub fn uncertainty_terms(grid: &ManifoldGrid, emb: &Embedding, f: &Field) -> Result<UncertaintyReport> {
    if !grid.is_connected() {
        return Err(Error::Disconnected(grid.n_components()));
    }
    let tau = center_of_mass(grid, emb, f)?;
    let tau_norm = norm(&tau);
    let nearest = nearest_embedded_point(grid, emb, &tau)?;
    let energy = dirichlet_energy(grid, f)?.value;
    let degenerate_tau = tau_norm < DEGENERATE_TAU;
    let invtau2 = if degenerate_tau { f64::INFINITY } else { tau_norm.powi(-2) };
    let u = if degenerate_tau {
        f64::INFINITY
    } else {
        nearest.distance * invtau2 * energy
    };
    Ok(UncertaintyReport {
        tau,
        tau_norm,
        nearest_point_index: nearest.node,
        nearest_dist: nearest.distance,
        dirichlet: energy,
        terms: Terms {
            infdist: nearest.distance,
            invtau2,
            energy,
        },
        u,
        ref_bound: None,
        flags: if degenerate_tau { vec!["degenerate_tau".into()] } else { Vec::new() },
        degenerate_tau,
    })
}

/// Three-factor product alongside the reference bound `Ĉ / L̂⁴`.
pub fn uncertainty_product(
    grid: &ManifoldGrid,
    emb: &Embedding,
    f: &Field,
    admissibility: &AdmissibilityReport,
) -> Result<UncertaintyReport> {
    let mut report = uncertainty_terms(grid, emb, f)?;
    report.ref_bound = Some(admissibility.ref_bound());
    Ok(report)
}

/// Frequency and angular variances of a field on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreitenbergerReport {
    pub tau: [f64; 2],
    pub tau_norm: f64,
    pub var_f: f64,
    /// `(1 − |τ|²)/|τ|²`; `+∞` when degenerate.
    pub var_a: f64,
    pub product: f64,
    /// `var_F · (1 − |τ|)/|τ|²`.
    pub modified_product: f64,
    /// `|c_k|` for ascending `k`.
    pub coefficients: Vec<f64>,
    /// `Σ |c_k|²`.
    pub parseval: f64,
    pub degenerate_tau: bool,
}

/// Variance product of a normalized field on a single circle with a
/// power-of-two number of nodes.
pub fn breitenberger(grid: &ManifoldGrid, f: &Field) -> Result<BreitenbergerReport> {
    let n = match (grid.kind(), grid.components()) {
        (GridKind::Circle, [c]) => match c.shape {
            Shape::Circle { n } => n,
            _ => unreachable!("circle grids hold circle components"),
        },
        _ => return Err(Error::UnsupportedManifold("the variance product needs a circle grid".into())),
    };
    if !n.is_power_of_two() {
        return Err(Error::InvalidResolution(format!("{n} nodes; a power of two is required")));
    }
    f.require_normalized(grid)?;
    let density = squares(f);
    let tau = [
        integrate(grid, &grid.coords().iter().zip(&density).map(|(c, d)| c[0].cos() * d).collect::<Vec<_>>()),
        integrate(grid, &grid.coords().iter().zip(&density).map(|(c, d)| c[0].sin() * d).collect::<Vec<_>>()),
    ];
    let tau_norm = norm(&tau);
    let mut modes = spectral::coefficients(f.values());
    modes.sort_by_key(|m| m.k);
    let parseval: f64 = modes.iter().map(|m| m.coeff.norm_sqr()).sum();
    let second: f64 = modes.iter().map(|m| (m.k * m.k) as f64 * m.coeff.norm_sqr()).sum();
    let first: f64 = modes
        .iter()
        .filter(|m| !m.nyquist)
        .map(|m| m.k as f64 * m.coeff.norm_sqr())
        .sum();
    let var_f = (second - first * first).max(0.0);
    let degenerate_tau = tau_norm < DEGENERATE_TAU;
    let (var_a, product, modified_product) = if degenerate_tau {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    } else {
        let t2 = tau_norm * tau_norm;
        let var_a = (1.0 - t2) / t2;
        (var_a, var_f * var_a, var_f * (1.0 - tau_norm) / t2)
    };
    Ok(BreitenbergerReport {
        tau,
        tau_norm,
        var_f,
        var_a,
        product,
        modified_product,
        coefficients: modes.iter().map(|m| m.coeff.norm()).collect(),
        parseval,
        degenerate_tau,
    })
}

/// Variance product on the round two-sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GohGoodmanReport {
    pub tau: [f64; 3],
    pub tau_norm: f64,
    /// Dirichlet energy, equal to `⟨−Δf, f⟩`.
    pub var_f: f64,
    pub var_a: f64,
    pub product: f64,
    /// `d²/4` with `d = 2`.
    pub bound: f64,
    pub degenerate_tau: bool,
}

impl GohGoodmanReport {
    /// Whether `product ≥ bound − budget`; degenerate reports hold vacuously.
    pub fn holds(&self, budget: f64) -> bool {
        self.degenerate_tau || self.product >= self.bound - budget
    }
}

/// `τ = ∫ x f² dg` and the variance product on `S²`. Both `τ` and the
/// Dirichlet energy are unchanged when the measure is rescaled and `f` is
/// renormalized, so the surface measure is used directly.
pub fn goh_goodman(grid: &ManifoldGrid, f: &Field) -> Result<GohGoodmanReport> {
    if grid.kind() != GridKind::Sphere2 {
        return Err(Error::UnsupportedManifold("the sphere variance product needs a sphere grid".into()));
    }
    f.require_normalized(grid)?;
    let density = squares(f);
    let mut tau = [0.0; 3];
    for (i, (w, d)) in grid.weights().iter().zip(&density).enumerate() {
        let x = grid.sphere_point(i);
        for k in 0..3 {
            tau[k] += w * d * x[k];
        }
    }
    let tau_norm = norm(&tau);
    let var_f = dirichlet_energy(grid, f)?.value;
    let degenerate_tau = tau_norm < DEGENERATE_TAU;
    let (var_a, product) = if degenerate_tau {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let t2 = tau_norm * tau_norm;
        ((1.0 - t2) / t2, var_f * (1.0 - t2) / t2)
    };
    Ok(GohGoodmanReport {
        tau,
        tau_norm,
        var_f,
        var_a,
        product,
        bound: 1.0,
        degenerate_tau,
    })
}

fn require_components(grid: &ManifoldGrid) -> Result<usize> {
    match grid.n_components() {
        1 => Err(Error::InvalidInput("the disconnected functional needs at least two components".into())),
        k if k > 4 => Err(Error::UnsupportedComponentCount(k)),
        k => Ok(k),
    }
}

/// Volume-normalized centroids `p_i = |M_i|⁻¹ ∫_{M_i} m dg`.
pub fn component_centroids(grid: &ManifoldGrid, emb: &Embedding) -> Result<Vec<Vec<f64>>> {
    if emb.len() != grid.len() {
        return Err(Error::InvalidInput("embedding does not match grid".into()));
    }
    Ok(grid
        .components()
        .iter()
        .map(|c| {
            let mut p = vec![0.0; emb.ambient_dim()];
            for i in c.range() {
                for (s, x) in p.iter_mut().zip(emb.point(i)) {
                    *s += grid.weights()[i] * x;
                }
            }
            p.iter().map(|s| s / c.volume).collect()
        })
        .collect())
}

/// Distance from `tau` to the convex hull of at most four points, by exhaustive
/// face enumeration with an affine least-squares solve per face.
pub fn simplex_distance(tau: &[f64], vertices: &[Vec<f64>]) -> Result<f64> {
    let k = vertices.len();
    if k == 0 {
        return Err(Error::InvalidInput("empty vertex list".into()));
    }
    if k > 4 {
        return Err(Error::UnsupportedComponentCount(k));
    }
    if vertices.iter().any(|v| v.len() != tau.len()) {
        return Err(Error::InvalidInput("vertex dimension mismatch".into()));
    }
    let d = tau.len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << k) {
        let face: Vec<&Vec<f64>> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &vertices[i]).collect();
        let v0 = face[0];
        if face.len() == 1 {
            best = best.min(dist(v0, tau));
            continue;
        }
        let a = DMatrix::from_fn(d, face.len() - 1, |r, c| face[c + 1][r] - v0[r]);
        let b = DVector::from_fn(d, |r, _| tau[r] - v0[r]);
        let Ok(beta) = a.clone().svd(true, true).solve(&b, 1e-14) else {
            continue;
        };
        let alpha0 = 1.0 - beta.sum();
        if alpha0 < -FEASIBILITY_TOL || beta.iter().any(|&x| x < -FEASIBILITY_TOL) {
            continue;
        }
        best = best.min((a * beta - b).norm());
    }
    Ok(best)
}

/// Minimum image distance between nodes of different components.
pub fn separation(grid: &ManifoldGrid, emb: &Embedding) -> Result<f64> {
    require_components(grid)?;
    if emb.len() != grid.len() {
        return Err(Error::InvalidInput("embedding does not match grid".into()));
    }
    let ids = grid.component_id();
    let min2 = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..grid.len())
                .filter(|&j| ids[j] != ids[i])
                .map(|j| dist2(emb.point(i), emb.point(j)))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(min2.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisconnectedTerms {
    pub infdist: f64,
    /// `inf_{s∈S} ‖s − τ‖⁻²`.
    pub invsimplex2: f64,
    pub energy: f64,
}

/// Disconnected-manifold product and its data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisconnectedReport {
    pub centroids: Vec<Vec<f64>>,
    /// States that centroids are volume-normalized.
    pub centroid_convention: &'static str,
    pub component_masses: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_norm: f64,
    pub nearest_point_index: usize,
    pub nearest_dist: f64,
    pub simplex_dist: f64,
    pub separation: f64,
    pub dirichlet: f64,
    pub terms: DisconnectedTerms,
    /// `+∞` (serialized as `null`) when `degenerate` is set.
    #[serde(rename = "U_disconnected")]
    pub u: f64,
    pub ref_bound: Option<f64>,
    /// `τ` lies on the centroid simplex.
    pub degenerate: bool,
    pub flags: Vec<String>,
}

/// Product `inf_z ‖m(z) − τ‖ · dist(τ, S)⁻² · ∫|∇f|²` over 2 to 4 components.
pub fn disconnected_uncertainty(
    grid: &ManifoldGrid,
    emb: &Embedding,
    f: &Field,
    admissibility: Option<&AdmissibilityReport>,
) -> Result<DisconnectedReport> {
    require_components(grid)?;
    let tau = center_of_mass(grid, emb, f)?;
    let density = squares(f);
    let component_masses = grid
        .components()
        .iter()
        .map(|c| c.range().map(|i| grid.weights()[i] * density[i]).sum())
        .collect();
    let centroids = component_centroids(grid, emb)?;
    let simplex_dist = simplex_distance(&tau, &centroids)?;
    let nearest = nearest_embedded_point(grid, emb, &tau)?;
    let energy = dirichlet_energy(grid, f)?.value;
    let degenerate = simplex_dist < DEGENERATE_TAU;
    let invsimplex2 = if degenerate { f64::INFINITY } else { simplex_dist.powi(-2) };
    let u = if degenerate {
        f64::INFINITY
    } else {
        nearest.distance * invsimplex2 * energy
    };
    Ok(DisconnectedReport {
        centroids,
        centroid_convention: "volume-normalized",
        component_masses,
        tau_norm: norm(&tau),
        tau,
        nearest_point_index: nearest.node,
        nearest_dist: nearest.distance,
        simplex_dist,
        separation: separation(grid, emb)?,
        dirichlet: energy,
        terms: DisconnectedTerms {
            infdist: nearest.distance,
            invsimplex2,
            energy,
        },
        u,
        ref_bound: admissibility.map(AdmissibilityReport::ref_bound),
        degenerate,
        flags: if degenerate { vec!["tau_in_simplex".into()] } else { Vec::new() },
    })
}

/// Mass of `f²` near the image point closest to `τ`, against the bound
/// `1 − L̂² ε / (Ĉ r²)` that the curvature condition and Markov's inequality give.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovCheck {
    pub radius: f64,
    /// `‖m(z) − τ‖` at the nearest node `z`.
    pub epsilon: f64,
    pub mass_within: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn markov_concentration(
    grid: &ManifoldGrid,
    emb: &Embedding,
    f: &Field,
    admissibility: &AdmissibilityReport,
    radius: f64,
) -> Result<MarkovCheck> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let tau = center_of_mass(grid, emb, f)?;
    let nearest = nearest_embedded_point(grid, emb, &tau)?;
    let density = squares(f);
    let mass_within = (0..grid.len())
        .filter(|&j| grid.geodesic(nearest.node, j).is_some_and(|g| g <= radius))
        .map(|j| grid.weights()[j] * density[j])
        .sum();
    let epsilon = nearest.node_distance;
    let bound = 1.0 - admissibility.l_hat.powi(2) * epsilon / (admissibility.c_hat * radius * radius);
    Ok(MarkovCheck {
        radius,
        epsilon,
        mass_within,
        bound,
        holds: mass_within >= bound - 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{canonical_circle, canonical_sphere, check_admissible, circle_union, paraboloid_graph, Budget};
    use crate::grid::{build_ball_grid, build_circle_grid, build_sphere2_grid, disjoint_union, normalize_field};
    use std::f64::consts::PI;

    /// Modified Bessel function of the first kind by its power series.
    fn bessel_i(nu: u32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..500 {
            term *= (x / 2.0).powi(2) / (k as f64 * (k + nu) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum
    }

    fn von_mises(grid: &ManifoldGrid, kappa: f64, t0: f64) -> Field {
        let raw: Vec<f64> = grid.coords().iter().map(|c| (0.5 * kappa * (c[0] - t0).cos()).exp()).collect();
        normalize_field(grid, &raw).unwrap()
    }

    fn quick_budget() -> Budget {
        Budget {
            n_pairs: 2000,
            n_samples: 500,
            sizes: vec![2, 3],
            coarse_max: 32,
            ..Default::default()
        }
    }

    #[test]
    fn center_of_mass_examples() {
        let g = build_circle_grid(1024).unwrap();
        let m = canonical_circle(&g, 1.0).unwrap();
        let c = normalize_field(&g, &vec![1.0; 1024]).unwrap();
        assert!(norm(&center_of_mass(&g, &m, &c).unwrap()) < 1e-10);
        let tau = center_of_mass(&g, &m, &von_mises(&g, 2.0, 0.0)).unwrap();
        assert!((tau[0] - bessel_i(1, 2.0) / bessel_i(0, 2.0)).abs() < 1e-10);
        assert!((tau[0] - 0.6978).abs() < 1e-4 && tau[1].abs() < 1e-12);
        let bump = center_of_mass(&g, &m, &von_mises(&g, 200.0, PI / 3.0)).unwrap();
        assert!(dist(&bump, &[(PI / 3.0).cos(), (PI / 3.0).sin()]) < 0.02);
    }

    #[test]
    fn unnormalized_fields_are_rejected() {
        let g = build_circle_grid(64).unwrap();
        let m = canonical_circle(&g, 1.0).unwrap();
        let f = Field::new(vec![1.0; 64]).unwrap();
        assert!(matches!(center_of_mass(&g, &m, &f), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn nearest_point_examples() {
        let g = build_circle_grid(256).unwrap();
        let m = canonical_circle(&g, 1.0).unwrap();
        assert!((nearest_embedded_point(&g, &m, &[0.0, 0.0]).unwrap().distance - 1.0).abs() < 1e-12);

        let b = build_ball_grid(200, 64, 1).unwrap();
        let p = paraboloid_graph(&b).unwrap();
        let raw = |h: f64| {
            let tau = [-p.shift()[0], h - 1.0 / 3.0 - p.shift()[1]];
            nearest_embedded_point(&b, &p, &tau).unwrap()
        };
        let at_one = raw(1.0);
        assert!((at_one.distance - 3f64.sqrt() / 2.0).abs() < 1e-9);
        assert!((at_one.parameter.unwrap().abs() - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((raw(0.3).distance - 0.3).abs() < 1e-12);
        for k in 1..=10 {
            let h = k as f64 / 10.0;
            assert!(raw(h).distance >= 3f64.sqrt() / 2.0 * h - 1e-12);
        }
    }

    #[test]
    fn constant_field_is_degenerate() {
        let g = build_circle_grid(512).unwrap();
        let m = canonical_circle(&g, 1.0).unwrap();
        let c = normalize_field(&g, &vec![1.0; 512]).unwrap();
        let r = uncertainty_terms(&g, &m, &c).unwrap();
        assert!(r.degenerate_tau && r.u.is_infinite() && r.terms.energy.abs() < 1e-12);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["U"].is_null());
        assert_eq!(json["flags"][0], "degenerate_tau");
    }

    #[test]
    fn von_mises_products_match_closed_form() {
        let g = build_circle_grid(1024).unwrap();
        let m = canonical_circle(&g, 1.0).unwrap();
        let adm = check_admissible(&g, &m, &quick_budget(), 0).unwrap();
        for kappa in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let f = von_mises(&g, kappa, 0.4);
            let r = uncertainty_product(&g, &m, &f, &adm).unwrap();
            let a = bessel_i(1, kappa) / bessel_i(0, kappa);
            let oracle = (1.0 - a) * kappa / (4.0 * a);
            assert!((r.u / oracle - 1.0).abs() < 1e-8, "{kappa}: {} vs {oracle}", r.u);
            assert!(r.u >= 0.05);
            assert!((r.nearest_dist - (1.0 - r.tau_norm)).abs() < 1e-10);
            assert!((r.u - r.terms.infdist * r.terms.invtau2 * r.terms.energy).abs() <= 1e-14 * r.u);
            assert!(r.ratio_to_bound().unwrap() > 0.0);
        }
    }

    #[test]
    fn disconnected_grid_needs_the_disconnected_functional() {
        let c = build_circle_grid(64).unwrap();
        let g = disjoint_union(&[c.clone(), c]).unwrap();
        let m = circle_union(&g, &[vec![-3.0, 0.0], vec![3.0, 0.0]], 1.0).unwrap();
        let f = normalize_field(&g, &vec![1.0; 128]).unwrap();
        assert_eq!(uncertainty_terms(&g, &m, &f), Err(Error::Disconnected(2)));
    }

    #[test]
    fn breitenberger_examples() {
        let g = build_circle_grid(1024).unwrap();
        let raw: Vec<f64> = g
            .coords()
            .iter()
            .map(|c| (0.5f64.sqrt() + 0.5f64.sqrt() * 2f64.sqrt() * c[0].cos()) / (2.0 * PI).sqrt())
            .collect();
        let f = normalize_field(&g, &raw).unwrap();
        let r = breitenberger(&g, &f).unwrap();
        assert!((r.tau_norm - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.var_f - 0.5).abs() < 1e-10);
        assert!((r.var_a - 1.0).abs() < 1e-10);
        assert!((r.product - 0.5).abs() < 1e-10);
        assert!((r.parseval - 1.0).abs() < 1e-8);

        let cos: Vec<f64> = g.coords().iter().map(|c| c[0].cos()).collect();
        assert!(breitenberger(&g, &normalize_field(&g, &cos).unwrap()).unwrap().degenerate_tau);
        let flat = breitenberger(&g, &normalize_field(&g, &vec![1.0; 1024]).unwrap()).unwrap();
        assert!(flat.degenerate_tau && flat.var_f.abs() < 1e-20);
        assert!(breitenberger(&build_circle_grid(1000).unwrap(), &normalize_field(&build_circle_grid(1000).unwrap(), &vec![1.0; 1000]).unwrap()).is_err());
    }

    #[test]
    fn goh_goodman_fisher_family() {
        let g = build_sphere2_grid(128, 128).unwrap();
        for lambda in [0.5, 4.0, 32.0] {
            let raw: Vec<f64> = (0..g.len()).map(|i| (0.5 * lambda * g.sphere_point(i)[2]).exp()).collect();
            let r = goh_goodman(&g, &normalize_field(&g, &raw).unwrap()).unwrap();
            let a = 1.0 / lambda.tanh() - 1.0 / lambda;
            let oracle = lambda * (1.0 - a * a) / (2.0 * a);
            assert!((r.tau_norm / a - 1.0).abs() < 1e-4, "{lambda}: {} vs {a}", r.tau_norm);
            assert!((r.product / oracle - 1.0).abs() < 5e-3, "{lambda}: {} vs {oracle}", r.product);
            assert!(r.holds(0.02));
        }
        let odd: Vec<f64> = (0..g.len()).map(|i| g.sphere_point(i)[2]).collect();
        assert!(goh_goodman(&g, &normalize_field(&g, &odd).unwrap()).unwrap().degenerate_tau);
        let one = goh_goodman(&g, &normalize_field(&g, &vec![1.0; g.len()]).unwrap()).unwrap();
        assert!(one.degenerate_tau && one.var_f.abs() < 1e-20);
    }

    #[test]
    fn sphere_product_tracks_variance_product() {
        let g = build_sphere2_grid(128, 128).unwrap();
        let m = canonical_sphere(&g).unwrap();
        let raw: Vec<f64> = (0..g.len()).map(|i| (2.0 * g.sphere_point(i)[2]).exp()).collect();
        let f = normalize_field(&g, &raw).unwrap();
        let u = uncertainty_terms(&g, &m, &f).unwrap();
        let gg = goh_goodman(&g, &f).unwrap();
        assert!((u.tau_norm - gg.tau_norm).abs() < 1e-12);
        assert!((u.u * (1.0 + u.tau_norm) / gg.product - 1.0).abs() < 5e-3);
    }

    #[test]
    fn simplex_distance_examples() {
        let seg = [vec![-1.0, 0.0], vec![1.0, 0.0]];
        assert!((simplex_distance(&[0.0, 1.0], &seg).unwrap() - 1.0).abs() < 1e-15);
        assert!((simplex_distance(&[3.0, 4.0], &seg).unwrap() - 20f64.sqrt()).abs() < 1e-12);
        let tri = [vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!((simplex_distance(&[0.2, 0.2, 0.5], &tri).unwrap() - 0.5).abs() < 1e-12);
        let five = vec![vec![0.0]; 5];
        assert_eq!(simplex_distance(&[0.0], &five), Err(Error::UnsupportedComponentCount(5)));
    }

    #[test]
    fn two_circles() {
        let c = build_circle_grid(256).unwrap();
        let g = disjoint_union(&[c.clone(), c]).unwrap();
        let m = circle_union(&g, &[vec![-3.0, 0.0], vec![3.0, 0.0]], 1.0).unwrap();
        assert!((separation(&g, &m).unwrap() - 4.0).abs() < 1e-12);
        let alpha: f64 = 0.3;
        let raw: Vec<f64> = g
            .component_id()
            .iter()
            .map(|&k| if k == 0 { alpha.sqrt() } else { (1.0 - alpha).sqrt() })
            .collect();
        let raw: Vec<f64> = raw.iter().map(|v| v / (2.0 * PI).sqrt()).collect();
        let f = normalize_field(&g, &raw).unwrap();
        let r = disconnected_uncertainty(&g, &m, &f, None).unwrap();
        assert!(r.simplex_dist < 1e-10 && r.degenerate && r.u.is_infinite());
        assert!((r.component_masses.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!((r.tau[0] - (-3.0 * alpha + 3.0 * (1.0 - alpha))).abs() < 1e-10);

        let bump: Vec<f64> = g
            .coords()
            .iter()
            .zip(g.component_id())
            .map(|(c, &k)| if k == 0 { (2.0 * (c[0] - 1.0).cos()).exp() } else { 0.5 })
            .collect();
        let f = normalize_field(&g, &bump).unwrap();
        let r = disconnected_uncertainty(&g, &m, &f, None).unwrap();
        assert!(!r.degenerate && r.u > 0.0);
        for p in &r.centroids {
            assert!(r.simplex_dist <= dist(p, &r.tau) + 1e-12);
        }
    }

    #[test]
    fn markov_concentration_on_circle() {
        let g = build_circle_grid(1024).unwrap();
        let m = canonical_circle(&g, 1.0).unwrap();
        let adm = check_admissible(&g, &m, &quick_budget(), 2).unwrap();
        for kappa in [8.0, 32.0, 128.0] {
            for radius in [0.3, 0.6, 1.2] {
                let chk = markov_concentration(&g, &m, &von_mises(&g, kappa, 1.0), &adm, radius).unwrap();
                assert!(chk.holds, "{kappa} {radius}: {chk:?}");
            }
        }
    }
}
