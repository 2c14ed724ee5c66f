use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{normalize_field, Field, GridKind, ManifoldGrid, Shape};

/// A named, parametrized family of normalized test fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `f² ∝ e^{κ cos(t − center)}` on the circle.
    VonMises {
        kappas: Vec<f64>,
        #[serde(default)]
        center: f64,
    },
    /// `f = (a + b√2 cos t)/√(2π)` per pair `[a, b]`, renormalized.
    FourierMix { pairs: Vec<[f64; 2]> },
    /// Real trigonometric polynomials of degree at most `degree` with
    /// coefficients uniform in `[-1, 1]`.
    RandomTrig {
        degree: usize,
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// `f² ∝ e^{λ z}` on the sphere.
    SphericalFisher { lambdas: Vec<f64> },
    /// `f² ∝ e^{−|x − a|²/(2ε²)}` on a ball, with `a` on the first axis.
    RadialGaussian {
        eps: Vec<f64>,
        #[serde(default = "origin")]
        centers: Vec<f64>,
    },
    /// Two components carrying masses `α` and `1 − α`: a von Mises bump of
    /// concentration `κ` on the first, a constant on the second. `κ = 0`
    /// makes both pieces constant.
    TwoComponent { alphas: Vec<f64>, kappas: Vec<f64> },
    Constant,
}

fn origin() -> Vec<f64> {
    vec![0.0]
}

/// Direction of the von Mises bumps on the first of two components. Off the
/// axis through the centroids, so that bumps move `τ` off their segment.
pub const TWO_COMPONENT_BUMP_CENTER: f64 = 1.0;

/// One generated field with its parameter tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub params: Vec<f64>,
    pub field: Field,
}

impl FamilySpec {
    /// Column names of [`Member::params`].
    pub fn param_names(&self) -> Vec<&'static str> {
        match self {
            FamilySpec::VonMises { .. } => vec!["kappa"],
            FamilySpec::FourierMix { .. } => vec!["a", "b"],
            FamilySpec::RandomTrig { .. } => vec!["member", "degree"],
            FamilySpec::SphericalFisher { .. } => vec!["lambda"],
            FamilySpec::RadialGaussian { .. } => vec!["eps", "center"],
            FamilySpec::TwoComponent { .. } => vec!["alpha", "kappa"],
            FamilySpec::Constant => vec![],
        }
    }

    fn check_grid(&self, grid: &ManifoldGrid) -> Result<()> {
        let ok = match self {
            FamilySpec::VonMises { .. } | FamilySpec::FourierMix { .. } | FamilySpec::RandomTrig { .. } => {
                grid.kind() == GridKind::Circle
            }
            FamilySpec::SphericalFisher { .. } => grid.kind() == GridKind::Sphere2,
            FamilySpec::RadialGaussian { .. } => matches!(grid.kind(), GridKind::Ball { .. }),
            FamilySpec::TwoComponent { .. } => {
                grid.n_components() == 2 && grid.components().iter().all(|c| matches!(c.shape, Shape::Circle { .. }))
            }
            FamilySpec::Constant => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("family {:?} does not live on a {:?} grid", self.param_names(), grid.kind())))
        }
    }
}

fn von_mises_raw(t: f64, kappa: f64, center: f64) -> f64 {
    (0.5 * kappa * (t - center).cos()).exp()
}

/// Generates every member of `spec` on `grid`, in parameter order.
pub fn make_family(spec: &FamilySpec, grid: &ManifoldGrid) -> Result<Vec<Member>> {
    spec.check_grid(grid)?;
    let t = |i: usize| grid.coords()[i][0];
    let build = |params: Vec<f64>, raw: Vec<f64>| -> Result<Member> {
        let field = normalize_field(grid, &raw).map_err(|e| Error::Config(format!("family member {params:?}: {e}")))?;
        Ok(Member { params, field })
    };
    let n = grid.len();
    match spec {
        FamilySpec::VonMises { kappas, center } => kappas
            .iter()
            .map(|&k| {
                if !(k >= 0.0 && k.is_finite()) {
                    return Err(Error::Config(format!("kappa must be >= 0, got {k}")));
                }
                build(vec![k], (0..n).map(|i| von_mises_raw(t(i), k, *center)).collect())
            })
            .collect(),
        FamilySpec::FourierMix { pairs } => pairs
            .iter()
            .map(|&[a, b]| {
                let raw = (0..n)
                    .map(|i| (a + b * 2f64.sqrt() * t(i).cos()) / (2.0 * std::f64::consts::PI).sqrt())
                    .collect();
                build(vec![a, b], raw)
            })
            .collect(),
        FamilySpec::RandomTrig { degree, count, seed } => {
            if *degree == 0 {
                return Err(Error::Config("random-trig degree must be >= 1".into()));
            }
            (0..*count)
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    rng.set_stream(s as u64);
                    let d = rng.random_range(1..=*degree);
                    let a: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let b: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let raw = (0..n)
                        .map(|i| {
                            (0..=d)
                                .map(|k| {
                                    let x = k as f64 * t(i);
                                    a[k] * x.cos() + b[k] * x.sin()
                                })
                                .sum()
                        })
                        .collect();
                    build(vec![s as f64, d as f64], raw)
                })
                .collect()
        }
        FamilySpec::SphericalFisher { lambdas } => lambdas
            .iter()
            .map(|&l| build(vec![l], (0..n).map(|i| (0.5 * l * grid.sphere_point(i)[2]).exp()).collect()))
            .collect(),
        FamilySpec::RadialGaussian { eps, centers } => {
            let dim = match grid.kind() {
                GridKind::Ball { dim } => dim,
                _ => unreachable!("checked above"),
            };
            let mut out = Vec::with_capacity(eps.len() * centers.len());
            for &e in eps {
                if !(e > 0.0) {
                    return Err(Error::Config(format!("eps must be > 0, got {e}")));
                }
                for &a in centers {
                    let raw = (0..n)
                        .map(|i| {
                            let r2 = if dim == 1 {
                                (t(i) - a).powi(2)
                            } else {
                                let [x, y] = grid.disc_point(i);
                                (x - a).powi(2) + y * y
                            };
                            (-r2 / (4.0 * e * e)).exp()
                        })
                        .collect();
                    out.push(build(vec![e, a], raw)?);
                }
            }
            Ok(out)
        }
        FamilySpec::TwoComponent { alphas, kappas } => {
            let mut out = Vec::with_capacity(alphas.len() * kappas.len());
            for &alpha in alphas {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
                }
                for &kappa in kappas {
                    let masses = [alpha, 1.0 - alpha];
                    let mut raw = vec![0.0; n];
                    for (c, mass) in grid.components().iter().zip(masses) {
                        let piece: Vec<f64> = c
                            .range()
                            .map(|i| {
                                if c.start == 0 {
                                    von_mises_raw(t(i), kappa, TWO_COMPONENT_BUMP_CENTER)
                                } else {
                                    1.0
                                }
                            })
                            .collect();
                        let m: f64 = c.range().zip(&piece).map(|(i, v)| grid.weights()[i] * v * v).sum();
                        for (i, v) in c.range().zip(piece) {
                            raw[i] = v * (mass / m).sqrt();
                        }
                    }
                    out.push(build(vec![alpha, kappa], raw)?);
                }
            }
            Ok(out)
        }
        FamilySpec::Constant => Ok(vec![build(vec![], vec![1.0; n])?]),
    }
}

/// Upper bound on the mass of a one-dimensional normal density beyond `z`
/// standard deviations on either side (`2φ(z)/z`).
pub fn gaussian_two_sided_tail(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    (2.0 * (-0.5 * z * z).exp() / (z * (2.0 * std::f64::consts::PI).sqrt())).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_ball_grid, build_circle_grid, build_sphere2_grid, disjoint_union, integrate};

    #[test]
    fn members_are_normalized() {
        let c = build_circle_grid(256).unwrap();
        let specs = [
            FamilySpec::VonMises { kappas: vec![0.5, 4.0, 64.0], center: 0.3 },
            FamilySpec::FourierMix { pairs: vec![[0.5f64.sqrt(), 0.5f64.sqrt()], [1.0, 0.2]] },
            FamilySpec::RandomTrig { degree: 5, count: 10, seed: 7 },
            FamilySpec::Constant,
        ];
        for spec in &specs {
            for m in make_family(spec, &c).unwrap() {
                m.field.require_normalized(&c).unwrap();
                assert_eq!(m.params.len(), spec.param_names().len());
            }
        }
    }

    #[test]
    fn von_mises_flat_limit() {
        let g = build_circle_grid(128).unwrap();
        let m = &make_family(&FamilySpec::VonMises { kappas: vec![1e-9], center: 0.0 }, &g).unwrap()[0];
        let flat = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(m.field.values().iter().all(|v| (v - flat).abs() < 1e-6));
    }

    #[test]
    fn radial_gaussian_concentration() {
        let g = build_ball_grid(1000, 8, 1).unwrap();
        let spec = FamilySpec::RadialGaussian { eps: vec![1.0 / 30.0], centers: vec![0.0] };
        let f = &make_family(&spec, &g).unwrap()[0].field;
        let inside: Vec<f64> = g
            .coords()
            .iter()
            .zip(f.values())
            .map(|(c, v)| if c[0].abs() <= 0.1 { v * v } else { 0.0 })
            .collect();
        assert!(integrate(&g, &inside) >= 0.99);
        assert!(gaussian_two_sided_tail(3.0) > 0.0027 && gaussian_two_sided_tail(3.0) < 0.003);
    }

    #[test]
    fn random_trig_is_deterministic() {
        let g = build_circle_grid(512).unwrap();
        let spec = FamilySpec::RandomTrig { degree: 5, count: 4, seed: 7 };
        let a = make_family(&spec, &g).unwrap();
        let b = make_family(&spec, &g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.field.values().iter().zip(y.field.values()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn two_component_masses() {
        let c = build_circle_grid(128).unwrap();
        let g = disjoint_union(&[c.clone(), c]).unwrap();
        let spec = FamilySpec::TwoComponent { alphas: vec![0.25], kappas: vec![0.0, 3.0] };
        for m in make_family(&spec, &g).unwrap() {
            let sq: Vec<f64> = m.field.values().iter().map(|v| v * v).collect();
            let first: f64 = (0..128).map(|i| g.weights()[i] * sq[i]).sum();
            assert!((first - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn family_grid_mismatch_is_a_config_error() {
        let s = build_sphere2_grid(16, 16).unwrap();
        let spec = FamilySpec::VonMises { kappas: vec![1.0], center: 0.0 };
        assert!(matches!(make_family(&spec, &s), Err(Error::Config(_))));
        let c = build_circle_grid(64).unwrap();
        assert!(matches!(
            make_family(&FamilySpec::SphericalFisher { lambdas: vec![1.0] }, &c),
            Err(Error::Config(_))
        ));
    }
}
