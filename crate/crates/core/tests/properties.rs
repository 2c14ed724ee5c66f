//! Invariants of the estimators and the uncertainty functional.

use proptest::prelude::*;
use ucp_core::embed::*;
use ucp_core::grid::{build_circle_grid, normalize_field, GridSpec, ManifoldGrid};
use ucp_core::ucp::uncertainty_terms;

fn small_search(seed: u64, n_samples: usize) -> CurvatureSearch {
    CurvatureSearch {
        sizes: vec![2, 3, 5],
        n_samples,
        seed,
        coarse_max: 32,
        ..Default::default()
    }
}

fn rotate(angle: f64, reflect: bool) -> impl Fn(&[f64]) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    move |p| {
        let y = if reflect { -p[1] } else { p[1] };
        let mut out = vec![c * p[0] - s * y, s * p[0] + c * y];
        out.extend_from_slice(&p[2..]);
        out
    }
}

fn catalog() -> Vec<(GridSpec, EmbeddingSpec)> {
    let circle = GridSpec::Circle { n: 128 };
    vec![
        (circle.clone(), EmbeddingSpec::CanonicalCircle { radius: 1.0 }),
        (circle.clone(), EmbeddingSpec::CanonicalCircle { radius: 2.5 }),
        (
            circle.clone(),
            EmbeddingSpec::Helix {
                amplitude: 0.5,
                frequency: 2.0,
            },
        ),
        (circle.clone(), EmbeddingSpec::LpSphere { p: 1.0 }),
        (circle.clone(), EmbeddingSpec::LpSphere { p: 4.0 }),
        (circle, EmbeddingSpec::ScaledCircle { scale: 8.0 }),
        (GridSpec::Sphere2 { n_theta: 16, n_phi: 32 }, EmbeddingSpec::CanonicalSphere),
        (
            GridSpec::Interval { n: 101, a: -1.0, b: 1.0 },
            EmbeddingSpec::Identity,
        ),
        (
            GridSpec::Ball { dim: 1, n_r: 50, n_ang: 1 },
            EmbeddingSpec::KthPowerGraph { k: 3 },
        ),
        (
            GridSpec::Ball { dim: 1, n_r: 50, n_ang: 1 },
            EmbeddingSpec::ParaboloidGraph,
        ),
    ]
}

fn bump(grid: &ManifoldGrid, center: f64, width: f64) -> ucp_core::grid::Field {
    let raw: Vec<f64> = grid
        .coords()
        .iter()
        .map(|c| ((c[0] - center).cos() / width).exp())
        .collect();
    normalize_field(grid, &raw).unwrap()
}

#[test]
fn catalog_embeddings_are_centered() {
    for (gs, es) in catalog() {
        let g = gs.build().unwrap();
        let m = es.build(&g).unwrap();
        let res = m.centering_residual(&g);
        assert!(res <= 1e-10 * g.total_volume(), "{es:?}: residual {res:e}");
    }
}

#[test]
fn sup_norm_is_bounded_by_diameter_times_distortion() {
    for (gs, es) in catalog() {
        let g = gs.build().unwrap();
        let m = es.build(&g).unwrap();
        let l_hat = estimate_lipschitz(&g, &m, 5000, 0).unwrap();
        let bound = g.diameter() * l_hat * (1.0 + 1e-9);
        assert!(m.sup_norm() <= bound, "{es:?}: {} > {bound}", m.sup_norm());
    }
}

#[test]
fn estimates_are_monotone_in_the_sample() {
    let g = build_circle_grid(256).unwrap();
    let m = EmbeddingSpec::Helix {
        amplitude: 0.4,
        frequency: 3.0,
    }
    .build(&g)
    .unwrap();
    let mut last_l = 0.0;
    let mut last_c = f64::INFINITY;
    for n in [10, 100, 1000, 10000, 40000] {
        let l = estimate_lipschitz(&g, &m, n, 9).unwrap();
        assert!(l >= last_l, "L_hat dropped from {last_l} to {l} at {n} pairs");
        last_l = l;
    }
    for n in [10, 100, 1000, 4000] {
        let est = estimate_curvature_constant(&g, &m, &small_search(9, n)).unwrap();
        assert!(est.c_hat <= last_c, "C_hat rose from {last_c} to {} at {n} samples", est.c_hat);
        last_c = est.c_hat;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orthogonal_maps_leave_constants_unchanged(
        angle in 0.0f64..std::f64::consts::TAU,
        reflect in any::<bool>(),
        seed in 0u64..1000,
    ) {
        let g = build_circle_grid(96).unwrap();
        let m = EmbeddingSpec::Helix { amplitude: 0.3, frequency: 2.0 }.build(&g).unwrap();
        let r = m.map_points(&g, rotate(angle, reflect)).unwrap();
        let l = estimate_lipschitz(&g, &m, 2000, seed).unwrap();
        let lr = estimate_lipschitz(&g, &r, 2000, seed).unwrap();
        prop_assert!((l - lr).abs() <= 1e-12 * l.max(1.0), "{} vs {}", l, lr);
        let c = estimate_curvature_constant(&g, &m, &small_search(seed, 300)).unwrap().c_hat;
        let cr = estimate_curvature_constant(&g, &r, &small_search(seed, 300)).unwrap().c_hat;
        prop_assert!((c - cr).abs() <= 1e-12, "{} vs {}", c, cr);
    }

    #[test]
    fn curvature_scales_inversely_with_the_embedding(lambda in 0.25f64..8.0, seed in 0u64..1000) {
        let g = build_circle_grid(64).unwrap();
        let m = EmbeddingSpec::LpSphere { p: 3.0 }.build(&g).unwrap();
        let s = m.map_points(&g, |p| p.iter().map(|x| lambda * x).collect()).unwrap();
        let c = estimate_curvature_constant(&g, &m, &small_search(seed, 200)).unwrap().c_hat;
        let cs = estimate_curvature_constant(&g, &s, &small_search(seed, 200)).unwrap().c_hat;
        prop_assert!((cs * lambda / c - 1.0).abs() < 1e-9, "{} vs {}", cs * lambda, c);
    }

    #[test]
    fn uncertainty_terms_ignore_sign_and_rotation(
        center in 0.0f64..std::f64::consts::TAU,
        width in 0.2f64..3.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let g = build_circle_grid(256).unwrap();
        // Both sides go through map_points so they share the chord refinement.
        let m = EmbeddingSpec::CanonicalCircle { radius: 1.0 }.build(&g).unwrap();
        let r = m.map_points(&g, rotate(angle, false)).unwrap();
        let m = m.map_points(&g, <[f64]>::to_vec).unwrap();
        let f = bump(&g, center, width);
        let base = uncertainty_terms(&g, &m, &f).unwrap();
        let neg = uncertainty_terms(&g, &m, &f.negated()).unwrap();
        let rot = uncertainty_terms(&g, &r, &f).unwrap();
        prop_assert_eq!(base.u.to_bits(), neg.u.to_bits());
        prop_assert!((base.u / rot.u - 1.0).abs() < 1e-9, "{} vs {}", base.u, rot.u);
        prop_assert!(base.u > 0.0);
    }
}
