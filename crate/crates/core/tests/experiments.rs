use std::f64::consts::PI;

use ucp_core::embed::{Budget, EmbeddingSpec};
use ucp_core::grid::{build_circle_grid, normalize_field, GridSpec};
use ucp_core::lab::*;

fn show(res: &ExperimentResult) {
    eprintln!("{}: {:?}", res.experiment, res.summary);
    for v in &res.verdicts {
        eprintln!("  {} = {:.6e} [{:?}, {:?}] {}", v.name, v.value, v.lower, v.upper, v.passed);
    }
    for s in &res.slopes {
        eprintln!("  slope {} = {:.4} ± {:.4}", s.name, s.slope, s.stderr);
    }
}

#[test]
fn scaling_slopes() {
    let out = scaling_experiment(&ScalingConfig::default(), &Budget::default(), 0).unwrap();
    show(&out.result);
    assert_eq!(out.result.rows.len(), 4);
    assert!(out.result.passed());
}

#[test]
fn scaling_slope_uncertainty_shrinks_with_more_points() {
    let four = scaling_experiment(&ScalingConfig::default(), &Budget::default(), 0).unwrap();
    let six = ScalingConfig {
        scales: vec![4.0, 6.0, 8.0, 16.0, 32.0, 64.0],
        ..Default::default()
    };
    let six = scaling_experiment(&six, &Budget::default(), 0).unwrap();
    let se = |r: &ExperimentResult| r.slope("U").unwrap().stderr;
    assert!(se(&six.result) <= se(&four.result), "{} vs {}", se(&six.result), se(&four.result));
}

#[test]
fn scaling_rejects_short_or_out_of_range_lists() {
    let short = ScalingConfig {
        scales: vec![4.0, 8.0, 16.0],
        ..Default::default()
    };
    assert!(scaling_experiment(&short, &Budget::default(), 0).is_err());
    let wide = ScalingConfig {
        scales: vec![2.0, 8.0, 16.0, 32.0],
        ..Default::default()
    };
    assert!(scaling_experiment(&wide, &Budget::default(), 0).is_err());
}

#[test]
fn euclidean_reduction_passes() {
    let out = euclidean_reduction(&EuclideanConfig::default(), 0).unwrap();
    show(&out.result);
    assert!(out.result.passed());
    let origin = out.result.rows.iter().find(|r| r[0] == 0.02 && r[1] == 0.0).unwrap();
    assert!(origin[6] >= 3f64.sqrt() / 2.0 - 0.01);
}

#[test]
fn euclidean_truncation_violation_is_a_config_error() {
    let cfg = EuclideanConfig {
        eps: vec![0.3],
        ..Default::default()
    };
    assert!(matches!(euclidean_reduction(&cfg, 0), Err(ucp_core::Error::Config(_))));
}

#[test]
fn inverse_closed_form_member() {
    let g = build_circle_grid(1024).unwrap();
    let raw: Vec<f64> = g.coords().iter().map(|c| (1.0 + c[0].cos()) / (3.0 * PI).sqrt()).collect();
    let f = normalize_field(&g, &raw).unwrap();
    let rep = inverse_constructive(&g, &f, &Budget::default(), 0).unwrap();
    let int_f4 = 35.0 / (36.0 * PI);
    let rhs = (int_f4 - 1.0 / (2.0 * PI)) / (1.0 + 1.0 / (3.0 * PI).sqrt()).powi(7);
    eprintln!("{rep:?}");
    assert!((rep.int_f4 - int_f4).abs() < 1e-12);
    assert!((rep.rhs / rhs - 1.0).abs() < 1e-6);
    assert!((rep.rhs / 0.0209 - 1.0).abs() < 0.05);
    assert!((rep.third_coordinate - rep.excess).abs() < 1e-8);
    assert!(rep.pythagorean_holds && rep.lhs > 0.0);
}

#[test]
fn inverse_constant_field_is_the_equality_case() {
    let g = build_circle_grid(512).unwrap();
    let f = normalize_field(&g, &vec![1.0; 512]).unwrap();
    let rep = inverse_constructive(&g, &f, &Budget::default(), 0).unwrap();
    assert!(rep.rhs.abs() < 1e-10 && rep.tau_norm < 1e-10 && rep.ratio.is_none());
}

#[test]
fn inverse_family_constant_is_stable() {
    let out = inverse_experiment(&InverseConfig::default(), &Budget::default(), 0).unwrap();
    show(&out.result);
    assert_eq!(out.result.rows.len(), 40);
    assert!(out.result.passed());
}

#[test]
fn degenerate_exponent_contrast() {
    let out = degenerate_k_experiment(&DegenerateConfig::default(), 0).unwrap();
    show(&out.result);
    for r in &out.result.rows {
        eprintln!("  {r:?}");
    }
    assert!(out.result.passed());
}

#[test]
fn von_mises_sweep_is_stable() {
    let kappas: Vec<f64> = (0..8).map(|i| 0.5 * 2f64.powf(i as f64 * 7.0 / 7.0)).collect();
    let out = theorem_sweep(
        &GridSpec::Circle { n: 512 },
        &EmbeddingSpec::CanonicalCircle { radius: 1.0 },
        &FamilySpec::VonMises { kappas, center: 0.7 },
        &SweepOptions::default(),
        &Budget::default(),
        0,
    )
    .unwrap();
    show(&out.result);
    assert!(out.result.passed());
}

#[test]
fn fisher_sweep_meets_variance_floor() {
    let out = theorem_sweep(
        &GridSpec::Sphere2 { n_theta: 64, n_phi: 64 },
        &EmbeddingSpec::CanonicalSphere,
        &FamilySpec::SphericalFisher {
            lambdas: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        },
        &SweepOptions::default(),
        &Budget::default(),
        0,
    )
    .unwrap();
    show(&out.result);
    assert!(out.result.passed());
}

#[test]
fn constant_field_sweep_is_degenerate_not_failed() {
    let out = theorem_sweep(
        &GridSpec::Circle { n: 256 },
        &EmbeddingSpec::CanonicalCircle { radius: 1.0 },
        &FamilySpec::Constant,
        &SweepOptions::default(),
        &Budget::default(),
        0,
    )
    .unwrap();
    assert!(out.result.passed());
    assert!(out.reports.iter().all(|r| r.degenerate_tau));
}

#[test]
fn two_circle_sweep() {
    let out = disconnected_sweep(
        &GridSpec::Circles { count: 2, n: 256 },
        &EmbeddingSpec::CircleUnion {
            centers: vec![vec![-3.0, 0.0], vec![3.0, 0.0]],
            radius: 1.0,
        },
        &FamilySpec::TwoComponent {
            alphas: vec![0.3, 0.5],
            kappas: vec![0.0, 1.0, 4.0],
        },
        &SweepOptions::default(),
        &Budget::default(),
        0,
    )
    .unwrap();
    show(&out.result);
    assert!(out.result.passed());
    assert!(out.reports.iter().all(|r| (r.separation - 4.0).abs() < 1e-12));
}

#[test]
fn constants_flag_flat_sides() {
    let g = build_circle_grid(512).unwrap();
    let emb = EmbeddingSpec::LpSphere { p: 1.0 }.build(&g).unwrap();
    let out = constants_check(&g, &emb, &ConstantsOptions::default(), &Budget::default(), 0).unwrap();
    show(&out.result);
    assert!(!out.result.verdict("condition_2_curvature").unwrap().passed);
    assert!(out.result.verdict("condition_1_bilipschitz").unwrap().passed);
    let circle = EmbeddingSpec::CanonicalCircle { radius: 1.0 }.build(&g).unwrap();
    let ok = constants_check(&g, &circle, &ConstantsOptions::default(), &Budget::default(), 0).unwrap();
    assert!(ok.result.passed());
}

#[test]
fn n2_check_on_helix_reports_a_ratio() {
    let g = build_circle_grid(512).unwrap();
    let emb = EmbeddingSpec::Helix {
        amplitude: 0.3,
        frequency: 3.0,
    }
    .build(&g)
    .unwrap();
    let out = n2_check(&g, &emb, &Budget::default(), 0).unwrap();
    show(&out.result);
    assert!(out.reports[0].ratio.is_finite() && out.reports[0].ratio > 0.0);
}
