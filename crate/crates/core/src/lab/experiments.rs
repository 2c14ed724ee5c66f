use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_loglog, gaussian_two_sided_tail, make_family, ExperimentResult, FamilySpec, Outcome, Verdict};
use crate::embed::{
    check_admissible, function_graph_circle, kth_power_graph, paraboloid_graph, scaled_circle_example,
    test_n2_sufficiency, AdmissibilityReport, Budget, Embedding, EmbeddingSpec, N2Report, SCALED_CIRCLE_MARKS,
};
use crate::error::{Error, Result};
use crate::grid::{build_ball_grid, build_circle_grid, integrate, normalize_field, Field, GridKind, GridSpec, ManifoldGrid};
use crate::spectral;
use crate::ucp::{
    breitenberger, disconnected_uncertainty, goh_goodman, uncertainty_product, uncertainty_terms, DisconnectedReport,
    UncertaintyReport,
};

fn min_of(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
}

fn max_of(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

// ---------------------------------------------------------------- scaling

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    /// Scale parameters `L`, each in `[4, 64]`.
    #[serde(rename = "L_list")]
    pub scales: Vec<f64>,
    pub n: usize,
    pub slope_tolerance: f64,
    /// Allowed `max/min` of `U / (Ĉ/L̂⁴)` across scales.
    pub band: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            scales: vec![4.0, 8.0, 16.0, 32.0],
            n: 1024,
            slope_tolerance: 0.3,
            band: 10.0,
        }
    }
}

/// Unit-mass raised cosine supported on the parameter arc between the first
/// two marked points of the scaled circle.
pub fn scaled_circle_bump(grid: &ManifoldGrid) -> Result<Field> {
    let [a, b, ..] = SCALED_CIRCLE_MARKS;
    let raw: Vec<f64> = grid
        .coords()
        .iter()
        .map(|c| {
            let t = c[0];
            if (a..=b).contains(&t) {
                1.0 - (2.0 * PI * (t - a) / (b - a)).cos()
            } else {
                0.0
            }
        })
        .collect();
    normalize_field(grid, &raw)
}

/// Three factors, `U` and `Ĉ/L̂⁴` along the scaled-circle family.
pub fn scaling_experiment(cfg: &ScalingConfig, budget: &Budget, seed: u64) -> Result<Outcome<UncertaintyReport>> {
    if cfg.scales.len() < 4 {
        return Err(Error::Config(format!("L_list needs at least 4 values, got {}", cfg.scales.len())));
    }
    if let Some(l) = cfg.scales.iter().find(|l| !(4.0..=64.0).contains(*l)) {
        return Err(Error::Config(format!("L = {l} outside [4, 64]")));
    }
    let grid = build_circle_grid(cfg.n)?;
    let f = scaled_circle_bump(&grid)?;
    let mut res = ExperimentResult::new(
        "scaling",
        seed,
        &[
            "L",
            "term_infdist",
            "term_invtau2",
            "term_energy",
            "U",
            "C_hat",
            "L_hat",
            "ref_bound",
            "U_over_ref",
        ],
    );
    let mut reports = Vec::new();
    for &l in &cfg.scales {
        let emb = scaled_circle_example(&grid, l)?;
        let adm = check_admissible(&grid, &emb, budget, seed)?;
        let rep = uncertainty_product(&grid, &emb, &f, &adm)?;
        res.push_row(vec![
            l,
            rep.terms.infdist,
            rep.terms.invtau2,
            rep.terms.energy,
            rep.u,
            adm.c_hat,
            adm.l_hat,
            adm.ref_bound(),
            rep.u / adm.ref_bound(),
        ]);
        reports.push(rep);
    }
    let scales = res.column("L").unwrap();
    let tol = cfg.slope_tolerance;
    for (col, expected) in [("term_infdist", -3.0), ("term_invtau2", -2.0), ("U", -5.0)] {
        let s = fit_loglog(col, &scales, &res.column(col).unwrap())?;
        res.verdicts.push(Verdict::within(
            &format!("slope_{col}"),
            s.slope,
            Some(expected - tol),
            Some(expected + tol),
        ));
        res.slopes.push(s);
    }
    res.slopes.push(fit_loglog("ref_bound", &scales, &res.column("ref_bound").unwrap())?);
    let ratios = res.column("U_over_ref").unwrap();
    let (lo, hi) = (min_of(ratios.iter().copied()).unwrap(), max_of(ratios.iter().copied()).unwrap());
    res.verdicts.push(Verdict::at_most("U_over_ref_band", hi / lo, cfg.band));
    res.summary.insert("min_U_over_ref".into(), lo);
    res.summary.insert("max_U_over_ref".into(), hi);
    Ok(Outcome { result: res, reports })
}

// ---------------------------------------------------------------- euclidean

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EuclideanConfig {
    /// Standard deviations of the `f²` densities.
    pub eps: Vec<f64>,
    /// Centers `a`, with `|a| ≤ 1/2`.
    pub centers: Vec<f64>,
    pub n_r: usize,
    /// Largest admissible mass of the untruncated density outside the ball.
    pub truncation_mass: f64,
    /// Slack below `√3/2` for the origin ratio.
    pub origin_slack: f64,
    /// Allowed `max/min − 1` of the origin product across `eps`.
    pub variation: f64,
    /// Relative tolerance against the closed-form product `1/4`.
    pub closed_form_tol: f64,
    pub ratio_window: [f64; 2],
    pub product_floor: f64,
}

impl Default for EuclideanConfig {
    fn default() -> Self {
        EuclideanConfig {
            eps: vec![0.05, 0.02, 0.01],
            centers: vec![0.0, 0.3],
            n_r: 2000,
            truncation_mass: 1e-6,
            origin_slack: 0.01,
            variation: 0.2,
            closed_form_tol: 0.05,
            ratio_window: [0.5, 2.0],
            product_floor: 0.2,
        }
    }
}

/// `∫ x² f² · ∫ f'²` for a Gaussian `f²` of any width.
pub const GAUSSIAN_MOMENT_PRODUCT: f64 = 0.25;

/// Paraboloid graph over `[-1, 1]` against Gaussians concentrating at `a`.
pub fn euclidean_reduction(cfg: &EuclideanConfig, seed: u64) -> Result<Outcome<UncertaintyReport>> {
    if let Some(a) = cfg.centers.iter().find(|a| a.abs() > 0.5) {
        return Err(Error::Config(format!("center {a} outside [-1/2, 1/2]")));
    }
    for &e in &cfg.eps {
        for &a in &cfg.centers {
            let tail = gaussian_two_sided_tail((1.0 - a.abs()) / e);
            if tail >= cfg.truncation_mass {
                return Err(Error::Config(format!(
                    "eps {e} at center {a} leaves mass up to {tail:e} outside the ball (limit {:e})",
                    cfg.truncation_mass
                )));
            }
        }
    }
    let grid = build_ball_grid(cfg.n_r, 8, 1)?;
    let emb = paraboloid_graph(&grid)?;
    let family = FamilySpec::RadialGaussian {
        eps: cfg.eps.clone(),
        centers: cfg.centers.clone(),
    };
    let members = make_family(&family, &grid)?;
    let rows: Vec<(Vec<f64>, UncertaintyReport)> = members
        .par_iter()
        .map(|m| {
            let (eps, a) = (m.params[0], m.params[1]);
            let rep = uncertainty_terms(&grid, &emb, &m.field)?;
            let weighted: Vec<f64> =
                grid.coords().iter().zip(m.field.values()).map(|(c, v)| (c[0] - a).powi(2) * v * v).collect();
            let m2 = integrate(&grid, &weighted);
            let product = m2 * rep.dirichlet;
            let row = vec![eps, a, m2, rep.dirichlet, product, rep.nearest_dist, rep.nearest_dist / m2, rep.tau_norm];
            Ok((row, rep))
        })
        .collect::<Result<_>>()?;
    let mut res = ExperimentResult::new(
        "euclidean",
        seed,
        &["eps", "center", "second_moment", "energy", "product", "nearest_dist", "ratio", "tau_norm"],
    );
    let mut reports = Vec::new();
    for (row, rep) in rows {
        res.push_row(row);
        reports.push(rep);
    }
    let origin: Vec<&Vec<f64>> = res.rows.iter().filter(|r| r[1] == 0.0).collect();
    let offset: Vec<&Vec<f64>> = res.rows.iter().filter(|r| r[1] != 0.0).collect();
    if !origin.is_empty() {
        let floor = 3f64.sqrt() / 2.0 - cfg.origin_slack;
        res.verdicts.push(Verdict::at_least("origin_ratio", min_of(origin.iter().map(|r| r[6])).unwrap(), floor));
        let lo = min_of(origin.iter().map(|r| r[4])).unwrap();
        let hi = max_of(origin.iter().map(|r| r[4])).unwrap();
        res.verdicts.push(Verdict::at_most("origin_product_variation", hi / lo - 1.0, cfg.variation));
        let dev = max_of(origin.iter().map(|r| (r[4] / GAUSSIAN_MOMENT_PRODUCT - 1.0).abs())).unwrap();
        res.verdicts.push(Verdict::at_most("closed_form_product", dev, cfg.closed_form_tol));
    }
    if !offset.is_empty() {
        let [lo, hi] = cfg.ratio_window;
        res.verdicts.push(Verdict::at_least("offset_ratio_min", min_of(offset.iter().map(|r| r[6])).unwrap(), lo));
        res.verdicts.push(Verdict::at_most("offset_ratio_max", max_of(offset.iter().map(|r| r[6])).unwrap(), hi));
    }
    res.verdicts.push(Verdict::at_least("product_floor", min_of(res.rows.iter().map(|r| r[4])).unwrap(), cfg.product_floor));
    res.notes.push(format!(
        "untruncated tail mass below {:e}; the closed-form product {GAUSSIAN_MOMENT_PRODUCT} needs no visible correction",
        cfg.truncation_mass
    ));
    Ok(Outcome { result: res, reports })
}

// ---------------------------------------------------------------- inverse

/// Both sides of the constructive inverse inequality for one field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseReport {
    pub int_f4: f64,
    /// `∫ f⁴ − 1/2π`, nonnegative by Hölder.
    pub excess: f64,
    pub grad_sup: f64,
    pub tau: Vec<f64>,
    pub tau_norm: f64,
    /// Third coordinate of `τ`; equals `excess` by construction.
    pub third_coordinate: f64,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    #[serde(rename = "L_hat")]
    pub l_hat: f64,
    /// `(Ĉ/L̂⁵)·‖τ‖²`.
    pub lhs: f64,
    /// `(Ĉ/L̂⁵)·‖τ‖`.
    pub lhs_unsquared: f64,
    /// `(1 + ‖f'‖∞)⁻⁷ · excess`.
    pub rhs: f64,
    /// `lhs / rhs`; absent when `rhs` vanishes.
    pub ratio: Option<f64>,
    /// `‖τ‖² ≥ excess²`.
    pub pythagorean_holds: bool,
}

/// Builds the graph embedding `t ↦ (cos t, sin t, f² − 1/2π)` of `f` and
/// compares `(Ĉ/L̂⁵)‖τ‖²` with `(1 + ‖f'‖∞)⁻⁷(∫f⁴ − 1/2π)`.
pub fn inverse_constructive(grid: &ManifoldGrid, f: &Field, budget: &Budget, seed: u64) -> Result<InverseReport> {
    let emb = function_graph_circle(grid, f)?;
    let adm = check_admissible(grid, &emb, budget, seed)?;
    let tau = crate::ucp::center_of_mass(grid, &emb, f)?;
    let tau_norm = crate::embed::norm(&tau);
    let f4: Vec<f64> = f.values().iter().map(|v| v.powi(4)).collect();
    let int_f4 = integrate(grid, &f4);
    let excess = int_f4 - 1.0 / (2.0 * PI);
    let grad_sup = spectral::derivative(f.values()).iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let factor = adm.c_hat / adm.l_hat.powi(5);
    let lhs = factor * tau_norm * tau_norm;
    let rhs = (1.0 + grad_sup).powi(-7) * excess.max(0.0);
    Ok(InverseReport {
        int_f4,
        excess,
        grad_sup,
        third_coordinate: tau[2],
        pythagorean_holds: tau_norm * tau_norm >= excess * excess - 1e-12,
        tau,
        tau_norm,
        c_hat: adm.c_hat,
        l_hat: adm.l_hat,
        lhs,
        lhs_unsquared: factor * tau_norm,
        rhs,
        ratio: (rhs > 1e-10).then(|| lhs / rhs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InverseConfig {
    pub degree: usize,
    pub count: usize,
    /// Two circle resolutions; the constant `c` must agree between them.
    pub resolutions: [usize; 2],
    pub stability: f64,
}

impl Default for InverseConfig {
    fn default() -> Self {
        InverseConfig {
            degree: 4,
            count: 20,
            resolutions: [512, 1024],
            stability: 0.2,
        }
    }
}

/// Constructive inverse inequality over a seeded band-limited family;
/// `c = min lhs/rhs` is reported per resolution.
pub fn inverse_experiment(cfg: &InverseConfig, budget: &Budget, seed: u64) -> Result<Outcome<InverseReport>> {
    let family = FamilySpec::RandomTrig {
        degree: cfg.degree,
        count: cfg.count,
        seed,
    };
    let mut res = ExperimentResult::new(
        "inverse",
        seed,
        &[
            "n",
            "member",
            "degree",
            "int_f4",
            "excess",
            "grad_sup",
            "tau_norm",
            "third_coordinate",
            "C_hat",
            "L_hat",
            "lhs",
            "rhs",
            "ratio",
        ],
    );
    let mut reports = Vec::new();
    let mut c_by_n = Vec::new();
    for n in cfg.resolutions {
        let grid = build_circle_grid(n)?;
        let mut c_min = f64::INFINITY;
        for m in make_family(&family, &grid)? {
            let rep = inverse_constructive(&grid, &m.field, budget, seed)?;
            let ratio = rep.ratio.unwrap_or(f64::INFINITY);
            c_min = c_min.min(ratio);
            res.push_row(vec![
                n as f64,
                m.params[0],
                m.params[1],
                rep.int_f4,
                rep.excess,
                rep.grad_sup,
                rep.tau_norm,
                rep.third_coordinate,
                rep.c_hat,
                rep.l_hat,
                rep.lhs,
                rep.rhs,
                ratio,
            ]);
            reports.push(rep);
        }
        res.summary.insert(format!("c_min_n{n}"), c_min);
        c_by_n.push(c_min);
    }
    let identity = max_of(reports.iter().map(|r| (r.third_coordinate - r.excess).abs())).unwrap_or(0.0);
    res.verdicts.push(Verdict::at_most("third_coordinate_identity", identity, 1e-8));
    res.verdicts.push(Verdict::flag("pythagorean_bound", reports.iter().all(|r| r.pythagorean_holds)));
    res.verdicts.push(Verdict::flag("sides_nonnegative", reports.iter().all(|r| r.lhs >= 0.0 && r.rhs >= 0.0)));
    res.verdicts.push(Verdict::at_least("c_min", c_by_n[0].min(c_by_n[1]), f64::MIN_POSITIVE));
    res.verdicts.push(Verdict::at_most("c_stability", (c_by_n[1] / c_by_n[0] - 1.0).abs(), cfg.stability));
    Ok(Outcome { result: res, reports })
}

// ---------------------------------------------------------------- degenerate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegenerateConfig {
    pub ks: Vec<u32>,
    /// Bump widths (standard deviation of `f²`).
    pub eps: Vec<f64>,
    pub centers: Vec<f64>,
    pub n_r: usize,
    /// Allowed relative change of the modified product at the origin (`k = 4`).
    pub modified_change: f64,
    /// Required relative decrease of the unmodified product at the origin (`k = 4`).
    pub decay: f64,
    /// Allowed ratio between the two products for `k = 3` at `1/2`, widest bump.
    pub k3_factor: f64,
    pub identity_tol: f64,
}

impl Default for DegenerateConfig {
    fn default() -> Self {
        DegenerateConfig {
            ks: vec![2, 3, 4, 6],
            eps: vec![0.2, 0.1, 0.05],
            centers: vec![0.0, 0.5],
            n_r: 1000,
            modified_change: 0.3,
            decay: 0.6,
            k3_factor: 3.0,
            identity_tol: 1e-10,
        }
    }
}

fn report_distance(a: &UncertaintyReport, b: &UncertaintyReport) -> f64 {
    let scalars = [
        (a.u, b.u),
        (a.terms.infdist, b.terms.infdist),
        (a.terms.invtau2, b.terms.invtau2),
        (a.terms.energy, b.terms.energy),
        (a.tau_norm, b.tau_norm),
    ];
    let tau = a.tau.iter().zip(&b.tau).map(|(x, y)| (x - y).abs());
    scalars
        .iter()
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .chain(tau)
        .fold(0.0, f64::max)
}

/// Products with first-factor exponents `1` and `2/k` on `|x|^k` graphs.
pub fn degenerate_k_experiment(cfg: &DegenerateConfig, seed: u64) -> Result<Outcome<UncertaintyReport>> {
    if let Some(k) = cfg.ks.iter().find(|k| ![2, 3, 4, 6].contains(*k)) {
        return Err(Error::Config(format!("k = {k} not in {{2, 3, 4, 6}}")));
    }
    if cfg.eps.is_empty() || cfg.centers.is_empty() {
        return Err(Error::Config("eps and centers must be nonempty".into()));
    }
    let grid = build_ball_grid(cfg.n_r, 8, 1)?;
    let family = FamilySpec::RadialGaussian {
        eps: cfg.eps.clone(),
        centers: cfg.centers.clone(),
    };
    let members = make_family(&family, &grid)?;
    let mut res = ExperimentResult::new(
        "degenerate",
        seed,
        &["k", "center", "eps", "term_infdist", "term_invtau2", "term_energy", "P1", "P_mod"],
    );
    let mut reports = Vec::new();
    for &k in &cfg.ks {
        let emb = kth_power_graph(&grid, k)?;
        let reps: Vec<UncertaintyReport> = members
            .par_iter()
            .map(|m| uncertainty_terms(&grid, &emb, &m.field))
            .collect::<Result<_>>()?;
        if k == 2 {
            let para = paraboloid_graph(&grid)?;
            let worst = members
                .par_iter()
                .zip(&reps)
                .map(|(m, r)| Ok(report_distance(r, &uncertainty_terms(&grid, &para, &m.field)?)))
                .collect::<Result<Vec<f64>>>()?;
            res.verdicts.push(Verdict::at_most("k2_matches_paraboloid", max_of(worst).unwrap(), cfg.identity_tol));
        }
        for (m, rep) in members.iter().zip(reps) {
            let (eps, center) = (m.params[0], m.params[1]);
            res.push_row(vec![
                k as f64,
                center,
                eps,
                rep.terms.infdist,
                rep.terms.invtau2,
                rep.terms.energy,
                rep.u,
                rep.modified_product(2.0 / k as f64),
            ]);
            reports.push(rep);
        }
    }
    let (wide, narrow) = (
        max_of(cfg.eps.iter().copied()).unwrap(),
        min_of(cfg.eps.iter().copied()).unwrap(),
    );
    let pick = |k: f64, c: f64, e: f64| res.rows.iter().find(|r| r[0] == k && r[1] == c && r[2] == e).cloned();
    let mut extra = Vec::new();
    for &k in &cfg.ks {
        for &c in &cfg.centers {
            let vals: Vec<f64> = res.rows.iter().filter(|r| r[0] == k as f64 && r[1] == c).map(|r| r[7]).collect();
            res.summary.insert(format!("min_P_mod_k{k}_c{c}"), min_of(vals).unwrap());
        }
    }
    if wide > narrow {
        if let (Some(w), Some(n)) = (pick(4.0, 0.0, wide), pick(4.0, 0.0, narrow)) {
            extra.push(Verdict::at_most("k4_modified_change", (n[7] / w[7] - 1.0).abs(), cfg.modified_change));
            extra.push(Verdict::at_least("k4_unmodified_decay", 1.0 - n[6] / w[6], cfg.decay));
        }
        if let (Some(w), Some(n)) = (pick(3.0, 0.5, wide), pick(3.0, 0.5, narrow)) {
            extra.push(Verdict::at_most("k3_unmodified_change", (n[6] / w[6] - 1.0).abs(), cfg.modified_change));
        }
    }
    if let Some(w) = pick(3.0, 0.5, wide) {
        let ratio = w[7] / w[6];
        extra.push(Verdict::within("k3_products_factor", ratio.max(1.0 / ratio), None, Some(cfg.k3_factor)));
    }
    res.verdicts.extend(extra);
    Ok(Outcome { result: res, reports })
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    /// Allowed relative change of the minimum between a grid and its refinement.
    pub stability: f64,
    /// Quadrature budget subtracted from the circle variance floor `1/4`.
    pub circle_budget: f64,
    /// Budget subtracted from the sphere variance floor `1`.
    pub sphere_budget: f64,
    /// `simplex_dist` below this counts as `τ ∈ S`.
    pub degenerate_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            stability: 0.1,
            circle_budget: 1e-6,
            sphere_budget: 0.02,
            degenerate_tol: 1e-8,
        }
    }
}

struct Resolution {
    grid: ManifoldGrid,
    emb: Embedding,
    adm: AdmissibilityReport,
    members: Vec<super::Member>,
}

fn resolutions(
    grid: &GridSpec,
    emb: &EmbeddingSpec,
    family: &FamilySpec,
    budget: &Budget,
    seed: u64,
) -> Result<Vec<Resolution>> {
    [grid.clone(), grid.refined()]
        .iter()
        .map(|spec| {
            let grid = spec.build()?;
            let emb = emb.build(&grid)?;
            let adm = check_admissible(&grid, &emb, budget, seed)?;
            let members = make_family(family, &grid)?;
            Ok(Resolution { grid, emb, adm, members })
        })
        .collect()
}

fn stability_verdicts(res: &mut ExperimentResult, minima: &[Option<f64>], tol: f64, name: &str) {
    match (minima[0], minima[1]) {
        (Some(a), Some(b)) => {
            res.summary.insert(format!("min_{name}_base"), a);
            res.summary.insert(format!("min_{name}_refined"), b);
            res.verdicts.push(Verdict::at_least(&format!("min_{name}_positive"), a.min(b), f64::MIN_POSITIVE));
            res.verdicts.push(Verdict::at_most(&format!("min_{name}_stability"), (b / a - 1.0).abs(), tol));
        }
        _ => res.notes.push("every row is degenerate; positivity and stability are vacuous".into()),
    }
}

/// Three-factor product across a family on a grid and its refinement.
pub fn theorem_sweep(
    grid: &GridSpec,
    emb: &EmbeddingSpec,
    family: &FamilySpec,
    opts: &SweepOptions,
    budget: &Budget,
    seed: u64,
) -> Result<Outcome<UncertaintyReport>> {
    let levels = resolutions(grid, emb, family, budget, seed)?;
    let kind = levels[0].grid.kind();
    let variance = match kind {
        GridKind::Circle if levels.iter().all(|l| l.grid.len().is_power_of_two()) => Some((0.25, opts.circle_budget)),
        GridKind::Sphere2 => Some((1.0, opts.sphere_budget)),
        _ => None,
    };
    let mut columns = vec!["n"];
    columns.extend(family.param_names());
    columns.extend(["tau_norm", "term_infdist", "term_invtau2", "term_energy", "U", "U_over_ref", "degenerate"]);
    if variance.is_some() {
        columns.push("variance_product");
    }
    let mut res = ExperimentResult::new("verify", seed, &columns);
    let mut reports = Vec::new();
    let mut minima = Vec::new();
    let mut var_min: Option<f64> = None;
    for level in &levels {
        let rows: Vec<(Vec<f64>, UncertaintyReport)> = level
            .members
            .par_iter()
            .map(|m| {
                let rep = uncertainty_product(&level.grid, &level.emb, &m.field, &level.adm)?;
                let mut row = vec![level.grid.len() as f64];
                row.extend(&m.params);
                row.extend([
                    rep.tau_norm,
                    rep.terms.infdist,
                    rep.terms.invtau2,
                    rep.terms.energy,
                    rep.u,
                    rep.ratio_to_bound().unwrap(),
                    flag(rep.degenerate_tau),
                ]);
                if variance.is_some() {
                    row.push(match kind {
                        GridKind::Sphere2 => goh_goodman(&level.grid, &m.field)?.product,
                        _ => breitenberger(&level.grid, &m.field)?.product,
                    });
                }
                Ok((row, rep))
            })
            .collect::<Result<_>>()?;
        let live = rows.iter().filter(|(_, r)| !r.degenerate_tau);
        minima.push(min_of(live.clone().map(|(_, r)| r.u)));
        if let Some(m) = min_of(live.clone().map(|(_, r)| r.ratio_to_bound().unwrap())) {
            res.summary.insert(format!("min_U_over_ref_n{}", level.grid.len()), m);
        }
        if variance.is_some() {
            if let Some(m) = min_of(live.map(|(row, _)| *row.last().unwrap())) {
                var_min = Some(var_min.map_or(m, |v| v.min(m)));
            }
        }
        res.summary.insert(format!("degenerate_rows_n{}", level.grid.len()), rows.iter().filter(|(_, r)| r.degenerate_tau).count() as f64);
        for (row, rep) in rows {
            res.push_row(row);
            reports.push(rep);
        }
    }
    stability_verdicts(&mut res, &minima, opts.stability, "U");
    if let (Some((floor, slack)), Some(v)) = (variance, var_min) {
        res.verdicts.push(Verdict::at_least("variance_floor", v, floor - slack));
    }
    Ok(Outcome { result: res, reports })
}

/// Disconnected product across a family on a grid and its refinement.
pub fn disconnected_sweep(
    grid: &GridSpec,
    emb: &EmbeddingSpec,
    family: &FamilySpec,
    opts: &SweepOptions,
    budget: &Budget,
    seed: u64,
) -> Result<Outcome<DisconnectedReport>> {
    let levels = resolutions(grid, emb, family, budget, seed)?;
    let mut columns = vec!["n"];
    columns.extend(family.param_names());
    columns.extend([
        "tau_norm",
        "simplex_dist",
        "term_infdist",
        "term_invsimplex2",
        "term_energy",
        "U_disconnected",
        "degenerate",
        "separation",
    ]);
    let kappa_col = family.param_names().iter().position(|p| *p == "kappa").map(|k| k + 1);
    let mut res = ExperimentResult::new("disconnected", seed, &columns);
    let mut reports = Vec::new();
    let mut minima = Vec::new();
    for level in &levels {
        let rows: Vec<(Vec<f64>, DisconnectedReport)> = level
            .members
            .par_iter()
            .map(|m| {
                let rep = disconnected_uncertainty(&level.grid, &level.emb, &m.field, Some(&level.adm))?;
                let mut row = vec![level.grid.len() as f64];
                row.extend(&m.params);
                row.extend([
                    rep.tau_norm,
                    rep.simplex_dist,
                    rep.terms.infdist,
                    rep.terms.invsimplex2,
                    rep.terms.energy,
                    rep.u,
                    flag(rep.degenerate),
                    rep.separation,
                ]);
                Ok((row, rep))
            })
            .collect::<Result<_>>()?;
        minima.push(min_of(rows.iter().filter(|(_, r)| !r.degenerate).map(|(_, r)| r.u)));
        if let Some((_, r)) = rows.first() {
            res.summary.insert(format!("separation_n{}", level.grid.len()), r.separation);
        }
        for (row, rep) in rows {
            res.push_row(row);
            reports.push(rep);
        }
    }
    stability_verdicts(&mut res, &minima, opts.stability, "U_disconnected");
    let sep = min_of(reports.iter().map(|r| r.separation)).unwrap_or(0.0);
    res.verdicts.push(Verdict::at_least("separation_positive", sep, f64::MIN_POSITIVE));
    if let (Some(k), FamilySpec::TwoComponent { .. }) = (kappa_col, family) {
        let pinned = res
            .rows
            .iter()
            .zip(&reports)
            .filter(|(row, _)| row[k] == 0.0)
            .all(|(_, r)| r.degenerate && r.simplex_dist < opts.degenerate_tol);
        res.verdicts.push(Verdict::flag("constant_rows_degenerate", pinned));
    }
    Ok(Outcome { result: res, reports })
}

// ---------------------------------------------------------------- constants

/// Admissibility thresholds for [`constants_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsOptions {
    /// Smallest curvature estimate accepted as condition 2.
    pub c_min: f64,
    pub centering_tol: f64,
}

impl Default for ConstantsOptions {
    fn default() -> Self {
        ConstantsOptions {
            c_min: 1e-3,
            centering_tol: 1e-8,
        }
    }
}

/// `L̂`, `Ĉ` and the centering residual, checked as conditions 1 to 3.
pub fn constants_check(
    grid: &ManifoldGrid,
    emb: &Embedding,
    opts: &ConstantsOptions,
    budget: &Budget,
    seed: u64,
) -> Result<Outcome<AdmissibilityReport>> {
    let adm = check_admissible(grid, emb, budget, seed)?;
    let mut res = ExperimentResult::new("constants", seed, &["size", "C_hat", "evaluated", "exhaustive"]);
    for s in &adm.curvature.by_size {
        res.push_row(vec![s.size as f64, s.c_hat.unwrap_or(f64::NAN), s.evaluated as f64, flag(s.exhaustive)]);
    }
    res.summary.insert("L_hat".into(), adm.l_hat);
    res.summary.insert("C_hat".into(), adm.c_hat);
    res.summary.insert("ref_bound".into(), adm.ref_bound());
    res.summary.insert("centering_residual".into(), adm.centering_residual);
    res.verdicts.push(Verdict::within("condition_1_bilipschitz", adm.l_hat, Some(1.0), None));
    res.verdicts.push(Verdict::at_least("condition_2_curvature", adm.c_hat, opts.c_min));
    res.verdicts.push(Verdict::at_most("condition_3_centering", adm.centering_residual, opts.centering_tol));
    Ok(Outcome {
        result: res,
        reports: vec![adm],
    })
}

/// Exhaustive `N = 2` curvature estimate against sampled larger configurations.
pub fn n2_check(grid: &ManifoldGrid, emb: &Embedding, budget: &Budget, seed: u64) -> Result<Outcome<N2Report>> {
    let rep = test_n2_sufficiency(grid, emb, budget, seed)?;
    let mut res = ExperimentResult::new("n2check", seed, &["size", "C_hat"]);
    res.push_row(vec![2.0, rep.c_n2]);
    for s in rep.sampled.iter().filter(|s| s.c_hat.is_some()) {
        res.push_row(vec![s.size as f64, s.c_hat.unwrap()]);
    }
    res.summary.insert("ratio".into(), rep.ratio);
    res.verdicts.push(Verdict::at_most("n2_sufficient", rep.ratio, 2.0));
    Ok(Outcome {
        result: res,
        reports: vec![rep],
    })
}
