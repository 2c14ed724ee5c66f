use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dist, dist2, Embedding};
use crate::error::{Error, Result};
use crate::grid::ManifoldGrid;

/// Configurations whose mean squared distance falls below this carry no information.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// Independent random stream per (purpose, index) so samples are nested in the
/// sample count and independent of evaluation order.
fn stream(seed: u64, lane: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ lane.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

fn max_ratio(grid: &ManifoldGrid, emb: &Embedding, i: usize, j: usize) -> Result<Option<f64>> {
    let Some(geo) = grid.geodesic(i, j) else {
        return Ok(None);
    };
    let chord = dist(emb.point(i), emb.point(j));
    match (geo > 0.0, chord > 0.0) {
        (false, false) => Ok(None),
        (true, true) => Ok(Some((chord / geo).max(geo / chord))),
        _ => Err(Error::DegeneratePair { i, j, geodesic: geo, chord }),
    }
}

fn random_pair(grid: &ManifoldGrid, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let comp = rng.random_range(0..grid.n_components());
    let i = grid.node_at(comp, rng.random(), rng.random());
    let j = grid.node_at(comp, rng.random(), rng.random());
    (i, j)
}

/// Distortion estimate `L̂ = max max(chord/geodesic, geodesic/chord)` over every
/// stencil edge plus `n_pairs` pairs. All pairs are used when there are no more
/// than `n_pairs` of them. Pairs never straddle components.
pub fn estimate_lipschitz(grid: &ManifoldGrid, emb: &Embedding, n_pairs: usize, seed: u64) -> Result<f64> {
    if emb.len() != grid.len() {
        return Err(Error::InvalidInput("embedding does not match grid".into()));
    }
    let edges = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            grid.neighbors(i)
                .into_iter()
                .filter(|&j| j > i)
                .try_fold(1.0f64, |acc, j| Ok(acc.max(max_ratio(grid, emb, i, j)?.unwrap_or(1.0))))
        })
        .try_reduce(|| 1.0, |a, b| Ok(a.max(b)))?;

    let all_pairs: usize = grid.components().iter().map(|c| c.len * (c.len - 1) / 2).sum();
    let sampled = if all_pairs <= n_pairs {
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let c = grid.component_of(i);
                (i + 1..c.start + c.len).try_fold(1.0f64, |acc, j| {
                    Ok(acc.max(max_ratio(grid, emb, i, j)?.unwrap_or(1.0)))
                })
            })
            .try_reduce(|| 1.0, |a, b| Ok(a.max(b)))?
    } else {
        (0..n_pairs as u64)
            .into_par_iter()
            .map(|s| {
                let (i, j) = random_pair(grid, &mut stream(seed, 1, s));
                Ok(max_ratio(grid, emb, i, j)?.unwrap_or(1.0))
            })
            .try_reduce(|| 1.0, |a, b| Ok(a.max(b)))?
    };
    Ok(edges.max(sampled))
}

/// Options for [`estimate_curvature_constant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSearch {
    /// Configuration sizes `N`. `N = 2` is searched exhaustively on a coarse
    /// node set, every other size by seeded sampling.
    pub sizes: Vec<usize>,
    /// Random configurations per sampled size.
    pub n_samples: usize,
    pub seed: u64,
    /// Per-component node cap for the exhaustive `N = 2` search.
    pub coarse_max: usize,
    /// When set, only nodes flagged `true` may appear in a configuration.
    #[serde(skip)]
    pub region: Option<Vec<bool>>,
}

impl Default for CurvatureSearch {
    fn default() -> Self {
        CurvatureSearch {
            sizes: vec![2, 3, 5, 10, 50],
            n_samples: 4000,
            seed: 0,
            coarse_max: 64,
            region: None,
        }
    }
}

/// Minimum curvature ratio found for one configuration size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizeEstimate {
    pub size: usize,
    /// `None` when every configuration of this size was degenerate.
    pub c_hat: Option<f64>,
    pub evaluated: usize,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureEstimate {
    pub c_hat: f64,
    pub by_size: Vec<SizeEstimate>,
}

impl CurvatureEstimate {
    pub fn for_size(&self, size: usize) -> Option<f64> {
        self.by_size.iter().find(|s| s.size == size).and_then(|s| s.c_hat)
    }
}

/// `‖mean(m(x_i)) − m(z)‖ / mean(‖m(x_i) − m(z)‖²)`, or `None` below the cutoff.
pub fn curvature_ratio(emb: &Embedding, xs: &[usize], z: usize) -> Option<f64> {
    let d = emb.ambient_dim();
    let mz = emb.point(z);
    let mut mean = vec![0.0; d];
    let mut den = 0.0;
    for &x in xs {
        let mx = emb.point(x);
        for k in 0..d {
            mean[k] += mx[k];
        }
        den += dist2(mx, mz);
    }
    let n = xs.len() as f64;
    den /= n;
    if den < DEGENERATE_DENOMINATOR {
        return None;
    }
    let num = mean.iter().zip(mz).map(|(s, z)| (s / n - z).powi(2)).sum::<f64>().sqrt();
    Some(num / den)
}

fn fold_min(a: (Option<f64>, usize), b: (Option<f64>, usize)) -> (Option<f64>, usize) {
    let m = match (a.0, b.0) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    };
    (m, a.1 + b.1)
}

fn exhaustive_pairs(emb: &Embedding, nodes: &[usize]) -> (Option<f64>, usize) {
    nodes
        .par_iter()
        .map(|&z| {
            let mut best = None;
            let mut count = 0;
            for (a, &i) in nodes.iter().enumerate() {
                for &j in &nodes[a..] {
                    count += 1;
                    if let Some(r) = curvature_ratio(emb, &[i, j], z) {
                        best = Some(best.map_or(r, |b: f64| b.min(r)));
                    }
                }
            }
            (best, count)
        })
        .reduce(|| (None, 0), fold_min)
}

fn allowed(region: &Option<Vec<bool>>, node: usize) -> bool {
    region.as_ref().is_none_or(|r| r[node])
}

/// Draws one configuration: half the draws spread the points uniformly, the
/// other half cluster them around `z` at a random log-uniform scale.
fn sample_configuration(
    grid: &ManifoldGrid,
    size: usize,
    region: &Option<Vec<bool>>,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<usize>, usize)> {
    const TRIES: usize = 32;
    let mut z = None;
    let (mut zc, mut zu, mut zv) = (0, 0.0, 0.0);
    for _ in 0..TRIES {
        zc = rng.random_range(0..grid.n_components());
        zu = rng.random();
        zv = rng.random();
        let node = grid.node_at(zc, zu, zv);
        if allowed(region, node) {
            z = Some(node);
            break;
        }
    }
    let z = z?;
    let local = rng.random_bool(0.5);
    let spread = 10f64.powf(rng.random_range(-3.0..-0.3));
    let mut xs = Vec::with_capacity(size);
    for _ in 0..size {
        let mut chosen = None;
        for _ in 0..TRIES {
            let node = if local {
                let du = spread * rng.random_range(-1.0..1.0);
                let dv = spread * rng.random_range(-1.0..1.0);
                grid.node_at(zc, zu + du, zv + dv)
            } else {
                let c = rng.random_range(0..grid.n_components());
                let (u, v) = (rng.random(), rng.random());
                grid.node_at(c, u, v)
            };
            if allowed(region, node) {
                chosen = Some(node);
                break;
            }
        }
        xs.push(chosen?);
    }
    Some((xs, z))
}

/// Curvature-constant estimate `Ĉ`: the minimum ratio over every evaluated
/// configuration. Adding configurations can only lower it.
pub fn estimate_curvature_constant(
    grid: &ManifoldGrid,
    emb: &Embedding,
    search: &CurvatureSearch,
) -> Result<CurvatureEstimate> {
    if search.sizes.is_empty() || search.sizes.contains(&0) {
        return Err(Error::InvalidInput("configuration sizes must be nonempty and positive".into()));
    }
    if search.n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be >= 1".into()));
    }
    if emb.len() != grid.len() {
        return Err(Error::InvalidInput("embedding does not match grid".into()));
    }
    if search.region.as_ref().is_some_and(|r| r.len() != grid.len()) {
        return Err(Error::InvalidInput("region mask does not match grid".into()));
    }
    let mut by_size = Vec::with_capacity(search.sizes.len());
    for &size in &search.sizes {
        let est = if size == 2 {
            let nodes: Vec<usize> = grid
                .coarse_nodes(search.coarse_max)
                .into_iter()
                .filter(|&n| allowed(&search.region, n))
                .collect();
            let (c_hat, evaluated) = exhaustive_pairs(emb, &nodes);
            SizeEstimate {
                size,
                c_hat,
                evaluated,
                exhaustive: true,
            }
        } else {
            let (c_hat, evaluated) = (0..search.n_samples as u64)
                .into_par_iter()
                .map(|s| {
                    let mut rng = stream(search.seed, 2 + size as u64, s);
                    match sample_configuration(grid, size, &search.region, &mut rng) {
                        Some((xs, z)) => (curvature_ratio(emb, &xs, z), 1),
                        None => (None, 0),
                    }
                })
                .reduce(|| (None, 0), fold_min);
            SizeEstimate {
                size,
                c_hat,
                evaluated,
                exhaustive: false,
            }
        };
        by_size.push(est);
    }
    let c_hat = by_size
        .iter()
        .filter_map(|s| s.c_hat)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))))
        .ok_or(Error::DegenerateEmbedding)?;
    Ok(CurvatureEstimate { c_hat, by_size })
}

/// Sampling budget shared by the admissibility checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    #[serde(default = "Budget::default_pairs")]
    pub n_pairs: usize,
    #[serde(default = "Budget::default_samples")]
    pub n_samples: usize,
    #[serde(default = "Budget::default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "Budget::default_coarse")]
    pub coarse_max: usize,
    /// Cap on pair plus configuration evaluations.
    #[serde(default = "Budget::default_max_evaluations")]
    pub max_evaluations: usize,
    /// Cap on grid nodes.
    #[serde(default = "Budget::default_max_nodes")]
    pub max_nodes: usize,
}

impl Budget {
    fn default_pairs() -> usize {
        20_000
    }
    fn default_samples() -> usize {
        4000
    }
    fn default_sizes() -> Vec<usize> {
        vec![2, 3, 5, 10, 50]
    }
    fn default_coarse() -> usize {
        64
    }
    fn default_max_evaluations() -> usize {
        50_000_000
    }
    fn default_max_nodes() -> usize {
        1 << 20
    }

    /// Evaluations this budget plans on a grid with `components` components.
    pub fn planned_evaluations(&self, components: usize) -> usize {
        let c = self.coarse_max * components;
        let exhaustive = if self.sizes.contains(&2) { c * c * (c + 1) / 2 } else { 0 };
        let sampled = self.sizes.iter().filter(|&&s| s != 2).count() * self.n_samples;
        exhaustive + sampled + self.n_pairs
    }

    pub fn check_nodes(&self, nodes: usize) -> Result<()> {
        if nodes > self.max_nodes {
            return Err(Error::Config(format!("budget exceeded: {nodes} grid nodes > cap {}", self.max_nodes)));
        }
        Ok(())
    }

    pub fn check(&self, grid: &ManifoldGrid) -> Result<()> {
        self.check_nodes(grid.len())?;
        let planned = self.planned_evaluations(grid.n_components());
        if planned > self.max_evaluations {
            return Err(Error::Config(format!(
                "budget exceeded: {planned} planned evaluations > cap {}",
                self.max_evaluations
            )));
        }
        Ok(())
    }

    pub fn search(&self, seed: u64) -> CurvatureSearch {
        CurvatureSearch {
            sizes: self.sizes.clone(),
            n_samples: self.n_samples,
            seed,
            coarse_max: self.coarse_max,
            region: None,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            n_pairs: Self::default_pairs(),
            n_samples: Self::default_samples(),
            sizes: Self::default_sizes(),
            coarse_max: Self::default_coarse(),
            max_evaluations: Self::default_max_evaluations(),
            max_nodes: Self::default_max_nodes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCount {
    pub size: usize,
    pub evaluated: usize,
}

/// Estimated admissibility data of one embedding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    #[serde(rename = "L_hat")]
    pub l_hat: f64,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub centering_residual: f64,
    pub n2_exhaustive: bool,
    pub samples_used: Vec<SampleCount>,
    pub pairs_sampled: usize,
    pub seed: u64,
    pub curvature: CurvatureEstimate,
}

impl AdmissibilityReport {
    /// Reference lower bound `Ĉ / L̂⁴`.
    pub fn ref_bound(&self) -> f64 {
        self.c_hat / self.l_hat.powi(4)
    }
}

/// Bundles `L̂`, `Ĉ` and the centering residual.
pub fn check_admissible(grid: &ManifoldGrid, emb: &Embedding, budget: &Budget, seed: u64) -> Result<AdmissibilityReport> {
    budget.check(grid)?;
    let l_hat = estimate_lipschitz(grid, emb, budget.n_pairs, seed)?;
    let curvature = estimate_curvature_constant(grid, emb, &budget.search(seed))?;
    Ok(AdmissibilityReport {
        l_hat,
        c_hat: curvature.c_hat,
        centering_residual: emb.centering_residual(grid),
        n2_exhaustive: curvature.by_size.iter().any(|s| s.exhaustive),
        samples_used: curvature
            .by_size
            .iter()
            .map(|s| SampleCount {
                size: s.size,
                evaluated: s.evaluated,
            })
            .collect(),
        pairs_sampled: budget.n_pairs,
        seed,
        curvature,
    })
}

/// Ratio of the exhaustive `N = 2` estimate to the sampled larger-`N` estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct N2Report {
    pub c_n2: f64,
    pub sampled: Vec<SizeEstimate>,
    pub c_sampled: f64,
    /// `c_n2 / c_sampled`; near 1 when pairs already find the worst configurations.
    pub ratio: f64,
    /// Set when `ratio > 2`.
    pub violation: bool,
    pub seed: u64,
}

/// Sizes sampled against the `N = 2` search.
pub const N2_COMPARISON_SIZES: [usize; 4] = [3, 5, 10, 50];

pub fn test_n2_sufficiency(grid: &ManifoldGrid, emb: &Embedding, budget: &Budget, seed: u64) -> Result<N2Report> {
    budget.check(grid)?;
    let mut sizes = vec![2];
    sizes.extend(N2_COMPARISON_SIZES);
    let search = CurvatureSearch {
        sizes,
        ..budget.search(seed)
    };
    let est = estimate_curvature_constant(grid, emb, &search)?;
    let c_n2 = est.for_size(2).ok_or(Error::DegenerateEmbedding)?;
    let sampled: Vec<SizeEstimate> = est.by_size.iter().filter(|s| s.size != 2).copied().collect();
    let c_sampled = sampled
        .iter()
        .filter_map(|s| s.c_hat)
        .fold(f64::INFINITY, f64::min);
    if !c_sampled.is_finite() {
        return Err(Error::DegenerateEmbedding);
    }
    let ratio = c_n2 / c_sampled;
    Ok(N2Report {
        c_n2,
        sampled,
        c_sampled,
        ratio,
        violation: ratio > 2.0,
        seed,
    })
}
