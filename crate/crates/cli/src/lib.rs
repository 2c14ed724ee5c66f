//! Batch driver: one subcommand per experiment, one TOML config per run,
//! three output files per run.
//!
//! Exit codes: `0` when every verdict passes, `2` when a verdict fails (the
//! outputs are still written), `1` when the run could not be carried out.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use serde::Serialize;
use ucp_core::embed::Budget;
use ucp_core::grid::GridSpec;
use ucp_core::lab::{self, FamilySpec, Outcome};

pub use config::{ConfigError, Experiment, RunConfig};
pub use output::Provenance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERDICT_FAILED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] ucp_core::Error),
    #[error("cannot write outputs to {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Options coming from the command line rather than the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Outcome of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run_id: String,
    pub out_dir: PathBuf,
    pub passed: bool,
    pub exit_code: i32,
    pub failed: Vec<String>,
}

fn default_disconnected() -> (GridSpec, ucp_core::embed::EmbeddingSpec, FamilySpec) {
    (
        GridSpec::Circles { count: 2, n: 512 },
        ucp_core::embed::EmbeddingSpec::CircleUnion {
            centers: vec![vec![-3.0, 0.0], vec![3.0, 0.0]],
            radius: 1.0,
        },
        FamilySpec::TwoComponent {
            alphas: vec![0.3, 0.5],
            kappas: vec![0.0, 1.0, 4.0],
        },
    )
}

fn describe_grid(spec: &GridSpec) -> String {
    let json = serde_json::to_value(spec).expect("grid spec serializes");
    let obj = json.as_object().expect("tagged enum");
    let mut parts = vec![obj["kind"].as_str().unwrap_or("?").to_string()];
    for (k, v) in obj.iter().filter(|(k, _)| *k != "kind") {
        parts.push(format!("{k}={v}"));
    }
    parts.join(" ")
}

fn resolution(cfg: &RunConfig, experiment: Experiment) -> String {
    match experiment {
        Experiment::Scaling => format!("circle n={}", cfg.scaling.n),
        Experiment::Inverse => {
            let [a, b] = cfg.inverse.resolutions;
            format!("circle n={a},{b}")
        }
        Experiment::Degenerate => format!("ball dim=1 n_r={}", cfg.degenerate.n_r),
        Experiment::Disconnected => describe_grid(cfg.grid.as_ref().unwrap_or(&default_disconnected().0)),
        _ => cfg.grid.as_ref().map(describe_grid).unwrap_or_default(),
    }
}

fn check_nodes(budget: &Budget, spec: &GridSpec, refine: bool) -> Result<(), RunError> {
    budget.check_nodes(spec.node_count())?;
    if refine {
        budget.check_nodes(spec.refined().node_count())?;
    }
    Ok(())
}

fn finish<R: Serialize>(
    cfg: &RunConfig,
    experiment: Experiment,
    out_dir: &Path,
    mut outcome: Outcome<R>,
) -> Result<RunSummary, RunError> {
    let prov = Provenance {
        tool: "ucp",
        version: env!("CARGO_PKG_VERSION"),
        experiment: experiment.id().to_string(),
        run_id: cfg.run_id(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        grid_resolution: resolution(cfg, experiment),
    };
    outcome.result.config_hash = prov.config_hash.clone();
    let passed = outcome.result.passed();
    let exit_code = if passed { EXIT_OK } else { EXIT_VERDICT_FAILED };
    let config = serde_json::to_value(cfg).expect("config serializes");
    output::write_outputs(out_dir, &prov, config, &outcome, exit_code).map_err(|source| RunError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let failed = outcome.result.verdicts.iter().filter(|v| !v.passed).map(|v| v.name.clone()).collect();
    Ok(RunSummary {
        run_id: prov.run_id,
        out_dir: out_dir.to_path_buf(),
        passed,
        exit_code,
        failed,
    })
}

/// Resolves overrides, runs `experiment` and writes its outputs.
pub fn run(experiment: Experiment, mut cfg: RunConfig, overrides: &Overrides) -> Result<RunSummary, RunError> {
    if let Some(e) = cfg.experiment {
        if e != experiment {
            return Err(ConfigError::ExperimentMismatch {
                config: e.to_string(),
                command: experiment.to_string(),
            }
            .into());
        }
    }
    cfg.experiment = Some(experiment);
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    let out_dir = overrides
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(experiment.id()));
    let seed = cfg.seed;
    let budget = &cfg.budget;
    match experiment {
        Experiment::Constants => {
            let spec = cfg.require_grid(experiment)?;
            check_nodes(budget, spec, false)?;
            let grid = spec.build()?;
            let emb = cfg.require_embedding(experiment)?.build(&grid)?;
            let out = lab::constants_check(&grid, &emb, &cfg.constants, budget, seed)?;
            finish(&cfg, experiment, &out_dir, out)
        }
        Experiment::Verify => {
            let spec = cfg.require_grid(experiment)?;
            check_nodes(budget, spec, true)?;
            let emb = cfg.require_embedding(experiment)?;
            let family = cfg.require_family(experiment)?;
            let out = lab::theorem_sweep(spec, emb, family, &cfg.sweep, budget, seed)?;
            finish(&cfg, experiment, &out_dir, out)
        }
        Experiment::Scaling => {
            budget.check_nodes(cfg.scaling.n)?;
            let out = lab::scaling_experiment(&cfg.scaling, budget, seed)?;
            finish(&cfg, experiment, &out_dir, out)
        }
        Experiment::Inverse => {
            for n in cfg.inverse.resolutions {
                budget.check_nodes(n)?;
            }
            let out = lab::inverse_experiment(&cfg.inverse, budget, seed)?;
            finish(&cfg, experiment, &out_dir, out)
        }
        Experiment::Degenerate => {
            budget.check_nodes(2 * cfg.degenerate.n_r + 1)?;
            let out = lab::degenerate_k_experiment(&cfg.degenerate, seed)?;
            finish(&cfg, experiment, &out_dir, out)
        }
        Experiment::Disconnected => {
            let (g, e, f) = default_disconnected();
            let spec = cfg.grid.as_ref().unwrap_or(&g);
            check_nodes(budget, spec, true)?;
            let emb = cfg.embedding.as_ref().unwrap_or(&e);
            let family = cfg.family.as_ref().unwrap_or(&f);
            let out = lab::disconnected_sweep(spec, emb, family, &cfg.sweep, budget, seed)?;
            finish(&cfg, experiment, &out_dir, out)
        }
        Experiment::N2check => {
            let spec = cfg.require_grid(experiment)?;
            check_nodes(budget, spec, false)?;
            let grid = spec.build()?;
            let emb = cfg.require_embedding(experiment)?.build(&grid)?;
            let out = lab::n2_check(&grid, &emb, budget, seed)?;
            finish(&cfg, experiment, &out_dir, out)
        }
    }
}
