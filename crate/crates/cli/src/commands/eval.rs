use std::path::{Path, PathBuf};

use rmg_core::eval::{evaluate, EvalConfig, MetricReport, ToyTaskSpec};
use rmg_core::manifold::{ManifoldSpec, Point};
use serde::{Deserialize, Serialize};

use crate::commands::sample::load_checkpoint;
use crate::error::{CliError, CliResult};
use crate::io::{read_points, resolve, write_json};

pub const METRICS_FILE: &str = "metrics.json";

/// Where the manifold and the modes come from. Shared by `eval` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSetup {
    pub reference: PathBuf,
    /// Taken from `checkpoint` when absent.
    #[serde(default)]
    pub manifold: Option<ManifoldSpec>,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    /// Explicit modes; otherwise the component means of `task`.
    #[serde(default)]
    pub modes: Option<Vec<Point>>,
    #[serde(default)]
    pub task: Option<ToyTaskSpec>,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default = "default_radius")]
    pub assign_radius: f64,
}

fn default_radius() -> f64 {
    EvalConfig::default().assign_radius
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRunConfig {
    pub samples: PathBuf,
    pub reference: PathBuf,
    #[serde(default)]
    pub manifold: Option<ManifoldSpec>,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[serde(default)]
    pub modes: Option<Vec<Point>>,
    #[serde(default)]
    pub task: Option<ToyTaskSpec>,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default = "default_radius")]
    pub assign_radius: f64,
}

impl EvalRunConfig {
    pub fn setup(&self) -> MetricSetup {
        MetricSetup {
            reference: self.reference.clone(),
            manifold: self.manifold.clone(),
            checkpoint: self.checkpoint.clone(),
            modes: self.modes.clone(),
            task: self.task.clone(),
            bandwidth: self.bandwidth,
            assign_radius: self.assign_radius,
        }
    }
}

pub(crate) struct ResolvedSetup {
    pub manifold: ManifoldSpec,
    pub reference: Vec<Point>,
    pub modes: Vec<Point>,
    pub cfg: EvalConfig,
}

pub(crate) fn resolve_setup(setup: &MetricSetup, config_path: &Path, ck_hint: Option<&ManifoldSpec>) -> CliResult<ResolvedSetup> {
    let manifold = match (&setup.manifold, &setup.checkpoint, ck_hint) {
        (Some(m), _, _) => m.clone(),
        (None, Some(p), _) => load_checkpoint(&resolve(config_path, p))?.header.manifold,
        (None, None, Some(m)) => m.clone(),
        (None, None, None) => return Err(CliError::input("manifold: give a manifold or a checkpoint")),
    };
    let modes = match (&setup.modes, &setup.task) {
        (Some(m), _) => m.clone(),
        (None, Some(t)) => t.modes(),
        (None, None) => return Err(CliError::input("modes: give modes or a task")),
    };
    if modes.is_empty() {
        return Err(CliError::input("modes: need at least one mode"));
    }
    check_points(&manifold, &modes, "modes")?;
    if let Some(b) = setup.bandwidth {
        if !(b > 0.0 && b.is_finite()) {
            return Err(CliError::input("bandwidth: must be positive"));
        }
    }
    let reference = read_points(&resolve(config_path, &setup.reference))?;
    check_points(&manifold, &reference, "reference")?;
    Ok(ResolvedSetup {
        manifold,
        reference,
        modes,
        cfg: EvalConfig { bandwidth: setup.bandwidth, assign_radius: setup.assign_radius },
    })
}

pub(crate) fn check_points(manifold: &ManifoldSpec, pts: &[Point], what: &str) -> CliResult<()> {
    for (i, p) in pts.iter().enumerate() {
        if p.len() != manifold.total_ambient_dim() {
            return Err(CliError::input(format!(
                "{what}[{i}]: dimension {} does not match the manifold dimension {}",
                p.len(),
                manifold.total_ambient_dim()
            )));
        }
    }
    Ok(())
}

/// Writes `metrics.json`. Metric values never fail the command.
pub fn cmd_eval(cfg: &EvalRunConfig, config_path: &Path, out: &Path) -> CliResult<MetricReport> {
    let setup = resolve_setup(&cfg.setup(), config_path, None)?;
    let samples = read_points(&resolve(config_path, &cfg.samples))?;
    check_points(&setup.manifold, &samples, "samples")?;
    let report = evaluate(&setup.manifold, &samples, &setup.reference, &setup.modes, &setup.cfg)?;
    write_json(&out.join(METRICS_FILE), &report)?;
    Ok(report)
}
