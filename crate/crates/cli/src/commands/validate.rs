use std::path::{Path, PathBuf};

use rmg_core::manifold::{ManifoldSpec, Violation};
use rmg_core::motion::MotionSequence;
use serde::{Deserialize, Serialize};

use crate::commands::sample::load_checkpoint;
use crate::error::{CliError, CliResult};
use crate::io::{read_points, read_text, resolve, write_json};

pub const VALIDATION_FILE: &str = "validation.json";
const MAX_LISTED: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidateFormat {
    Points,
    Motion,
    Checkpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateRunConfig {
    pub input: PathBuf,
    pub format: ValidateFormat,
    /// Needed for `points` unless `checkpoint` is given.
    #[serde(default)]
    pub manifold: Option<ManifoldSpec>,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointViolation {
    pub index: usize,
    #[serde(flatten)]
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checked: usize,
    pub invalid_count: usize,
    pub max_deviation: f64,
    /// At most the first 100.
    pub violations: Vec<PointViolation>,
    pub hemisphere_flips: usize,
}

/// Checks a point file, motion file or checkpoint and writes
/// `validation.json`. Returns [`CliError::InvalidData`] when anything is
/// out of tolerance.
pub fn cmd_validate(cfg: &ValidateRunConfig, config_path: &Path, out: &Path) -> CliResult<ValidationReport> {
    if !(cfg.tolerance >= 0.0 && cfg.tolerance.is_finite()) {
        return Err(CliError::input("tolerance: must be non-negative"));
    }
    let input = resolve(config_path, &cfg.input);
    let mut report = ValidationReport {
        valid: true,
        checked: 0,
        invalid_count: 0,
        max_deviation: 0.0,
        violations: Vec::new(),
        hemisphere_flips: 0,
    };
    match cfg.format {
        ValidateFormat::Points => {
            let manifold = match (&cfg.manifold, &cfg.checkpoint) {
                (Some(m), _) => m.clone(),
                (None, Some(p)) => load_checkpoint(&resolve(config_path, p))?.header.manifold,
                (None, None) => return Err(CliError::input("manifold: required for points")),
            };
            let points = read_points(&input)?;
            report.checked = points.len();
            for (index, p) in points.iter().enumerate() {
                let v = manifold.validate_point(p, cfg.tolerance);
                if !v.is_empty() {
                    report.invalid_count += 1;
                }
                for violation in v {
                    report.max_deviation = report.max_deviation.max(violation.deviation);
                    if report.violations.len() < MAX_LISTED {
                        report.violations.push(PointViolation { index, violation });
                    }
                }
                if p.len() == manifold.total_ambient_dim() {
                    report.max_deviation = report.max_deviation.max(manifold.max_point_deviation(p));
                }
            }
        }
        ValidateFormat::Motion => {
            let (seq, load) = MotionSequence::from_json(&read_text(&input)?)?;
            report.checked = seq.len();
            report.hemisphere_flips = load.hemisphere_flips;
        }
        ValidateFormat::Checkpoint => {
            let ck = load_checkpoint(&input)?;
            report.checked = 1;
            if let Some(bad) = ck.params.iter().chain(&ck.ema).position(|v| !v.is_finite()) {
                return Err(CliError::InvalidData(format!("checkpoint value {bad} is not finite")));
            }
            let mean = &ck.header.prior.mean;
            report.max_deviation = ck.header.manifold.max_point_deviation(mean);
        }
    }
    report.valid = report.invalid_count == 0;
    write_json(&out.join(VALIDATION_FILE), &report)?;
    if report.valid {
        Ok(report)
    } else {
        Err(CliError::InvalidData(format!(
            "{} of {} points violate the manifold constraints (max deviation {:e})",
            report.invalid_count, report.checked, report.max_deviation
        )))
    }
}
