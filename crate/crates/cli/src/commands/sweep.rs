use std::path::{Path, PathBuf};

use rmg_core::eval::{evaluate, MetricReport, METRIC_CSV_HEADER};
use serde::{Deserialize, Serialize};

use crate::commands::eval::{check_points, resolve_setup, MetricSetup, METRICS_FILE};
use crate::commands::sample::{cmd_sample, load_checkpoint, output_name, SampleFormat, SampleRunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{read_points, resolve, write_bytes, write_json};

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRunConfig {
    /// Sampling settings shared by all rows; `guidance_scale` must be unset.
    pub sample: SampleRunConfig,
    pub eval: MetricSetup,
    pub guidance_scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub guidance_scale: f64,
    pub dir: PathBuf,
    pub report: Option<MetricReport>,
    pub error: Option<String>,
}

/// Samples and evaluates once per guidance scale. Row `i` uses seed
/// `base + i` and writes into `row<i>/`; a failing row is recorded with its
/// error and the sweep continues. Writes `sweep.csv` with the metric
/// columns followed by `error`.
pub fn cmd_sweep(
    cfg: &SweepRunConfig,
    config_path: &Path,
    checkpoint_override: Option<&Path>,
    seed_override: Option<u64>,
    out: &Path,
) -> CliResult<Vec<SweepRow>> {
    if cfg.guidance_scales.is_empty() {
        return Err(CliError::input("guidance_scales: must not be empty"));
    }
    if cfg.sample.guidance_scale.is_some() {
        return Err(CliError::input("sample.guidance_scale: set per row through guidance_scales"));
    }
    if cfg.sample.format != SampleFormat::Jsonl {
        return Err(CliError::input("sample.format: sweeps evaluate jsonl samples"));
    }
    let ck_path = match (checkpoint_override, &cfg.sample.checkpoint) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => resolve(config_path, p),
        (None, None) => return Err(CliError::input("sample.checkpoint: no checkpoint given")),
    };
    let ck_manifold = load_checkpoint(&ck_path)?.header.manifold;
    let setup = resolve_setup(&cfg.eval, config_path, Some(&ck_manifold))?;
    let base = seed_override.unwrap_or(cfg.sample.seed);

    let mut rows = Vec::with_capacity(cfg.guidance_scales.len());
    for (i, &w) in cfg.guidance_scales.iter().enumerate() {
        let seed = base + i as u64;
        let dir = out.join(format!("row{i}"));
        let row_cfg = SampleRunConfig { guidance_scale: Some(w), seed, ..cfg.sample.clone() };
        let result = cmd_sample(&row_cfg, config_path, Some(&ck_path), &dir).and_then(|_| {
            let samples = read_points(&dir.join(output_name(SampleFormat::Jsonl)))?;
            check_points(&setup.manifold, &samples, "samples")?;
            let report = evaluate(&setup.manifold, &samples, &setup.reference, &setup.modes, &setup.cfg)?;
            write_json(&dir.join(METRICS_FILE), &report)?;
            Ok(report)
        });
        let (report, error) = match result {
            Ok(r) => (Some(r), None),
            Err(e) => {
                log::warn!("sweep row {i} (guidance {w}) failed: {e}");
                (None, Some(e.to_string()))
            }
        };
        rows.push(SweepRow { seed, guidance_scale: w, dir, report, error });
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = METRIC_CSV_HEADER.split(',').collect();
    header.push("error");
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in &rows {
        let mut rec: Vec<String> = match &row.report {
            Some(r) => r.csv_row(row.seed, row.guidance_scale).split(',').map(String::from).collect(),
            None => {
                let mut v = vec![row.seed.to_string(), row.guidance_scale.to_string()];
                v.resize(header.len() - 1, String::new());
                v
            }
        };
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_bytes(&out.join(SWEEP_FILE), &bytes)?;
    Ok(rows)
}
