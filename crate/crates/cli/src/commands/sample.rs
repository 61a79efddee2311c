use std::path::{Path, PathBuf};

use rmg_core::flow::{sample_ode_batch, GuidanceConfig, IntegratorConfig};
use rmg_core::motion::{point_to_frame, MotionSequence};
use rmg_core::net::Checkpoint;
use rmg_core::rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{points_jsonl, resolve, write_bytes, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFormat {
    #[default]
    Jsonl,
    Motion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleRunConfig {
    pub checkpoint: Option<PathBuf>,
    pub num_steps: usize,
    /// Classifier-free guidance scale; needs `condition`. Absent means the
    /// plain conditional (or unconditional) field.
    pub guidance_scale: Option<f64>,
    pub seed: u64,
    pub num_samples: usize,
    /// Sample with the EMA shadow weights rather than the raw ones.
    pub use_ema: bool,
    pub condition: Option<usize>,
    pub format: SampleFormat,
    /// Frame rate written into motion output.
    pub fps: f64,
}

impl Default for SampleRunConfig {
    fn default() -> Self {
        SampleRunConfig {
            checkpoint: None,
            num_steps: 100,
            guidance_scale: None,
            seed: 0,
            num_samples: 1000,
            use_ema: true,
            condition: None,
            format: SampleFormat::Jsonl,
            fps: 30.0,
        }
    }
}

/// Sidecar written next to the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub checkpoint: String,
    pub output: String,
    pub format: SampleFormat,
    pub num_samples: usize,
    pub num_steps: usize,
    pub guidance_scale: Option<f64>,
    pub condition: Option<usize>,
    pub seed: u64,
    pub use_ema: bool,
    pub max_step_violation: f64,
}

pub const META_FILE: &str = "samples.meta.json";

pub fn output_name(format: SampleFormat) -> &'static str {
    match format {
        SampleFormat::Jsonl => "samples.jsonl",
        SampleFormat::Motion => "samples.motion.json",
    }
}

pub fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    Checkpoint::from_bytes(&bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Integrates the learned ODE from prior draws and writes the samples plus
/// a metadata sidecar into `out`.
pub fn cmd_sample(
    cfg: &SampleRunConfig,
    config_path: &Path,
    checkpoint_override: Option<&Path>,
    out: &Path,
) -> CliResult<SampleMetadata> {
    let ck_path = match (checkpoint_override, &cfg.checkpoint) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => resolve(config_path, p),
        (None, None) => return Err(CliError::input("checkpoint: no checkpoint given")),
    };
    let integ = IntegratorConfig::new(cfg.num_steps).map_err(|_| CliError::input("num_steps: must be >= 1"))?;
    let guidance = match cfg.guidance_scale {
        None => GuidanceConfig::disabled(),
        Some(w) => {
            if cfg.condition.is_none() {
                return Err(CliError::input("guidance_scale: requires a condition"));
            }
            GuidanceConfig::with_scale(w).map_err(|e| CliError::input(format!("guidance_scale: {e}")))?
        }
    };
    if !(cfg.fps > 0.0 && cfg.fps.is_finite()) {
        return Err(CliError::input("fps: must be positive"));
    }
    let ck = load_checkpoint(&ck_path)?;
    let manifold = &ck.header.manifold;
    if manifold.total_ambient_dim() != ck.header.network.input_dim {
        return Err(CliError::input(format!(
            "checkpoint manifold has dimension {} but the network expects {}",
            manifold.total_ambient_dim(),
            ck.header.network.input_dim
        )));
    }
    let net = ck.network(cfg.use_ema)?;
    let conds = vec![cfg.condition; cfg.num_samples];
    let result =
        sample_ode_batch(manifold, &net, &ck.header.prior, &integ, &guidance, &conds, &mut rng::seeded(cfg.seed))?;

    let body = match cfg.format {
        SampleFormat::Jsonl => points_jsonl(result.points.iter().map(|p| p.as_slice())),
        SampleFormat::Motion => {
            let (Some(repr), Some(skel)) = (&ck.header.representation, &ck.header.skeleton) else {
                return Err(CliError::input("format: motion output needs a checkpoint trained on motion data"));
            };
            let frames = result
                .points
                .iter()
                .map(|p| point_to_frame(p, repr, skel).map(|r| r.frame))
                .collect::<Result<Vec<_>, _>>()?;
            MotionSequence::new(cfg.fps, skel.clone(), frames)?.to_json()
        }
    };
    let output = output_name(cfg.format);
    write_bytes(&out.join(output), body.as_bytes())?;
    let meta = SampleMetadata {
        checkpoint: ck_path.display().to_string(),
        output: output.to_string(),
        format: cfg.format,
        num_samples: cfg.num_samples,
        num_steps: cfg.num_steps,
        guidance_scale: cfg.guidance_scale,
        condition: cfg.condition,
        seed: cfg.seed,
        use_ema: cfg.use_ema,
        max_step_violation: result.max_step_violation,
    };
    write_json(&out.join(META_FILE), &meta)?;
    Ok(meta)
}
