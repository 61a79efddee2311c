use std::path::{Path, PathBuf};

use rmg_core::motion::{
    config_to_manifold, convert_to_position_format, frame_to_point, point_to_frame, MotionSequence,
    RepresentationConfig, Skeleton,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{points_jsonl, read_points, read_text, resolve, write_bytes, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvertTarget {
    /// Motion JSON → one manifold point per frame (`points.jsonl`).
    #[serde(rename = "rmg-point")]
    RmgPoint,
    /// Motion JSON → joint positions and velocities (`positions.json`).
    #[serde(rename = "positions")]
    Positions,
    /// Point `.jsonl` → motion JSON (`motion.json`); needs a skeleton.
    #[serde(rename = "motion")]
    Motion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvertRunConfig {
    pub input: PathBuf,
    pub target: ConvertTarget,
    #[serde(default)]
    pub representation: Option<RepresentationConfig>,
    /// Skeleton JSON for the `motion` target.
    #[serde(default)]
    pub skeleton: Option<PathBuf>,
    #[serde(default = "default_fps")]
    pub fps: f64,
}

fn default_fps() -> f64 {
    30.0
}

pub fn output_name(target: ConvertTarget) -> &'static str {
    match target {
        ConvertTarget::RmgPoint => "points.jsonl",
        ConvertTarget::Positions => "positions.json",
        ConvertTarget::Motion => "motion.json",
    }
}

fn representation(cfg: &ConvertRunConfig, joints: usize) -> CliResult<RepresentationConfig> {
    let r = cfg.representation.unwrap_or(RepresentationConfig::translation_rotation(joints));
    r.validate()?;
    if r.joints != joints {
        return Err(CliError::input(format!("representation.joints: {} but the skeleton has {joints}", r.joints)));
    }
    Ok(r)
}

/// Converts between motion JSON, manifold points and joint positions.
/// With temporal-difference factors the last frame has no successor, so
/// `rmg-point` emits one row fewer than there are frames.
pub fn cmd_convert(cfg: &ConvertRunConfig, config_path: &Path, out: &Path) -> CliResult<PathBuf> {
    let input = resolve(config_path, &cfg.input);
    let target = out.join(output_name(cfg.target));
    match cfg.target {
        ConvertTarget::RmgPoint => {
            let (seq, _) = MotionSequence::from_json(&read_text(&input)?)?;
            let repr = representation(cfg, seq.skeleton.joint_count())?;
            let usable = if repr.has_differences() { seq.len().saturating_sub(1) } else { seq.len() };
            let points = (0..usable)
                .map(|i| frame_to_point(&seq.frames[i], &repr, &seq.skeleton, seq.frames.get(i + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            write_bytes(&target, points_jsonl(points.iter().map(|p| p.as_slice())).as_bytes())?;
        }
        ConvertTarget::Positions => {
            let (seq, _) = MotionSequence::from_json(&read_text(&input)?)?;
            write_json(&target, &convert_to_position_format(&seq)?)?;
        }
        ConvertTarget::Motion => {
            let skel_path = cfg.skeleton.as_ref().ok_or_else(|| CliError::input("skeleton: required for motion target"))?;
            let skel: Skeleton = serde_json::from_str(&read_text(&resolve(config_path, skel_path))?)
                .map_err(|e| CliError::input(format!("skeleton: {e}")))?;
            let repr = representation(cfg, skel.joint_count())?;
            let manifold = config_to_manifold(&repr)?;
            let points = read_points(&input)?;
            let mut frames = Vec::with_capacity(points.len());
            for (i, p) in points.iter().enumerate() {
                if p.len() != manifold.total_ambient_dim() {
                    return Err(CliError::input(format!(
                        "frame {i}: point has {} coordinates, representation {} needs {}",
                        p.len(),
                        repr.label(),
                        manifold.total_ambient_dim()
                    )));
                }
                let rec = point_to_frame(p, &repr, &skel).map_err(|e| CliError::input(format!("frame {i}: {e}")))?;
                frames.push(rec.frame);
            }
            let seq = MotionSequence::new(cfg.fps, skel, frames)?;
            write_bytes(&target, seq.to_json().as_bytes())?;
        }
    }
    Ok(target)
}
