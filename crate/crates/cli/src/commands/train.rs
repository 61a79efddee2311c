use std::path::{Path, PathBuf};

use rmg_core::eval::{generate_toy_dataset, ToyTaskSpec};
use rmg_core::flow::reference_point;
use rmg_core::manifold::{ManifoldSpec, Point, WrappedGaussian};
use rmg_core::motion::{config_to_manifold, frame_to_point, MotionSequence, RepresentationConfig, Skeleton};
use rmg_core::net::{train, Checkpoint, Dataset, NetworkSpec, TrainConfig};
use rmg_core::rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{read_points, read_text, resolve, write_bytes};

pub const CHECKPOINT_FILE: &str = "checkpoint.rmg";
pub const LOSS_FILE: &str = "losses.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Toy(ToyTaskSpec),
    /// A `.jsonl` point file; all points unconditional.
    Points { path: PathBuf },
    /// Every frame of a motion JSON file under `representation`.
    Motion { path: PathBuf, representation: RepresentationConfig },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkShape {
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub time_embed_dim: usize,
    pub cond_embed_dim: usize,
}

impl Default for NetworkShape {
    fn default() -> Self {
        NetworkShape { hidden_dim: 144, num_layers: 3, time_embed_dim: 16, cond_embed_dim: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    /// Defaults to the representation's rest pose, or the manifold base point.
    pub mean: Option<Point>,
    pub scale: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig { mean: None, scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub data: DataSource,
    #[serde(default)]
    pub manifold: Option<ManifoldSpec>,
    #[serde(default)]
    pub network: NetworkShape,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    /// Seed for toy-data generation; defaults to the training seed.
    #[serde(default)]
    pub data_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub checkpoint: PathBuf,
    pub losses: PathBuf,
    pub steps: usize,
    pub final_loss: Option<f64>,
}

struct Prepared {
    manifold: ManifoldSpec,
    data: Dataset,
    classes: usize,
    prior_mean: Point,
    representation: Option<RepresentationConfig>,
    skeleton: Option<Skeleton>,
}

fn prepare(cfg: &TrainRunConfig, config_path: &Path) -> CliResult<Prepared> {
    let data_seed = cfg.data_seed.unwrap_or(cfg.train.seed);
    match &cfg.data {
        DataSource::Toy(task) => {
            let manifold = match (&cfg.manifold, task) {
                (Some(m), _) => m.clone(),
                (None, ToyTaskSpec::RotatingJoint { joints, .. }) => {
                    config_to_manifold(&RepresentationConfig::translation_rotation(*joints))?
                }
                (None, _) => return Err(CliError::input("manifold: required for this data source")),
            };
            let data = generate_toy_dataset(task, &manifold, &mut rng::stream(data_seed, 2))?;
            let prior_mean = manifold.base_point();
            Ok(Prepared { manifold, data, classes: task.num_classes(), prior_mean, representation: None, skeleton: None })
        }
        DataSource::Points { path } => {
            let manifold = cfg.manifold.clone().ok_or_else(|| CliError::input("manifold: required for point data"))?;
            let points = read_points(&resolve(config_path, path))?;
            for (i, p) in points.iter().enumerate() {
                let v = manifold.validate_point(p, 1e-6);
                if !v.is_empty() {
                    return Err(CliError::input(format!("data point {i} is not on the manifold: {v:?}")));
                }
            }
            let prior_mean = manifold.base_point();
            Ok(Prepared {
                manifold,
                data: Dataset::unconditional(points),
                classes: 0,
                prior_mean,
                representation: None,
                skeleton: None,
            })
        }
        DataSource::Motion { path, representation } => {
            representation.validate()?;
            let (seq, _) = MotionSequence::from_json(&read_text(&resolve(config_path, path))?)?;
            if representation.joints != seq.skeleton.joint_count() {
                return Err(CliError::input("representation.joints: does not match the skeleton"));
            }
            let manifold = config_to_manifold(representation)?;
            if let Some(m) = &cfg.manifold {
                if m != &manifold {
                    return Err(CliError::input("manifold: does not match the representation"));
                }
            }
            let usable = if representation.has_differences() { seq.len().saturating_sub(1) } else { seq.len() };
            let points = (0..usable)
                .map(|i| frame_to_point(&seq.frames[i], representation, &seq.skeleton, seq.frames.get(i + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            let prior_mean = reference_point(representation, &seq.skeleton)?;
            Ok(Prepared {
                manifold,
                data: Dataset::unconditional(points),
                classes: 0,
                prior_mean,
                representation: Some(*representation),
                skeleton: Some(seq.skeleton),
            })
        }
    }
}

/// Trains and writes `checkpoint.rmg` and `losses.csv` into `out`.
pub fn cmd_train(cfg: &TrainRunConfig, config_path: &Path, out: &Path) -> CliResult<TrainSummary> {
    cfg.train.validate()?;
    if !(cfg.prior.scale >= 0.0 && cfg.prior.scale.is_finite()) {
        return Err(CliError::input("prior.scale: must be non-negative"));
    }
    let p = prepare(cfg, config_path)?;
    let net = NetworkSpec {
        input_dim: p.manifold.total_ambient_dim(),
        hidden_dim: cfg.network.hidden_dim,
        num_layers: cfg.network.num_layers,
        time_embed_dim: cfg.network.time_embed_dim,
        cond_embed_dim: cfg.network.cond_embed_dim,
        num_condition_classes: p.classes + 1,
    };
    net.validate()?;
    let mean = cfg.prior.mean.clone().unwrap_or(p.prior_mean);
    let prior = WrappedGaussian::isotropic(&p.manifold, mean, cfg.prior.scale)
        .map_err(|e| CliError::input(format!("prior.mean: {e}")))?;
    log::info!("training {} parameters on {} points", net.param_count(), p.data.len());
    let result = train(&cfg.train, net, &p.manifold, &p.data, &prior)?;
    let ck = Checkpoint::from_training(&result, cfg.train, p.manifold, prior, p.representation, p.skeleton);
    let checkpoint = out.join(CHECKPOINT_FILE);
    let losses = out.join(LOSS_FILE);
    write_bytes(&checkpoint, &ck.to_bytes())?;
    write_bytes(&losses, result.history_csv().as_bytes())?;
    Ok(TrainSummary { checkpoint, losses, steps: result.history.len(), final_loss: result.history.last().map(|r| r.loss) })
}
