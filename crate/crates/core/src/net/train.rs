use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::make_flow_batch;
use crate::manifold::{ManifoldSpec, Point, WrappedGaussian};
use crate::rng;

use super::checkpoint::RngState;
use super::mlp::{loss_and_grad, NetworkSpec, VectorFieldParams};
use super::optim::{clip_gradient, lr_at, AdamW, EmaState};

const TRAIN_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_lr: f64,
    pub warmup_ratio: f64,
    pub total_steps: usize,
    pub batch_size: usize,
    pub grad_clip_norm: f64,
    pub ema_decay: f64,
    pub weight_decay: f64,
    /// Probability of replacing a condition by the null class.
    pub cond_dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_lr: 1e-4,
            warmup_ratio: 0.08,
            total_steps: 1000,
            batch_size: 256,
            grad_clip_norm: 0.5,
            ema_decay: 0.999,
            weight_decay: 1e-2,
            cond_dropout: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be a positive number, got {v}")))
            }
        };
        let unit = |field: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must lie in [0, 1], got {v}")))
            }
        };
        positive("max_lr", self.max_lr)?;
        positive("grad_clip_norm", self.grad_clip_norm)?;
        unit("warmup_ratio", self.warmup_ratio)?;
        unit("ema_decay", self.ema_decay)?;
        unit("cond_dropout", self.cond_dropout)?;
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::invalid("weight_decay", "must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be >= 1"));
        }
        Ok(())
    }
}

/// Training points with optional class labels (`None` = unconditional).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Point>,
    pub conditions: Vec<Option<usize>>,
}

impl Dataset {
    pub fn unconditional(points: Vec<Point>) -> Self {
        let conditions = vec![None; points.len()];
        Dataset { points, conditions }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub lr: f64,
    pub loss: f64,
    /// Norm before clipping.
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: VectorFieldParams,
    pub ema: EmaState,
    pub optimizer: AdamW,
    pub history: Vec<LossRecord>,
    pub rng: RngState,
}

impl TrainOutput {
    /// Network with the EMA shadow weights, the one used for sampling.
    pub fn ema_params(&self) -> VectorFieldParams {
        let mut p = self.params.clone();
        p.flat.clone_from(&self.ema.shadow);
        p
    }

    pub fn history_csv(&self) -> String {
        history_csv(&self.history)
    }
}

pub fn history_csv(history: &[LossRecord]) -> String {
    let mut out = String::from("step,lr,loss,grad_norm\n");
    for r in history {
        out.push_str(&format!("{},{:e},{:e},{:e}\n", r.step, r.lr, r.loss, r.grad_norm));
    }
    out
}

/// Trains a fresh network. Each step draws `batch_size` data indices with
/// replacement, builds a flow batch, and applies one clipped AdamW update
/// followed by an EMA update. Deterministic for a fixed `cfg.seed`.
pub fn train(
    cfg: &TrainConfig,
    net: NetworkSpec,
    manifold: &ManifoldSpec,
    data: &Dataset,
    prior: &WrappedGaussian,
) -> Result<TrainOutput> {
    cfg.validate()?;
    net.validate()?;
    prior.validate(manifold)?;
    if net.input_dim != manifold.total_ambient_dim() {
        return Err(Error::DimensionMismatch { expected: manifold.total_ambient_dim(), got: net.input_dim });
    }
    if data.points.len() != data.conditions.len() {
        return Err(Error::ShapeMismatch("dataset points and conditions differ in length".into()));
    }
    if data.is_empty() && cfg.total_steps > 0 {
        return Err(Error::EmptyBatch);
    }
    for c in data.conditions.iter().flatten() {
        if c + 1 >= net.num_condition_classes {
            return Err(Error::UnknownConditionClass { class: *c, available: net.num_condition_classes - 1 });
        }
    }

    let mut params = VectorFieldParams::init(net, &mut rng::stream(cfg.seed, INIT_STREAM))?;
    let mut ema = EmaState::new(&params.flat, cfg.ema_decay)?;
    let mut opt = AdamW::new(params.len(), cfg.weight_decay);
    let mut history = Vec::with_capacity(cfg.total_steps);
    let mut rng = rng::stream(cfg.seed, TRAIN_STREAM);
    let report_every = (cfg.total_steps / 10).max(1);

    let mut xs = Vec::with_capacity(cfg.batch_size);
    let mut cs = Vec::with_capacity(cfg.batch_size);
    for step in 0..cfg.total_steps {
        xs.clear();
        cs.clear();
        for _ in 0..cfg.batch_size {
            let i = rng.random_range(0..data.len());
            xs.push(data.points[i].clone());
            cs.push(data.conditions[i]);
        }
        let batch = make_flow_batch(manifold, &xs, &cs, prior, &mut rng, cfg.cond_dropout)?;
        let (loss, mut grad) = loss_and_grad(&params, manifold, &batch)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { step });
        }
        let grad_norm = clip_gradient(&mut grad, cfg.grad_clip_norm);
        if !grad_norm.is_finite() {
            return Err(Error::NonFiniteLoss { step });
        }
        let lr = lr_at(cfg, step)?;
        opt.update(&mut params.flat, &grad, lr)?;
        ema.update(&params.flat)?;
        history.push(LossRecord { step, lr, loss, grad_norm });
        if (step + 1) % report_every == 0 {
            log::info!("step {}/{} loss {loss:.5} lr {lr:.3e}", step + 1, cfg.total_steps);
        }
    }

    Ok(TrainOutput {
        params,
        ema,
        optimizer: opt,
        history,
        rng: RngState { seed: cfg.seed, stream: TRAIN_STREAM, word_pos: rng.get_word_pos().to_string() },
    })
}
