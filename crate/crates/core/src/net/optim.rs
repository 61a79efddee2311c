use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::train::TrainConfig;

/// Learning rate at `step`: linear warmup over `round(warmup_ratio·total)`
/// steps, then cosine decay to zero at `total_steps`.
pub fn lr_at(cfg: &TrainConfig, step: usize) -> Result<f64> {
    let total = cfg.total_steps;
    if step > total {
        return Err(Error::StepOutOfRange { step, total });
    }
    let warm = (cfg.warmup_ratio * total as f64).round() as usize;
    if step < warm {
        return Ok(cfg.max_lr * step as f64 / warm as f64);
    }
    if total == warm {
        return Ok(cfg.max_lr);
    }
    let progress = (step - warm) as f64 / (total - warm) as f64;
    Ok(cfg.max_lr * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()))
}

pub fn grad_norm(grad: &[f64]) -> f64 {
    grad.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Rescales `grad` in place so its norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_gradient(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad_norm(grad);
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
    norm
}

/// AdamW with decoupled weight decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamW {
    pub fn new(len: usize, weight_decay: f64) -> Self {
        AdamW { beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay, step: 0, m: vec![0.0; len], v: vec![0.0; len] }
    }

    pub fn update(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::ShapeMismatch(format!(
                "optimizer holds {} moments, params {}, gradient {}",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * params[i]);
        }
        Ok(())
    }
}

/// Exponential moving average of the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmaState {
    pub decay: f64,
    pub shadow: Vec<f64>,
}

impl EmaState {
    pub fn new(params: &[f64], decay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&decay) {
            return Err(Error::invalid("ema_decay", "must lie in [0, 1]"));
        }
        Ok(EmaState { decay, shadow: params.to_vec() })
    }

    pub fn update(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.shadow.len() {
            return Err(Error::ShapeMismatch(format!(
                "EMA holds {} values, params {}",
                self.shadow.len(),
                params.len()
            )));
        }
        let d = self.decay;
        for (s, p) in self.shadow.iter_mut().zip(params) {
            *s = d * *s + (1.0 - d) * p;
        }
        Ok(())
    }
}
