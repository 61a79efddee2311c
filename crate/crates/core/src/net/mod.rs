//! A dense velocity network `v_θ(x, t, c)` trained with the projected
//! flow-matching loss.
//!
//! Inputs are the ambient point, sinusoidal time features and a learned
//! condition embedding (row 0 is the fixed all-zero null class). Hidden
//! layers use SiLU; the output layer starts at zero so the initial field is
//! the zero field.

mod checkpoint;
mod mlp;
mod optim;
mod train;

pub use checkpoint::{Checkpoint, CheckpointHeader, RngState};
pub use mlp::{loss_and_grad, NetworkSpec, ParamEntry, VectorFieldParams};
pub use optim::{clip_gradient, grad_norm, lr_at, AdamW, EmaState};
pub use train::{train, Dataset, LossRecord, TrainConfig, TrainOutput};
