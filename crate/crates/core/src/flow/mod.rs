//! Riemannian flow matching: geodesic interpolants, conditional velocity
//! targets, the projected MSE objective, classifier-free guidance and the
//! exponential-map Euler sampler.

mod batch;
mod guidance;
mod sampler;

pub use batch::{fm_loss, interpolate, make_flow_batch, reference_point, target_velocity, FlowBatch};
pub use guidance::{guided_velocity, GuidanceConfig};
pub use sampler::{euler_step, sample_ode, sample_ode_batch, FnField, IntegratorConfig, SampleOutput, VelocityField};
