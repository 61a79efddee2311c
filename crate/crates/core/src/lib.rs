//! Geometry-aware flow matching for articulated motion.
//!
//! Motion frames live on a product manifold: root translation in ℝ³, one
//! unit quaternion per joint on S³, and optionally a Kendall pre-shape of the
//! joint positions plus temporal-difference tangents. Generation uses
//! Riemannian flow matching: geodesic interpolants, tangent-space velocity
//! targets and an exponential-map Euler integrator that never leaves the
//! manifold.
//!
//! Module map:
//!
//! - [`manifold`]: closed-form exp/log/geodesics on ℝⁿ, Sᵈ, pre-shape space and products.
//! - [`motion`]: skeletons, quaternions, forward kinematics and representation configs.
//! - [`flow`]: interpolants, targets, the flow-matching loss, guidance and ODE sampling.
//! - [`net`]: a small dense velocity network with exact gradients, AdamW and EMA.
//! - [`eval`]: toy datasets, geodesic-kernel MMD and mode coverage.

pub mod error;
pub mod eval;
pub mod flow;
pub mod manifold;
pub mod motion;
pub mod net;
pub mod rng;
pub mod tolerances;

pub use error::{Error, Result};
pub use manifold::{FactorKind, FactorSpec, ManifoldSpec, Point, Tangent};
