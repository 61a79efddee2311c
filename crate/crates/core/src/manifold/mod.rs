//! Closed-form Riemannian geometry on products of ℝⁿ, Sᵈ and Kendall
//! pre-shape spaces.
//!
//! A [`ManifoldSpec`] describes the product and its flat memory layout.
//! Points and tangents are plain coordinate vectors in the ambient space;
//! all operations act factor-wise on the segments of that layout.

mod ops;
mod point;
mod spec;
pub(crate) mod sphere;
mod wrapped;

pub use ops::{Constraint, Violation};
pub(crate) use ops::segment_deviations;
pub use point::{Point, Tangent};
pub use spec::{FactorKind, FactorSpec, ManifoldSpec, Segment, SegmentKind};
pub use wrapped::WrappedGaussian;
