//! Numerical tolerances shared across the crate.
//!
//! Everything here is double precision. Tests reference these constants
//! rather than repeating literals.

/// Unit-norm / centroid tolerance for points on spheres and pre-shapes.
pub const POINT_TOL: f64 = 1e-9;

/// Orthogonality tolerance for tangent vectors.
pub const TANGENT_TOL: f64 = 1e-9;

/// `exp_map` rejects a tangent whose normal component exceeds this
/// (relative to `max(1, |v|)`).
pub const TANGENT_REJECT_TOL: f64 = TANGENT_TOL * 10.0;

/// Below this angle sphere formulas switch to Taylor expansions.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Angles at or above `π - ANTIPODAL_MARGIN` have no unique geodesic.
pub const ANTIPODAL_MARGIN: f64 = 1e-6;

/// Time clamp for flow-matching targets: `t ∈ [0, 1 - TIME_EPS]`.
pub const TIME_EPS: f64 = 1e-5;

/// Pre-shapes with centered Frobenius norm below this are degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Loader tolerance for quaternion norms in motion files.
pub const LOAD_QUAT_TOL: f64 = 1e-6;
