use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::point::Point;
use super::spec::ManifoldSpec;
use crate::error::{Error, Result};

/// Wrapped Gaussian `RN(μ, Σ)` with isotropic per-factor blocks `σ_f²·I`.
///
/// Sampling draws `ξ ~ N(0, Σ)` in ambient coordinates, projects it onto
/// `T_μ M` and maps the result through `Exp_μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrappedGaussian {
    pub mean: Point,
    pub scales: Vec<f64>,
}

impl WrappedGaussian {
    pub fn new(spec: &ManifoldSpec, mean: Point, scales: Vec<f64>) -> Result<Self> {
        let g = WrappedGaussian { mean, scales };
        g.validate(spec)?;
        Ok(g)
    }

    /// Same scale on every factor.
    pub fn isotropic(spec: &ManifoldSpec, mean: Point, scale: f64) -> Result<Self> {
        Self::new(spec, mean, vec![scale; spec.factors().len()])
    }

    pub fn validate(&self, spec: &ManifoldSpec) -> Result<()> {
        if self.mean.len() != spec.total_ambient_dim() {
            return Err(Error::DimensionMismatch { expected: spec.total_ambient_dim(), got: self.mean.len() });
        }
        if self.scales.len() != spec.factors().len() {
            return Err(Error::invalid(
                "scales",
                format!("expected one scale per factor ({}), got {}", spec.factors().len(), self.scales.len()),
            ));
        }
        // zero is accepted as the degenerate (point-mass) limit
        if let Some(s) = self.scales.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::invalid("scales", format!("scale {s} must be finite and >= 0")));
        }
        Ok(())
    }

    /// Draws one point. Consumes exactly `total_ambient_dim` standard normals
    /// from `rng`, in coordinate order.
    pub fn sample<R: Rng + ?Sized>(&self, spec: &ManifoldSpec, rng: &mut R) -> Point {
        let mut xi = vec![0.0; spec.total_ambient_dim()];
        for (fi, &(off, len)) in spec.layout().iter().enumerate() {
            let s = self.scales[fi];
            for c in &mut xi[off..off + len] {
                let z: f64 = rng.sample(StandardNormal);
                *c = s * z;
            }
        }
        let v = spec.project_unchecked(&self.mean, &xi);
        spec.exp_unchecked(&self.mean, &v)
    }
}
