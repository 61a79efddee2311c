use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point, Tangent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceConfig {
    pub scale: f64,
    pub enabled: bool,
}

impl GuidanceConfig {
    pub fn disabled() -> Self {
        GuidanceConfig { scale: 1.0, enabled: false }
    }

    pub fn with_scale(scale: f64) -> Result<Self> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::invalid("guidance_scale", format!("must be finite and >= 0, got {scale}")));
        }
        Ok(GuidanceConfig { scale, enabled: true })
    }
}

/// Classifier-free guidance `v_u + ω·(v_c − v_u)` at base `x`, re-projected
/// onto `T_x M`. `ω = 0` and `ω = 1` return `v_u` and `v_c` unchanged.
pub fn guided_velocity(
    spec: &ManifoldSpec,
    x: &Point,
    v_cond: &Tangent,
    v_uncond: &Tangent,
    scale: f64,
) -> Result<Tangent> {
    if v_cond.len() != v_uncond.len() {
        return Err(Error::DimensionMismatch { expected: v_cond.len(), got: v_uncond.len() });
    }
    if scale == 1.0 {
        return Ok(v_cond.clone());
    }
    if scale == 0.0 {
        return Ok(v_uncond.clone());
    }
    let mixed: Vec<f64> = v_uncond.iter().zip(v_cond.iter()).map(|(u, c)| u + scale * (c - u)).collect();
    spec.project_tangent(x, &mixed)
}
