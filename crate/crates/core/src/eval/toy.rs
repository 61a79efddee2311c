use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point, WrappedGaussian};
use crate::motion::{config_to_manifold, frame_to_point, MotionFrame, Quat, RepresentationConfig, Skeleton};
use crate::net::Dataset;
use crate::tolerances::POINT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub mean: Point,
    /// Isotropic wrapped-Gaussian scale; 0 puts every sample on the mean.
    pub scale: f64,
    pub weight: f64,
    #[serde(default)]
    pub condition: Option<usize>,
}

/// A synthetic data source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ToyTaskSpec {
    SphereMixture {
        components: Vec<MixtureComponent>,
        sample_count: usize,
    },
    /// Frames of a `joints`-joint T+R pose where joint `joint` rotates by
    /// `amplitude · sin(φ)` about `axis`, with `φ` uniform per sample and
    /// every other joint at rest.
    RotatingJoint {
        joints: usize,
        joint: usize,
        axis: [f64; 3],
        amplitude: f64,
        sample_count: usize,
        #[serde(default)]
        condition: Option<usize>,
    },
    FixedPoint {
        point: Point,
        sample_count: usize,
        #[serde(default)]
        condition: Option<usize>,
    },
}

impl ToyTaskSpec {
    pub fn sample_count(&self) -> usize {
        match self {
            ToyTaskSpec::SphereMixture { sample_count, .. }
            | ToyTaskSpec::RotatingJoint { sample_count, .. }
            | ToyTaskSpec::FixedPoint { sample_count, .. } => *sample_count,
        }
    }

    pub fn with_sample_count(mut self, n: usize) -> Self {
        match &mut self {
            ToyTaskSpec::SphereMixture { sample_count, .. }
            | ToyTaskSpec::RotatingJoint { sample_count, .. }
            | ToyTaskSpec::FixedPoint { sample_count, .. } => *sample_count = n,
        }
        self
    }

    /// Representative points used for mode coverage.
    pub fn modes(&self) -> Vec<Point> {
        match self {
            ToyTaskSpec::SphereMixture { components, .. } => components.iter().map(|c| c.mean.clone()).collect(),
            ToyTaskSpec::FixedPoint { point, .. } => vec![point.clone()],
            ToyTaskSpec::RotatingJoint { joints, .. } => {
                let cfg = RepresentationConfig::translation_rotation(*joints);
                let skel = Skeleton::chain(*joints, 0.1);
                frame_to_point(&MotionFrame::rest(*joints), &cfg, &skel, None).into_iter().collect()
            }
        }
    }

    /// Number of distinct non-null condition classes referenced.
    pub fn num_classes(&self) -> usize {
        let max = match self {
            ToyTaskSpec::SphereMixture { components, .. } => components.iter().filter_map(|c| c.condition).max(),
            ToyTaskSpec::RotatingJoint { condition, .. } | ToyTaskSpec::FixedPoint { condition, .. } => *condition,
        };
        max.map_or(0, |m| m + 1)
    }

    pub fn validate(&self, manifold: &ManifoldSpec) -> Result<()> {
        let check_point = |p: &Point, what: &str| {
            let v = manifold.validate_point(p, POINT_TOL);
            if v.is_empty() {
                Ok(())
            } else {
                Err(Error::InvalidArgument { field: what.to_string(), reason: format!("not on the manifold: {v:?}") })
            }
        };
        match self {
            ToyTaskSpec::SphereMixture { components, .. } => {
                if components.is_empty() {
                    return Err(Error::invalid("components", "need at least one component"));
                }
                let mut total = 0.0;
                for (i, c) in components.iter().enumerate() {
                    check_point(&c.mean, &format!("components[{i}].mean"))?;
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return Err(Error::InvalidArgument {
                            field: format!("components[{i}].weight"),
                            reason: "must be positive".into(),
                        });
                    }
                    if !(c.scale >= 0.0 && c.scale.is_finite()) {
                        return Err(Error::InvalidArgument {
                            field: format!("components[{i}].scale"),
                            reason: "must be non-negative".into(),
                        });
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid("weight", format!("mixture weights sum to {total}, not 1")));
                }
            }
            ToyTaskSpec::FixedPoint { point, .. } => check_point(point, "point")?,
            ToyTaskSpec::RotatingJoint { joints, joint, axis, amplitude, .. } => {
                let expected = config_to_manifold(&RepresentationConfig::translation_rotation(*joints))?;
                if &expected != manifold {
                    return Err(Error::invalid("joints", "rotating_joint produces T+R points; manifold differs"));
                }
                if joint >= joints {
                    return Err(Error::IndexOutOfRange { index: *joint, len: *joints });
                }
                if axis.iter().map(|a| a * a).sum::<f64>() == 0.0 {
                    return Err(Error::invalid("axis", "must be nonzero"));
                }
                if !amplitude.is_finite() {
                    return Err(Error::invalid("amplitude", "must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Draws `sample_count` points (with their condition labels). For a
/// mixture, each sample first picks a component by weight and then draws
/// from its wrapped Gaussian.
pub fn generate_toy_dataset<R: Rng + ?Sized>(
    task: &ToyTaskSpec,
    manifold: &ManifoldSpec,
    rng: &mut R,
) -> Result<Dataset> {
    task.validate(manifold)?;
    let n = task.sample_count();
    let mut points = Vec::with_capacity(n);
    let mut conditions = Vec::with_capacity(n);
    match task {
        ToyTaskSpec::SphereMixture { components, .. } => {
            let dists = components
                .iter()
                .map(|c| WrappedGaussian::isotropic(manifold, c.mean.clone(), c.scale))
                .collect::<Result<Vec<_>>>()?;
            for _ in 0..n {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                points.push(dists[pick].sample(manifold, rng));
                conditions.push(components[pick].condition);
            }
        }
        ToyTaskSpec::FixedPoint { point, condition, .. } => {
            points = vec![point.clone(); n];
            conditions = vec![*condition; n];
        }
        ToyTaskSpec::RotatingJoint { joints, joint, axis, amplitude, condition, .. } => {
            let cfg = RepresentationConfig::translation_rotation(*joints);
            let skel = Skeleton::chain(*joints, 0.1);
            for _ in 0..n {
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let mut frame = MotionFrame::rest(*joints);
                frame.rotations[*joint] = Quat::from_axis_angle(*axis, amplitude * phase.sin()).canonicalize()?;
                points.push(frame_to_point(&frame, &cfg, &skel, None)?);
                conditions.push(*condition);
            }
        }
    }
    Ok(Dataset { points, conditions })
}
