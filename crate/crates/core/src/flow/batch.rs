use rand::Rng;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point, Tangent, WrappedGaussian};
use crate::motion::{
    ambient_dimension, compute_preshape, forward_kinematics, MotionFrame, RepresentationConfig, Skeleton,
};
use crate::tolerances::TIME_EPS;

/// Rest pose with zero translation: `0 ∈ ℝ³`, `(1, 0, 0, 0)` per joint, the
/// normalized T-pose for the pre-shape block and zeros for differences.
pub fn reference_point(cfg: &RepresentationConfig, skeleton: &Skeleton) -> Result<Point> {
    let dim = ambient_dimension(cfg)?;
    let j = cfg.joints;
    let mut out = Vec::with_capacity(dim);
    if cfg.translation {
        out.extend([0.0; 3]);
    }
    if cfg.rotation {
        for _ in 0..j {
            out.extend([1.0, 0.0, 0.0, 0.0]);
        }
    }
    if cfg.preshape {
        if skeleton.joint_count() != j {
            return Err(Error::SkeletonMismatch(format!(
                "config has {j} joints, skeleton has {}",
                skeleton.joint_count()
            )));
        }
        out.extend(compute_preshape(&forward_kinematics(skeleton, &MotionFrame::rest(j))?)?);
    }
    out.resize(dim, 0.0);
    Ok(Point(out))
}

/// `x_t = Exp_{x0}(t · Log_{x0}(x1))`, evaluated in closed form.
pub fn interpolate(spec: &ManifoldSpec, x0: &Point, x1: &Point, t: f64) -> Result<Point> {
    spec.geodesic(x0, x1, t)
}

/// Conditional target `Log_{x_t}(x1) / (1 − t)`.
pub fn target_velocity(spec: &ManifoldSpec, x_t: &Point, x1: &Point, t: f64) -> Result<Tangent> {
    if t > 1.0 - TIME_EPS {
        return Err(Error::TimeTooCloseToOne(t));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be >= 0")));
    }
    let mut v = spec.log(x_t, x1)?;
    v.iter_mut().for_each(|c| *c /= 1.0 - t);
    Ok(v)
}

/// Training tuples for one optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowBatch {
    pub x0: Vec<Point>,
    pub x1: Vec<Point>,
    pub t: Vec<f64>,
    pub x_t: Vec<Point>,
    pub target: Vec<Tangent>,
    /// `None` is the null (unconditional) class.
    pub condition: Vec<Option<usize>>,
}

impl FlowBatch {
    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }
}

/// Builds a flow-matching batch from data points.
///
/// Per element, in this order: `x0` from the prior (redrawn once if it is
/// antipodal to the data point on some factor), `t ~ U[0, 1 − ε)`, and one
/// uniform draw deciding whether the condition is dropped. The target is the
/// geodesic velocity at `t`, which equals `Log_{x_t}(x1)/(1 − t)` on the
/// constant-speed path and is exactly `x1 − x0` on Euclidean factors.
pub fn make_flow_batch<R: Rng + ?Sized>(
    spec: &ManifoldSpec,
    data: &[Point],
    conditions: &[Option<usize>],
    prior: &WrappedGaussian,
    rng: &mut R,
    cond_dropout: f64,
) -> Result<FlowBatch> {
    if data.len() != conditions.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} data points but {} conditions",
            data.len(),
            conditions.len()
        )));
    }
    if !(0.0..=1.0).contains(&cond_dropout) {
        return Err(Error::invalid("cond_dropout", "must lie in [0, 1]"));
    }
    prior.validate(spec)?;
    let n = data.len();
    let mut batch = FlowBatch {
        x0: Vec::with_capacity(n),
        x1: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        x_t: Vec::with_capacity(n),
        target: Vec::with_capacity(n),
        condition: Vec::with_capacity(n),
    };
    for (x1, cond) in data.iter().zip(conditions) {
        let mut x0 = prior.sample(spec, rng);
        if let Err(e @ Error::AntipodalPoints { .. }) = spec.log(&x0, x1) {
            log::debug!("redrawing prior sample: {e}");
            x0 = prior.sample(spec, rng);
        }
        let t = rng.random::<f64>() * (1.0 - TIME_EPS);
        let x_t = spec.geodesic(&x0, x1, t)?;
        let target = spec.geodesic_velocity(&x0, x1, t)?;
        let dropped = rng.random::<f64>() < cond_dropout;
        batch.x0.push(x0);
        batch.x1.push(x1.clone());
        batch.t.push(t);
        batch.x_t.push(x_t);
        batch.target.push(target);
        batch.condition.push(if dropped { None } else { *cond });
    }
    Ok(batch)
}

/// Mean over the batch of `‖target − Π_{x_t}(predicted)‖²`.
pub fn fm_loss(spec: &ManifoldSpec, batch: &FlowBatch, predicted: &[Vec<f64>]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if predicted.len() != batch.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for a batch of {}",
            predicted.len(),
            batch.len()
        )));
    }
    let mut total = 0.0;
    for ((x, target), pred) in batch.x_t.iter().zip(&batch.target).zip(predicted) {
        let proj = spec.project_tangent(x, pred)?;
        let mut s = 0.0;
        for (a, b) in target.iter().zip(proj.iter()) {
            s += (a - b) * (a - b);
        }
        total += s;
    }
    Ok(total / batch.len() as f64)
}
