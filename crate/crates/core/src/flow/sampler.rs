use rand::Rng;
use serde::{Deserialize, Serialize};

use super::guidance::{guided_velocity, GuidanceConfig};
use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point, Tangent, WrappedGaussian};

/// A time- and condition-dependent vector field with ambient outputs.
pub trait VelocityField {
    /// Evaluates the field for every point at the shared time `t`.
    fn eval_batch(&self, xs: &[Point], t: f64, conds: &[Option<usize>]) -> Result<Vec<Vec<f64>>>;
}

/// Adapts a per-point closure into a [`VelocityField`].
pub struct FnField<F>(pub F);

impl<F> VelocityField for FnField<F>
where
    F: Fn(&[f64], f64, Option<usize>) -> Vec<f64>,
{
    fn eval_batch(&self, xs: &[Point], t: f64, conds: &[Option<usize>]) -> Result<Vec<Vec<f64>>> {
        Ok(xs.iter().zip(conds).map(|(x, c)| (self.0)(x, t, *c)).collect())
    }
}

/// Uniform grid `t_k = k / N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub num_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { num_steps: 100 }
    }
}

impl IntegratorConfig {
    pub fn new(num_steps: usize) -> Result<Self> {
        if num_steps < 1 {
            return Err(Error::invalid("num_steps", "must be >= 1"));
        }
        Ok(IntegratorConfig { num_steps })
    }

    /// `t_0 = 0, …, t_N = 1`. Step `k` has size `t_{k+1} − t_k`, so the steps
    /// telescope to exactly 1.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.num_steps as f64;
        (0..=self.num_steps).map(|k| k as f64 / n).collect()
    }
}

/// One Riemannian Euler step `Exp_x(h·v)`.
pub fn euler_step(spec: &ManifoldSpec, x: &Point, v: &Tangent, h: f64) -> Result<Point> {
    if !(h >= 0.0) {
        return Err(Error::invalid("h", format!("step size must be >= 0, got {h}")));
    }
    spec.exp(x, &v.scaled(h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutput {
    pub points: Vec<Point>,
    /// Largest point-invariant deviation seen after any step.
    pub max_step_violation: f64,
}

/// Integrates `dx/dt = Π_{T_x M} v(x, t)` from prior draws to `t = 1`.
///
/// One prior sample is drawn per condition, in order. With guidance enabled
/// the field is evaluated with the given conditions and with the null
/// condition, both are projected and then combined.
pub fn sample_ode_batch<R: Rng + ?Sized>(
    spec: &ManifoldSpec,
    field: &dyn VelocityField,
    prior: &WrappedGaussian,
    integ: &IntegratorConfig,
    guidance: &GuidanceConfig,
    conds: &[Option<usize>],
    rng: &mut R,
) -> Result<SampleOutput> {
    IntegratorConfig::new(integ.num_steps)?;
    prior.validate(spec)?;
    let mut xs: Vec<Point> = conds.iter().map(|_| prior.sample(spec, rng)).collect();
    let nulls = vec![None; conds.len()];
    let grid = integ.grid();
    let mut max_step_violation = 0.0f64;
    for k in 0..integ.num_steps {
        let (t, h) = (grid[k], grid[k + 1] - grid[k]);
        let cond_out = field.eval_batch(&xs, t, conds)?;
        let uncond_out = if guidance.enabled { Some(field.eval_batch(&xs, t, &nulls)?) } else { None };
        for (i, x) in xs.iter_mut().enumerate() {
            let v_c = spec.project_tangent(x, &cond_out[i])?;
            let v = match &uncond_out {
                Some(u) => {
                    let v_u = spec.project_tangent(x, &u[i])?;
                    guided_velocity(spec, x, &v_c, &v_u, guidance.scale)?
                }
                None => v_c,
            };
            *x = euler_step(spec, x, &v, h)?;
            max_step_violation = max_step_violation.max(spec.max_point_deviation(x));
        }
    }
    Ok(SampleOutput { points: xs, max_step_violation })
}

/// Single-sample form of [`sample_ode_batch`].
pub fn sample_ode<R: Rng + ?Sized>(
    spec: &ManifoldSpec,
    field: &dyn VelocityField,
    prior: &WrappedGaussian,
    integ: &IntegratorConfig,
    guidance: &GuidanceConfig,
    cond: Option<usize>,
    rng: &mut R,
) -> Result<Point> {
    let mut out = sample_ode_batch(spec, field, prior, integ, guidance, &[cond], rng)?;
    Ok(out.points.pop().expect("one sample"))
}
