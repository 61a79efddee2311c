//! WebAssembly bindings for the demo page in `www/`.
//!
//! Everything works on S² so the page can draw it. Results come back as
//! flat `Float64Array`s of xyz triples. The `demo_*` functions hold the
//! logic and return `Result<_, String>` so they can be tested natively; the
//! exported wrappers only convert errors for JavaScript.

use rmg_core::flow::{euler_step, IntegratorConfig};
use rmg_core::manifold::{ManifoldSpec, Point, WrappedGaussian};
use rmg_core::rng::seeded;
use wasm_bindgen::prelude::*;

fn s2() -> ManifoldSpec {
    ManifoldSpec::sphere(2).expect("S^2 is valid")
}

fn unit(v: &[f64], name: &str) -> Result<Point, String> {
    if v.len() != 3 {
        return Err(format!("{name}: expected 3 coordinates, got {}", v.len()));
    }
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !n.is_finite() || n == 0.0 {
        return Err(format!("{name}: needs a finite nonzero vector"));
    }
    Ok(Point(v.iter().map(|c| c / n).collect()))
}

/// `steps + 1` samples of the geodesic from `a` to `b`, each stored as the
/// point followed by its velocity (6 numbers per sample).
pub fn demo_geodesic(a: &[f64], b: &[f64], steps: usize) -> Result<Vec<f64>, String> {
    let spec = s2();
    let (a, b) = (unit(a, "a")?, unit(b, "b")?);
    if steps == 0 {
        return Err("steps: must be at least 1".into());
    }
    let mut out = Vec::with_capacity(6 * (steps + 1));
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        out.extend(spec.geodesic(&a, &b, t).map_err(|e| e.to_string())?.0);
        out.extend(spec.geodesic_velocity(&a, &b, t).map_err(|e| e.to_string())?.0);
    }
    Ok(out)
}

/// `n` draws from the wrapped Gaussian at `mean` with tangent scale `scale`.
pub fn demo_wrapped_samples(mean: &[f64], scale: f64, n: usize, seed: u32) -> Result<Vec<f64>, String> {
    let spec = s2();
    let prior = WrappedGaussian::isotropic(&spec, unit(mean, "mean")?, scale).map_err(|e| e.to_string())?;
    let mut rng = seeded(seed.into());
    Ok((0..n).flat_map(|_| prior.sample(&spec, &mut rng).0).collect())
}

/// Trajectories of `particles` prior draws (wrapped Gaussian at `start`,
/// scale `scale`) under the field `Log_x(target)/(1 − t)`, integrated with
/// `num_steps` exponential-map Euler steps. Layout is particle-major:
/// `particles × (num_steps + 1) × 3`.
pub fn demo_flow(
    start: &[f64],
    target: &[f64],
    scale: f64,
    particles: usize,
    num_steps: usize,
    seed: u32,
) -> Result<Vec<f64>, String> {
    let spec = s2();
    let target = unit(target, "target")?;
    let prior = WrappedGaussian::isotropic(&spec, unit(start, "start")?, scale).map_err(|e| e.to_string())?;
    let mut out = vec![0.0; particles * (num_steps + 1) * 3];
    // same draw order and step as the library sampler, with every state kept
    let integ = IntegratorConfig::new(num_steps).map_err(|e| e.to_string())?;
    let grid = integ.grid();
    let mut xs: Vec<Point> = {
        let mut rng = seeded(seed.into());
        (0..particles).map(|_| prior.sample(&spec, &mut rng)).collect()
    };
    let field = |x: &[f64], t: f64| -> Result<Vec<f64>, String> {
        let v = spec.log(&Point(x.to_vec()), &target).map_err(|e| e.to_string())?;
        Ok(v.iter().map(|c| c / (1.0 - t)).collect())
    };
    for k in 0..=num_steps {
        for (i, x) in xs.iter_mut().enumerate() {
            let at = (i * (num_steps + 1) + k) * 3;
            out[at..at + 3].copy_from_slice(x);
            if k < num_steps {
                let v = spec.project_tangent(x, &field(x, grid[k])?).map_err(|e| e.to_string())?;
                *x = euler_step(&spec, x, &v, grid[k + 1] - grid[k]).map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn geodesic(a: &[f64], b: &[f64], steps: usize) -> Result<Vec<f64>, JsError> {
    demo_geodesic(a, b, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn wrapped_samples(mean: &[f64], scale: f64, n: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    demo_wrapped_samples(mean, scale, n, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn flow(
    start: &[f64],
    target: &[f64],
    scale: f64,
    particles: usize,
    num_steps: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    demo_flow(start, target, scale, particles, num_steps, seed).map_err(|e| JsError::new(&e))
}
