//! Trains a small velocity field on a two-mode mixture over S³ × ℝ³ and
//! reports MMD and mode coverage of the generated samples.
//!
//! cargo run --release -p rmg-core --example sphere_mixture -- [steps]

use rmg_core::eval::{generate_toy_dataset, geodesic_mmd, median_bandwidth, mode_coverage, MixtureComponent, ToyTaskSpec};
use rmg_core::flow::{sample_ode_batch, GuidanceConfig, IntegratorConfig};
use rmg_core::manifold::{FactorSpec, ManifoldSpec, Point, WrappedGaussian};
use rmg_core::net::{train, Dataset, NetworkSpec, TrainConfig};
use rmg_core::rng::{seeded, stream};

fn main() -> rmg_core::Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let spec = ManifoldSpec::new(vec![FactorSpec::sphere(3), FactorSpec::euclidean(3)])?;
    let component = |mean: Vec<f64>| MixtureComponent { mean: Point(mean), scale: 0.2, weight: 0.5, condition: None };
    let task = ToyTaskSpec::SphereMixture {
        components: vec![
            component(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            component(vec![1f64.cos(), 1f64.sin(), 0.0, 0.0, -1.0, 0.0, 0.0]),
        ],
        sample_count: 5000,
    };
    let data = generate_toy_dataset(&task, &spec, &mut stream(1, 0))?;
    let held_out = generate_toy_dataset(&task.clone().with_sample_count(1000), &spec, &mut stream(1, 1))?;

    let net = NetworkSpec {
        input_dim: spec.total_ambient_dim(),
        hidden_dim: 144,
        num_layers: 3,
        time_embed_dim: 16,
        cond_embed_dim: 8,
        num_condition_classes: 1,
    };
    let prior = WrappedGaussian::isotropic(&spec, spec.base_point(), 1.0)?;
    let cfg = TrainConfig { total_steps: steps, ..TrainConfig::default() };
    let out = train(&cfg, net, &spec, &Dataset::unconditional(data.points), &prior)?;
    if let Some(last) = out.history.last() {
        println!("{} params, final loss {:.4}", out.params.len(), last.loss);
    }

    let integ = IntegratorConfig::new(100)?;
    let samples =
        sample_ode_batch(&spec, &out.ema_params(), &prior, &integ, &GuidanceConfig::disabled(), &[None; 1000], &mut seeded(2))?;
    let bw = median_bandwidth(&spec, &samples.points, &held_out.points)?;
    let mmd = geodesic_mmd(&spec, &samples.points, &held_out.points, bw)?;
    let cov = mode_coverage(&spec, &samples.points, &task.modes(), 1.0)?;
    println!("MMD^2 {mmd:.4} (bandwidth {bw:.3})");
    println!("mode mass {:?}, outliers {:.3}", cov.per_mode, cov.outliers);
    Ok(())
}
