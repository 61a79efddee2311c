use rmg_core::flow::{sample_ode_batch, FnField, GuidanceConfig, IntegratorConfig};
use rmg_core::manifold::{ManifoldSpec, Point, WrappedGaussian};
use rmg_core::rng::seeded;
use rmg_wasm::{demo_flow, demo_geodesic, demo_wrapped_samples};

fn norms(flat: &[f64]) -> impl Iterator<Item = f64> + '_ {
    flat.chunks(3).map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt())
}

#[test]
fn geodesic_hits_endpoints_and_keeps_constant_speed() {
    let out = demo_geodesic(&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], 8).unwrap();
    assert_eq!(out.len(), 6 * 9);
    let samples: Vec<&[f64]> = out.chunks(6).collect();
    assert_eq!(&samples[0][..3], &[1.0, 0.0, 0.0]);
    assert_eq!(&samples[8][..3], &[0.0, 1.0, 0.0]);
    for s in &samples {
        let speed = (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]).sqrt();
        assert!((speed - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "{speed}");
        let p = s[0] * s[3] + s[1] * s[4] + s[2] * s[5];
        assert!(p.abs() < 1e-12);
    }
}

#[test]
fn inputs_are_checked() {
    assert!(demo_geodesic(&[1.0, 0.0], &[0.0, 1.0, 0.0], 4).is_err());
    assert!(demo_geodesic(&[0.0; 3], &[0.0, 1.0, 0.0], 4).is_err());
    assert!(demo_geodesic(&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0], 4).is_err());
    assert!(demo_geodesic(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0).is_err());
    assert!(demo_wrapped_samples(&[0.0, 0.0, 1.0], -1.0, 4, 0).is_err());
    assert!(demo_flow(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], 0.5, 4, 0, 0).is_err());
}

#[test]
fn wrapped_samples_are_unit_and_seeded() {
    let a = demo_wrapped_samples(&[0.0, 0.0, 1.0], 0.3, 500, 7).unwrap();
    let b = demo_wrapped_samples(&[0.0, 0.0, 1.0], 0.3, 500, 7).unwrap();
    assert_eq!(a, b);
    assert!(norms(&a).all(|n| (n - 1.0).abs() < 1e-12));
    // concentrated near the mean
    let mean_z = a.chunks(3).map(|c| c[2]).sum::<f64>() / 500.0;
    assert!(mean_z > 0.9, "{mean_z}");
}

#[test]
fn flow_trajectories_match_the_library_sampler() {
    let (start, target) = ([0.0, 0.0, 1.0], [1.0, 1.0, 0.0]);
    let (particles, steps) = (16, 25);
    let traj = demo_flow(&start, &target, 0.4, particles, steps, 3).unwrap();
    assert_eq!(traj.len(), particles * (steps + 1) * 3);
    assert!(norms(&traj).all(|n| (n - 1.0).abs() < 1e-12));

    let spec = ManifoldSpec::sphere(2).unwrap();
    let n = 2f64.sqrt();
    let goal = Point(target.iter().map(|c| c / n).collect());
    let prior = WrappedGaussian::isotropic(&spec, Point(start.to_vec()), 0.4).unwrap();
    let field = FnField(|x: &[f64], t: f64, _c: Option<usize>| {
        spec.log(&Point(x.to_vec()), &goal).unwrap().iter().map(|c| c / (1.0 - t)).collect::<Vec<f64>>()
    });
    let out = sample_ode_batch(
        &spec,
        &field,
        &prior,
        &IntegratorConfig::new(steps).unwrap(),
        &GuidanceConfig::disabled(),
        &vec![None; particles],
        &mut seeded(3),
    )
    .unwrap();
    for (i, p) in out.points.iter().enumerate() {
        let at = (i * (steps + 1) + steps) * 3;
        assert_eq!(&traj[at..at + 3], p.as_slice());
        assert!(spec.distance(p, &goal).unwrap() < 1e-12);
    }
}
