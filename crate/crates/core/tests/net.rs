use rand::Rng;
use rmg_core::flow::{make_flow_batch, sample_ode_batch, FlowBatch, GuidanceConfig, IntegratorConfig};
use rmg_core::manifold::{FactorSpec, ManifoldSpec, Point, WrappedGaussian};
use rmg_core::net::{
    clip_gradient, grad_norm, loss_and_grad, lr_at, train, AdamW, Checkpoint, Dataset, EmaState, NetworkSpec,
    TrainConfig, VectorFieldParams,
};
use rmg_core::rng::seeded;

fn s3r3() -> ManifoldSpec {
    ManifoldSpec::new(vec![FactorSpec::sphere(3), FactorSpec::euclidean(3)]).unwrap()
}

fn identity() -> Point {
    Point(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
}

fn random_batch(m: &ManifoldSpec, n: usize, classes: usize, seed: u64) -> FlowBatch {
    let mut rng = seeded(seed);
    let prior = WrappedGaussian::isotropic(m, identity(), 1.0).unwrap();
    let data_dist = WrappedGaussian::isotropic(m, Point(vec![0.0, 0.6, 0.8, 0.0, 1.0, -0.5, 2.0]), 0.4).unwrap();
    let data: Vec<Point> = (0..n).map(|_| data_dist.sample(m, &mut rng)).collect();
    let conds: Vec<Option<usize>> = (0..n).map(|_| Some(rng.random_range(0..classes))).collect();
    make_flow_batch(m, &data, &conds, &prior, &mut rng, 0.3).unwrap()
}

/// Central differences on the loss at `h = 1e-5`; returns the worst relative
/// error over `samples` random coordinates.
fn worst_fd_error(net: NetworkSpec, batch_seed: u64, samples: usize) -> f64 {
    let m = s3r3();
    let mut rng = seeded(batch_seed ^ 0xabcd);
    let mut p = VectorFieldParams::init(net, &mut rng).unwrap();
    p.randomize_output(0.3, &mut rng);
    let batch = random_batch(&m, 16, net.num_condition_classes - 1, batch_seed);
    let (_, g) = loss_and_grad(&p, &m, &batch).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let k = rng.random_range(0..p.len());
        let orig = p.flat[k];
        p.flat[k] = orig + h;
        let up = loss_and_grad(&p, &m, &batch).unwrap().0;
        p.flat[k] = orig - h;
        let down = loss_and_grad(&p, &m, &batch).unwrap().0;
        p.flat[k] = orig;
        let fd = (up - down) / (2.0 * h);
        let scale = fd.abs().max(g[k].abs());
        // both sides vanish: nothing to compare beyond roundoff
        let err = if scale < 1e-9 { (fd - g[k]).abs() } else { (fd - g[k]).abs() / scale };
        worst = worst.max(err);
    }
    worst
}

#[test]
fn gradient_matches_central_differences() {
    let nets = [
        NetworkSpec { input_dim: 7, hidden_dim: 8, num_layers: 1, time_embed_dim: 4, cond_embed_dim: 2, num_condition_classes: 3 },
        NetworkSpec { input_dim: 7, hidden_dim: 16, num_layers: 2, time_embed_dim: 8, cond_embed_dim: 4, num_condition_classes: 4 },
        NetworkSpec { input_dim: 7, hidden_dim: 24, num_layers: 3, time_embed_dim: 9, cond_embed_dim: 3, num_condition_classes: 2 },
    ];
    for net in nets {
        for b in 0..5 {
            let e = worst_fd_error(net, 100 + b, 50);
            assert!(e < 1e-4, "{net:?} batch {b}: relative error {e}");
        }
    }
}

#[test]
fn zero_steps_returns_initial_params() {
    let m = s3r3();
    let net = NetworkSpec { input_dim: 7, hidden_dim: 8, num_layers: 1, time_embed_dim: 4, cond_embed_dim: 2, num_condition_classes: 1 };
    let cfg = TrainConfig { total_steps: 0, seed: 5, ..TrainConfig::default() };
    let prior = WrappedGaussian::isotropic(&m, identity(), 1.0).unwrap();
    let out = train(&cfg, net, &m, &Dataset::unconditional(vec![identity()]), &prior).unwrap();
    assert!(out.history.is_empty());
    assert_eq!(out.params.flat, out.ema.shadow);
}

fn small_run(seed: u64) -> rmg_core::net::TrainOutput {
    let m = s3r3();
    let net = NetworkSpec { input_dim: 7, hidden_dim: 16, num_layers: 2, time_embed_dim: 8, cond_embed_dim: 4, num_condition_classes: 3 };
    let cfg = TrainConfig { total_steps: 40, batch_size: 32, seed, max_lr: 1e-3, ..TrainConfig::default() };
    let prior = WrappedGaussian::isotropic(&m, identity(), 1.0).unwrap();
    let batch = random_batch(&m, 64, 2, 9);
    let data = Dataset { points: batch.x1, conditions: batch.condition };
    train(&cfg, net, &m, &data, &prior).unwrap()
}

#[test]
fn training_is_bitwise_deterministic() {
    let a = small_run(3);
    let b = small_run(3);
    assert_eq!(a.history, b.history);
    assert_eq!(a.params.flat, b.params.flat);
    assert_eq!(a.ema.shadow, b.ema.shadow);
    assert_ne!(small_run(4).history, a.history);
    assert!(a.history.iter().all(|r| r.loss.is_finite()));
    assert_eq!(a.history.len(), 40);
    assert!(a.history_csv().starts_with("step,lr,loss,grad_norm\n0,"));
}

#[test]
fn checkpoint_roundtrip_is_exact() {
    let out = small_run(3);
    let m = s3r3();
    let prior = WrappedGaussian::isotropic(&m, identity(), 1.0).unwrap();
    let ck = Checkpoint::from_training(&out, TrainConfig::default(), m, prior, None, None);
    let bytes = ck.to_bytes();
    assert_eq!(&bytes[..8], b"RMGCKPT1");
    let back = Checkpoint::from_bytes(&bytes).unwrap();
    assert_eq!(back, ck);
    assert_eq!(back.network(true).unwrap().flat, out.ema.shadow);
    assert_eq!(back.network(false).unwrap().flat, out.params.flat);
    assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let header: serde_json::Value = serde_json::from_slice(&bytes[16..16 + header_len]).unwrap();
    assert_eq!(header["param_layout"][0]["name"], "cond_embed");
    assert!(header["param_layout"][0]["offset"].is_u64());
}

#[test]
fn clipping_bound_and_direction() {
    let mut rng = seeded(1);
    for _ in 0..200 {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let g: Vec<f64> = (0..50).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let mut c = g.clone();
        let before = clip_gradient(&mut c, 0.5);
        assert!(grad_norm(&c) <= 0.5 + 1e-12);
        if before <= 0.5 {
            assert_eq!(c, g);
        } else {
            let ratio = c[0] / g[0];
            assert!(c.iter().zip(&g).all(|(a, b)| (a - ratio * b).abs() < 1e-15));
        }
    }
    let mut zero = vec![0.0; 4];
    clip_gradient(&mut zero, 0.5);
    assert_eq!(zero, vec![0.0; 4]);
}

#[test]
fn adamw_zero_gradient_without_decay_is_identity() {
    let mut p = vec![0.3, -1.2, 4.0];
    let mut opt = AdamW::new(3, 0.0);
    for _ in 0..5 {
        opt.update(&mut p, &[0.0; 3], 1e-3).unwrap();
    }
    assert_eq!(p, vec![0.3, -1.2, 4.0]);
}

#[test]
fn ema_contracts_geometrically() {
    let p = vec![1.0, -2.0, 0.5];
    let mut e = EmaState::new(&[0.0; 3], 0.9).unwrap();
    let gap0 = grad_norm(&p);
    for k in 1..=50 {
        e.update(&p).unwrap();
        let gap: f64 = e.shadow.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!((gap - 0.9f64.powi(k) * gap0).abs() < 1e-12);
    }
}

#[test]
fn schedule_is_continuous_with_single_peak() {
    let cfg = TrainConfig { total_steps: 5000, ..TrainConfig::default() };
    let lrs: Vec<f64> = (0..=5000).map(|s| lr_at(&cfg, s).unwrap()).collect();
    let peak = lrs.iter().cloned().fold(0.0, f64::max);
    let argmax: Vec<usize> = (0..lrs.len()).filter(|&i| lrs[i] == peak).collect();
    assert_eq!(argmax, vec![400]);
    assert_eq!(peak, 1e-4);
    for w in lrs.windows(2) {
        assert!((w[1] - w[0]).abs() <= 1e-4 / 400.0 + 1e-18);
    }
    assert!(lrs[5000] < 1e-2 * 1e-4);
}

#[test]
fn memorizes_a_single_point() {
    let m = s3r3();
    let target = Point(vec![0.5, 0.5, -0.5, 0.5, 0.3, -0.2, 0.7]);
    let net = NetworkSpec { input_dim: 7, hidden_dim: 128, num_layers: 2, time_embed_dim: 16, cond_embed_dim: 4, num_condition_classes: 1 };
    // a 2000-step run is too short for the 0.999 default EMA window
    let cfg = TrainConfig { total_steps: 2000, batch_size: 64, max_lr: 1e-2, ema_decay: 0.99, seed: 11, ..TrainConfig::default() };
    let prior = WrappedGaussian::isotropic(&m, identity(), 1.0).unwrap();
    let out = train(&cfg, net, &m, &Dataset::unconditional(vec![target.clone()]), &prior).unwrap();
    let n = out.history.len();
    let head: f64 = out.history[..n / 10].iter().map(|r| r.loss).sum::<f64>();
    let tail: f64 = out.history[n - n / 10..].iter().map(|r| r.loss).sum::<f64>();
    assert!(tail < head);
    let ema = out.ema_params();
    let samples = sample_ode_batch(
        &m,
        &ema,
        &prior,
        &IntegratorConfig::new(100).unwrap(),
        &GuidanceConfig::disabled(),
        &[None; 100],
        &mut seeded(12),
    )
    .unwrap();
    let close = samples.points.iter().filter(|p| m.distance(p, &target).unwrap() < 0.05).count();
    assert!(close >= 95, "{close}/100 within 0.05");
}
