use std::sync::Arc;

use proptest::prelude::*;

use dcnet::learn::{
    lipschitz_estimate, loss_and_gradient, read_checkpoint, train, write_checkpoint, Adam, Architecture,
    CheckpointMeta, Dataset, IdentityHead, Network, NullspaceHead, OutputHead, PoolAxes, Sample, SaturationHead,
    TrainConfig,
};
use dcnet::linalg::{dot, l2_distance, norm};
use dcnet::operators::{RadonOperator, SaturationMap};
use dcnet::Rng;

fn random_net(arch: Architecture, rng: &mut Rng, spread: f64) -> Network<f64> {
    let n = Network::<f64>::zeros(arch).unwrap().param_count();
    let p: Vec<f64> = (0..n).map(|_| spread * rng.gaussian()).collect();
    Network::from_params(arch, p).unwrap()
}

fn two_layer() -> Architecture {
    Architecture {
        levels: 0,
        convs_per_level: 1,
        base_channels: 4,
        ..Default::default()
    }
}

fn loss_at(net: &Network<f64>, s: &Sample<f64>, h: usize, w: usize, head: &dyn OutputHead<f64>) -> f64 {
    let u = net.forward(&s.input, h, w).unwrap();
    let out = head.apply(&s.input, &u).unwrap();
    out.iter().zip(&s.target).map(|(a, b)| (a - b).powi(2)).sum()
}

/// Max over points of `‖g − g_fd‖ / ‖g_fd‖` with central differences.
fn worst_gradient_error(arch: Architecture, h: usize, w: usize, points: usize, head: &dyn OutputHead<f64>, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let net = random_net(arch, &mut rng, 0.5);
        let s = Sample {
            input: rng.uniform_vec(h * w, -1.0, 1.0),
            target: rng.uniform_vec(h * w, -1.0, 1.0),
        };
        let (_, g) = loss_and_gradient(&net, &[&s], h, w, 0.0, head).unwrap();
        let eps = 1e-6;
        let mut fd = vec![0.0; g.len()];
        for (i, slot) in fd.iter_mut().enumerate() {
            let mut plus = net.clone();
            plus.params_mut()[i] += eps;
            let mut minus = net.clone();
            minus.params_mut()[i] -= eps;
            *slot = (loss_at(&plus, &s, h, w, head) - loss_at(&minus, &s, h, w, head)) / (2.0 * eps);
        }
        worst = worst.max(l2_distance(&g, &fd).unwrap() / norm(&fd));
    }
    worst
}

#[test]
fn parameter_gradient_matches_central_differences() {
    assert!(worst_gradient_error(two_layer(), 6, 6, 100, &IdentityHead, 1) <= 1e-4);
}

#[test]
fn encoder_decoder_gradient_matches_central_differences() {
    let arch = Architecture { levels: 1, base_channels: 3, ..Default::default() };
    assert!(worst_gradient_error(arch, 8, 8, 10, &IdentityHead, 2) <= 1e-4);
    let cols = Architecture { pool_axes: PoolAxes::Columns, kernel: (1, 3), ..arch };
    assert!(worst_gradient_error(cols, 4, 8, 10, &IdentityHead, 3) <= 1e-4);
}

#[test]
fn head_pullbacks_match_central_differences() {
    let radon = Arc::new(RadonOperator::<f64>::new(6, 3).unwrap());
    assert!(worst_gradient_error(two_layer(), 6, 6, 10, &NullspaceHead(radon), 4) <= 1e-4);
    let m = SaturationMap::constant(6, 6, 0.3).unwrap();
    assert!(worst_gradient_error(two_layer(), 6, 6, 10, &SaturationHead(m), 5) <= 1e-4);
}

#[test]
fn jvp_and_backward_are_adjoint_derivatives() {
    let arch = Architecture { levels: 1, base_channels: 3, ..Default::default() };
    let mut rng = Rng::new(6);
    for _ in 0..10 {
        let net = random_net(arch, &mut rng, 0.5);
        let x: Vec<f64> = rng.uniform_vec(64, -1.0, 1.0);
        let v: Vec<f64> = rng.gaussian_vec(64);
        let r: Vec<f64> = rng.gaussian_vec(64);
        let cache = net.forward_cached(&x, 8, 8).unwrap();
        let jv = net.jvp(&cache, &v);
        let jtr = net.backward(&cache, &r, None);
        assert!((dot(&jv, &r) - dot(&v, &jtr)).abs() <= 1e-10 * (1.0 + dot(&jv, &r).abs()));
        // directional finite difference of the forward map
        let eps = 1e-6;
        let p: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
        let m: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
        let (fp, fm) = (net.forward(&p, 8, 8).unwrap(), net.forward(&m, 8, 8).unwrap());
        let fd: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        assert!(l2_distance(&jv, &fd).unwrap() <= 1e-5 * norm(&fd).max(1e-12));
    }
}

#[test]
fn adam_matches_the_textbook_recursion() {
    let mut opt = Adam::<f64>::new(3);
    let mut p = vec![1.0, -2.0, 0.5];
    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
    let mut q = p.clone();
    let (mut m, mut v) = (vec![0.0; 3], vec![0.0; 3]);
    let mut rng = Rng::new(7);
    for t in 1..=25 {
        let g: Vec<f64> = rng.gaussian_vec(3);
        let lr = 0.01 / t as f64;
        opt.step(&mut p, &g, lr);
        for i in 0..3 {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let mh = m[i] / (1.0 - b1.powi(t));
            let vh = v[i] / (1.0 - b2.powi(t));
            q[i] -= lr * mh / (vh.sqrt() + eps);
        }
    }
    for (a, b) in p.iter().zip(&q) {
        assert!((a - b).abs() < 1e-14);
    }
    assert_eq!(opt.steps(), 25);
}

#[test]
fn memorizes_a_single_sample() {
    let mut rng = Rng::new(8);
    let x: Vec<f64> = rng.uniform_vec(36, 0.0, 1.0);
    let y: Vec<f64> = x.iter().map(|v| 0.5 * v + 0.1).collect();
    let data = Dataset::new(6, 6, vec![Sample { input: x, target: y }]).unwrap();
    let mut net = Network::init(Architecture::default(), &mut rng).unwrap();
    let cfg = TrainConfig { batch_size: 1, epochs: 3000, lr_start: 1e-2, lr_final: 1e-3, ..Default::default() };
    let r = train(&mut net, &data, None, &IdentityHead, &cfg, &mut rng).unwrap();
    assert!(r.final_train_loss < 1e-4 * r.initial_train_loss, "{} -> {}", r.initial_train_loss, r.final_train_loss);
}

#[test]
fn lipschitz_bound_dominates_observed_ratios() {
    let arch = Architecture { levels: 1, base_channels: 4, ..Default::default() };
    let mut rng = Rng::new(9);
    for _ in 0..5 {
        let net = random_net(arch, &mut rng, 0.3);
        let est = lipschitz_estimate(&net, 8, 8, 20, &mut rng).unwrap();
        assert!(est.lower <= est.upper * (1.0 + 1e-9), "{est:?}");
        for _ in 0..50 {
            let a: Vec<f64> = rng.uniform_vec(64, -1.0, 1.0);
            let b: Vec<f64> = rng.uniform_vec(64, -1.0, 1.0);
            let ratio = l2_distance(&net.forward(&a, 8, 8).unwrap(), &net.forward(&b, 8, 8).unwrap()).unwrap()
                / l2_distance(&a, &b).unwrap();
            assert!(ratio <= est.upper * (1.0 + 1e-9));
        }
    }
}

#[test]
fn weight_decay_adds_twice_lambda_w() {
    let mut rng = Rng::new(10);
    let net = random_net(two_layer(), &mut rng, 0.5);
    let s = Sample { input: rng.uniform_vec(36, 0.0, 1.0), target: rng.uniform_vec(36, 0.0, 1.0) };
    let (_, g0) = loss_and_gradient(&net, &[&s], 6, 6, 0.0, &IdentityHead).unwrap();
    let (_, g1) = loss_and_gradient(&net, &[&s], 6, 6, 0.25, &IdentityHead).unwrap();
    for ((a, b), (&p, keep)) in g0.iter().zip(&g1).zip(net.params().iter().zip(net.kernel_mask())) {
        let want = if keep { a + 0.5 * p } else { *a };
        assert!((b - want).abs() < 1e-12);
    }
}

fn meta() -> CheckpointMeta {
    CheckpointMeta {
        label: "unit".into(),
        seed: 11,
        epochs: 3,
        final_train_loss: Some(0.125),
        final_val_loss: None,
        alpha: Some(1e-3),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn checkpoint_round_trips_bits(seed in any::<u64>(), levels in 0usize..3, residual in any::<bool>()) {
        let arch = Architecture { levels, base_channels: 2, residual, ..Default::default() };
        let net = random_net(arch, &mut Rng::new(seed), 1.0);
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &net, &meta()).unwrap();
        let (back, m): (Network<f64>, _) = read_checkpoint(bytes.as_slice()).unwrap();
        prop_assert_eq!(&m, &meta());
        prop_assert_eq!(back.architecture(), net.architecture());
        for (a, b) in back.params().iter().zip(net.params()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        let mut again = Vec::new();
        write_checkpoint(&mut again, &back, &m).unwrap();
        prop_assert_eq!(again, bytes);
    }
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let net = random_net(two_layer(), &mut Rng::new(12), 1.0);
    let mut bytes = Vec::new();
    write_checkpoint(&mut bytes, &net, &meta()).unwrap();
    let mut bad_magic = bytes.clone();
    bad_magic[0] ^= 0xff;
    assert!(read_checkpoint::<f64, _>(bad_magic.as_slice()).is_err());
    assert!(read_checkpoint::<f64, _>(&bytes[..bytes.len() - 3]).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(read_checkpoint::<f64, _>(extra.as_slice()).is_err());
}

#[test]
fn f32_network_tracks_f64() {
    let arch = Architecture { levels: 1, base_channels: 3, ..Default::default() };
    let net = random_net(arch, &mut Rng::new(13), 0.5);
    let net32 = Network::<f32>::from_params(arch, net.params().iter().map(|&p| p as f32).collect()).unwrap();
    let x: Vec<f64> = Rng::new(14).uniform_vec(64, 0.0, 1.0);
    let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
    let a = net.forward(&x, 8, 8).unwrap();
    let b = net32.forward(&x32, 8, 8).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - *q as f64).abs() < 1e-4 * (1.0 + p.abs()));
    }
}
