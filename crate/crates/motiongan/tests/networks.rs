use motiongan::networks::{FaceEmbedder, GeneratorState, Networks, ToyEmbedder};
use motiongan::NetConfig;
use motiongan_core::dataset::make_synthetic_clip;
use motiongan_core::SyntheticFaceParams;
use motiongan::tensor::frame_to_tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tch::{Device, Kind, Tensor};

fn small() -> NetConfig {
    NetConfig {
        image_size: 32,
        ..NetConfig::toy()
    }
}

fn randn(shape: &[i64], kind: Kind) -> Tensor {
    Tensor::randn(shape, (kind, Device::Cpu))
}

fn heat(shape: &[i64], kind: Kind) -> Tensor {
    Tensor::rand(shape, (kind, Device::Cpu))
}

#[test]
fn toy_shapes_and_output_range() {
    tch::manual_seed(0);
    let cfg = NetConfig::toy();
    let nets = Networks::new(&cfg, 1, Device::Cpu).unwrap();
    let n = 64;
    let s = randn(&[2, 3, n, n], Kind::Float);
    let l = heat(&[2, 68, n, n], Kind::Float);
    let seq = heat(&[2, 4, 68, n, n], Kind::Float);
    let out = tch::no_grad(|| nets.generator.generate_sequence(&s, &l, &seq)).unwrap();
    assert_eq!(out.size(), [2, 4, 3, n, n]);
    assert!(out.abs().max().double_value(&[]) <= 1.0);

    let f = randn(&[2, 3, n, n], Kind::Float);
    let d = nets.frame_disc.forward(&s, &l, &f, &seq.select(1, 0)).unwrap();
    assert_eq!(d.patch_map.size(), [2, 1, 16, 16]);
    let state = GeneratorState::zeros(&cfg, 2, Kind::Float, Device::Cpu);
    assert_eq!(d.features.size(), state.hidden.size(), "features hook matches the bottleneck");
    let mean = d.patch_map.view([2, -1]).mean_dim(1, false, None);
    assert!((&d.scalar - mean).abs().max().double_value(&[]) < 1e-6);

    let v = nets.video_disc.forward(&out.detach()).unwrap();
    assert_eq!(v.heatmaps.size(), [2, 4, 68, n, n]);
    assert_eq!(v.adversarial.patch_map.size(), [2, 4, 1, 16, 16]);
    let mean = v.adversarial.patch_map.view([2, -1]).mean_dim(1, false, None);
    assert!((&v.adversarial.scalar - mean).abs().max().double_value(&[]) < 1e-6);
}

#[test]
fn shape_errors() {
    let cfg = small();
    let nets = Networks::new(&cfg, 1, Device::Cpu).unwrap();
    let s = randn(&[1, 3, 32, 32], Kind::Float);
    let l = heat(&[1, 68, 32, 32], Kind::Float);
    let wrong = heat(&[1, 68, 16, 16], Kind::Float);
    let state = GeneratorState::zeros(&cfg, 1, Kind::Float, Device::Cpu);
    assert!(matches!(nets.generator.step(&s, &l, &wrong, &state), Err(motiongan::Error::Shape(_))));
    assert!(nets.frame_disc.forward(&s, &l, &randn(&[1, 3, 16, 16], Kind::Float), &l).is_err());
    assert!(nets.video_disc.forward(&randn(&[1, 3, 3, 32, 32], Kind::Float)).is_err());
    let empty = Tensor::zeros([1, 0, 68, 32, 32], (Kind::Float, Device::Cpu));
    assert!(matches!(
        nets.generator.generate_sequence(&s, &l, &empty),
        Err(motiongan::Error::Argument(_))
    ));
}

/// Threads the generator state by hand.
fn threaded(nets: &Networks, s: &Tensor, l: &Tensor, seq: &Tensor) -> Tensor {
    let t = seq.size()[1];
    let mut state = GeneratorState::zeros(&nets.cfg, s.size()[0], s.kind(), s.device());
    let mut frames = Vec::new();
    for i in 0..t {
        let (f, next) = nets.generator.step(s, l, &seq.select(1, i), &state).unwrap();
        frames.push(f);
        state = next;
    }
    Tensor::stack(&frames, 1)
}

#[test]
fn sequence_equals_threaded_steps() {
    tch::manual_seed(3);
    let nets = Networks::new(&small(), 2, Device::Cpu).unwrap();
    let s = randn(&[1, 3, 32, 32], Kind::Float);
    let l = heat(&[1, 68, 32, 32], Kind::Float);
    for t in 1..=8 {
        let seq = heat(&[1, t, 68, 32, 32], Kind::Float);
        tch::no_grad(|| {
            let a = nets.generator.generate_sequence(&s, &l, &seq).unwrap();
            let b = threaded(&nets, &s, &l, &seq);
            let diff = (a - b).abs().max().double_value(&[]);
            assert!(diff <= 1e-6, "T={t}: {diff}");
        });
    }
}

#[test]
fn recurrent_memory_and_determinism() {
    tch::manual_seed(4);
    let nets = Networks::new(&small(), 5, Device::Cpu).unwrap();
    let s = randn(&[1, 3, 32, 32], Kind::Float);
    let l = heat(&[1, 68, 32, 32], Kind::Float);
    let seq = heat(&[1, 4, 68, 32, 32], Kind::Float);
    let perturbed = seq.copy();
    let _ = perturbed.select(1, 0).copy_(&heat(&[1, 68, 32, 32], Kind::Float));
    tch::no_grad(|| {
        let a = nets.generator.generate_sequence(&s, &l, &seq).unwrap();
        let again = nets.generator.generate_sequence(&s, &l, &seq).unwrap();
        assert!(a.equal(&again));
        let b = nets.generator.generate_sequence(&s, &l, &perturbed).unwrap();
        let frame2 = (a.select(1, 1) - b.select(1, 1)).abs().max().double_value(&[]);
        assert!(frame2 > 1e-6, "frame 2 ignores l_1: {frame2}");
    });
}

#[test]
fn output_depends_on_target_heatmap() {
    tch::manual_seed(6);
    let mut nets = Networks::new(&small(), 7, Device::Cpu).unwrap();
    nets.to_double();
    let s = randn(&[1, 3, 32, 32], Kind::Double);
    let l = heat(&[1, 68, 32, 32], Kind::Double);
    let lt = heat(&[1, 68, 32, 32], Kind::Double).set_requires_grad(true);
    let state = GeneratorState::zeros(&nets.cfg, 1, Kind::Double, Device::Cpu);
    let (f, _) = nets.generator.step(&s, &l, &lt, &state).unwrap();
    let g = Tensor::run_backward(&[f.sum(Kind::Double)], &[&lt], false, false);
    assert!(g[0].norm().double_value(&[]) > 0.0);

    // One pixel nudged: central difference agrees with the input gradient.
    let h = 1e-6;
    let (c, y, x) = (17, 10, 21);
    let eval = |delta: f64| {
        let p = lt.detach().copy();
        let _ = p.get(0).get(c).get(y).get(x).g_add_scalar_(delta);
        tch::no_grad(|| nets.generator.step(&s, &l, &p, &state).unwrap().0.sum(Kind::Double).double_value(&[]))
    };
    let fd = (eval(h) - eval(-h)) / (2.0 * h);
    let ad = g[0].double_value(&[0, c, y, x]);
    assert!(fd != 0.0);
    assert!((fd - ad).abs() <= 1e-4 * fd.abs().max(ad.abs()), "{fd} vs {ad}");
}

#[test]
fn outputs_finite_on_random_inputs() {
    tch::manual_seed(8);
    let cfg = small();
    let nets = Networks::new(&cfg, 9, Device::Cpu).unwrap();
    tch::no_grad(|| {
        for i in 0..100 {
            let scale = [0.1, 1.0, 10.0][i % 3];
            let s = randn(&[1, 3, 32, 32], Kind::Float) * scale;
            let l = heat(&[1, 68, 32, 32], Kind::Float);
            let seq = heat(&[1, 4, 68, 32, 32], Kind::Float);
            let g = nets.generator.generate_sequence(&s, &l, &seq).unwrap();
            let d = nets.frame_disc.forward(&s, &l, &s, &l).unwrap();
            let v = nets.video_disc.forward(&(g.shallow_clone() * scale)).unwrap();
            let e = nets.embedder.embed(&s).unwrap();
            for t in [&g, &d.logits, &d.features, &v.adversarial.logits, &v.heatmaps, &e] {
                assert!(bool::try_from(t.isfinite().all()).unwrap(), "non-finite output at input {i}");
            }
        }
    });
}

#[test]
fn every_trained_parameter_receives_gradient() {
    tch::manual_seed(10);
    let cfg = small();
    let nets = Networks::new(&cfg, 11, Device::Cpu).unwrap();
    let s = randn(&[2, 3, 32, 32], Kind::Float);
    let l = heat(&[2, 68, 32, 32], Kind::Float);
    let seq = heat(&[2, 4, 68, 32, 32], Kind::Float);
    let g = nets.generator.generate_sequence(&s, &l, &seq).unwrap();
    let d = nets.frame_disc.forward(&s, &l, &g.select(1, 0), &l).unwrap();
    let v = nets.video_disc.forward(&g).unwrap();
    let loss = g.square().mean(Kind::Float)
        + d.logits.square().mean(Kind::Float)
        + d.features.square().mean(Kind::Float)
        + v.adversarial.logits.square().mean(Kind::Float)
        + v.heatmaps.square().mean(Kind::Float);
    let named: Vec<(String, Tensor)> = nets
        .named_parameters()
        .into_iter()
        .filter(|(n, _)| !n.starts_with("embed/"))
        .collect();
    let params: Vec<&Tensor> = named.iter().map(|(_, t)| t).collect();
    let grads = Tensor::run_backward(&[loss], &params, false, false);
    for ((name, _), grad) in named.iter().zip(&grads) {
        assert!(grad.defined(), "{name} unused");
        assert!(grad.norm().double_value(&[]) > 0.0, "{name} has zero gradient");
    }
    for (name, p) in nets.embedder.parameters() {
        assert!(!p.requires_grad(), "embedder parameter {name} is trainable");
    }
}

#[test]
fn embedder_is_deterministic() {
    let e = ToyEmbedder::new(128, 7, Device::Cpu);
    let face = randn(&[1, 3, 64, 64], Kind::Float);
    let a = e.embed(&face).unwrap();
    let b = e.embed(&face).unwrap();
    assert_eq!(a.size(), [1, 128]);
    assert!(a.equal(&b));
}

fn cosine(a: &Tensor, b: &Tensor) -> f64 {
    let (a, b) = (a.view([-1]), b.view([-1]));
    (a.dot(&b) / (a.norm() * b.norm())).double_value(&[])
}

#[test]
fn embedder_separates_identities() {
    let cfg = NetConfig::toy();
    let e = ToyEmbedder::new(cfg.embed_dim, cfg.embed_seed, Device::Cpu);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n_frames = 24;
    let identities: Vec<_> = (0..20)
        .map(|i| {
            let p = SyntheticFaceParams::random(&mut rng, n_frames);
            make_synthetic_clip(&p, n_frames, 64, i).unwrap()
        })
        .collect();
    let embeds: Vec<Vec<Tensor>> = tch::no_grad(|| {
        identities
            .iter()
            .map(|c| c.frames.iter().map(|f| e.embed(&frame_to_tensor(f).unsqueeze(0)).unwrap()).collect())
            .collect()
    });
    let mut wins = 0;
    for _ in 0..100 {
        let a = rng.gen_range(0..identities.len());
        let mut b = rng.gen_range(0..identities.len());
        while identities[b].identity_id == identities[a].identity_id {
            b = rng.gen_range(0..identities.len());
        }
        let (i, j, k) = (rng.gen_range(0..n_frames), rng.gen_range(0..n_frames), rng.gen_range(0..n_frames));
        let same = cosine(&embeds[a][i], &embeds[a][j]);
        let other = cosine(&embeds[a][i], &embeds[b][k]);
        if other < same {
            wins += 1;
        }
    }
    // One-sided sign test at p < 0.001 needs at least 66 of 100.
    assert!(wins >= 66, "same-identity pairs more similar in only {wins} of 100 pairs");
}
