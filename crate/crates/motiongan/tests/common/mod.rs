//! Test-side oracles shared by the integration suites.
#![allow(dead_code)]

use motiongan::losses::{
    adversarial_loss_d_logits, feature_matching_loss, frame_adversarial_loss_d_logits, identity_loss,
    identity_loss_from_embeddings, image_reconstruction_loss, landmark_loss, video_adversarial_loss_d_logits,
    weighted_generator_loss, LossWeights,
};
use motiongan::networks::ToyEmbedder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tch::{Device, Kind, Tensor};

pub const PROBES: usize = 10;
pub const FD_STEP: f64 = 1e-6;
pub const FD_TOLERANCE: f64 = 1e-4;
/// Step for quadratic losses (central differences are exact at any step) and
/// for saturated logits, where a 1e-6 step drowns in summation rounding.
const WIDE_STEP: f64 = 1e-3;
/// Gradient components below `GRAD_FLOOR` or below `RELATIVE_FLOOR` times the
/// largest component are compared absolutely at that scale.
const GRAD_FLOOR: f64 = 1e-7;
const RELATIVE_FLOOR: f64 = 1e-3;

pub fn uniform(rng: &mut ChaCha8Rng, shape: &[i64], scale: f64) -> Tensor {
    let n: i64 = shape.iter().product();
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
    Tensor::from_slice(&v).view(shape)
}

fn values(t: &Tensor) -> Vec<f64> {
    Vec::<f64>::try_from(&t.detach().to_kind(Kind::Double).contiguous().view([-1])).unwrap()
}

/// Largest relative error between the autograd gradient of `loss` with
/// respect to `inputs[wrt]` and a central difference, over `PROBES`
/// coordinates drawn from those where `admissible` holds.
pub fn fd_max_relative_error(
    inputs: &[Tensor],
    wrt: usize,
    loss: &dyn Fn(&[Tensor]) -> Tensor,
    admissible: &dyn Fn(usize) -> bool,
    rng: &mut ChaCha8Rng,
) -> f64 {
    fd_max_relative_error_with_step(inputs, wrt, loss, admissible, rng, FD_STEP)
}

/// As [`fd_max_relative_error`] with an explicit difference step.
pub fn fd_max_relative_error_with_step(
    inputs: &[Tensor],
    wrt: usize,
    loss: &dyn Fn(&[Tensor]) -> Tensor,
    admissible: &dyn Fn(usize) -> bool,
    rng: &mut ChaCha8Rng,
    step: f64,
) -> f64 {
    let shape = inputs[wrt].size();
    let base = values(&inputs[wrt]);
    let with = |x: Tensor| -> Vec<Tensor> {
        inputs
            .iter()
            .enumerate()
            .map(|(i, t)| if i == wrt { x.shallow_clone() } else { t.shallow_clone() })
            .collect()
    };
    let x = Tensor::from_slice(&base).view(shape.as_slice()).set_requires_grad(true);
    let y = loss(&with(x.shallow_clone()));
    let grad = values(&Tensor::run_backward(&[y], &[&x], false, false)[0]);
    let candidates: Vec<usize> = (0..base.len()).filter(|&i| admissible(i)).collect();
    assert!(!candidates.is_empty(), "no admissible probe coordinates");
    let eval = |i: usize, delta: f64| -> f64 {
        let mut v = base.clone();
        v[i] += delta;
        let t = Tensor::from_slice(&v).view(shape.as_slice());
        tch::no_grad(|| loss(&with(t)).double_value(&[]))
    };
    let floor = grad.iter().fold(GRAD_FLOOR, |m, g| m.max(g.abs() * RELATIVE_FLOOR));
    let mut worst = 0.0f64;
    for _ in 0..PROBES {
        let i = candidates[rng.gen_range(0..candidates.len())];
        let fd = (eval(i, step) - eval(i, -step)) / (2.0 * step);
        let ad = grad[i];
        let rel = (fd - ad).abs() / fd.abs().max(ad.abs()).max(floor);
        worst = worst.max(rel);
    }
    worst
}

fn any(_: usize) -> bool {
    true
}

/// Every loss term and every differentiable argument, as
/// `(name, max relative error)`.
pub fn loss_gradient_checks(seed: u64) -> Vec<(String, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut record = |name: &str, err: f64| out.push((name.to_string(), err));

    // L1 reconstruction: probes stay away from the kink at gen == gt.
    let gen = uniform(&mut rng, &[2, 3, 3, 8, 8], 1.0);
    let gt = uniform(&mut rng, &[2, 3, 3, 8, 8], 1.0);
    let (gv, tv) = (values(&gen), values(&gt));
    let away = |i: usize| (gv[i] - tv[i]).abs() > 1e-3;
    let f = |x: &[Tensor]| image_reconstruction_loss(&x[0], &x[1]).unwrap();
    record("image_reconstruction/gen", fd_max_relative_error(&[gen.shallow_clone(), gt.shallow_clone()], 0, &f, &away, &mut rng));
    record("image_reconstruction/gt", fd_max_relative_error(&[gen, gt], 1, &f, &away, &mut rng));

    let real = uniform(&mut rng, &[6, 1, 4, 4], 3.0);
    let fake = uniform(&mut rng, &[6, 1, 4, 4], 3.0);
    let f = |x: &[Tensor]| frame_adversarial_loss_d_logits(&x[0], &x[1]).unwrap();
    for (k, name) in ["frame_adversarial/real", "frame_adversarial/fake"].iter().enumerate() {
        record(name, fd_max_relative_error(&[real.shallow_clone(), fake.shallow_clone()], k, &f, &any, &mut rng));
    }
    let real = uniform(&mut rng, &[2, 4, 1, 4, 4], 3.0);
    let fake = uniform(&mut rng, &[2, 4, 1, 4, 4], 3.0);
    let f = |x: &[Tensor]| video_adversarial_loss_d_logits(&x[0], &x[1]).unwrap();
    for (k, name) in ["video_adversarial/real", "video_adversarial/fake"].iter().enumerate() {
        record(name, fd_max_relative_error(&[real.shallow_clone(), fake.shallow_clone()], k, &f, &any, &mut rng));
    }
    let extreme = uniform(&mut rng, &[3, 1, 2, 2], 30.0);
    let f = |x: &[Tensor]| adversarial_loss_d_logits(&x[0], &x[1]).unwrap();
    record(
        "adversarial/large_logits",
        fd_max_relative_error_with_step(&[extreme.shallow_clone(), -extreme], 0, &f, &any, &mut rng, WIDE_STEP),
    );

    let fm: Vec<Tensor> = vec![
        uniform(&mut rng, &[6, 8, 4, 4], 1.0),
        uniform(&mut rng, &[6, 8, 4, 4], 1.0),
        uniform(&mut rng, &[2, 3, 8, 4, 4], 1.0),
        uniform(&mut rng, &[2, 3, 8, 4, 4], 1.0),
    ];
    let f = |x: &[Tensor]| feature_matching_loss(&x[0], &x[1], &x[2], &x[3]).unwrap();
    for (k, name) in ["frame_gen", "frame_real", "video_gen", "video_real"].iter().enumerate() {
        record(
            &format!("feature_matching/{name}"),
            fd_max_relative_error_with_step(&fm, k, &f, &any, &mut rng, WIDE_STEP),
        );
    }

    let pred = uniform(&mut rng, &[2, 3, 68, 8, 8], 1.0);
    let target = uniform(&mut rng, &[2, 3, 68, 8, 8], 1.0).abs();
    let f = |x: &[Tensor]| landmark_loss(&x[0], &x[1]).unwrap();
    record("landmark/pred", fd_max_relative_error_with_step(&[pred, target], 0, &f, &any, &mut rng, WIDE_STEP));

    let emb = vec![
        uniform(&mut rng, &[2, 3, 16], 1.0),
        uniform(&mut rng, &[2, 16], 1.0),
        uniform(&mut rng, &[2, 3, 16], 1.0),
    ];
    let f = |x: &[Tensor]| identity_loss_from_embeddings(&x[0], &x[1], &x[2]).unwrap();
    for (k, name) in ["gen", "source", "gt"].iter().enumerate() {
        record(
            &format!("identity_embeddings/{name}"),
            fd_max_relative_error_with_step(&emb, k, &f, &any, &mut rng, WIDE_STEP),
        );
    }

    let mut embedder = ToyEmbedder::new(32, 7, Device::Cpu);
    embedder.var_store_mut().double();
    let faces = vec![
        uniform(&mut rng, &[1, 2, 3, 16, 16], 1.0),
        uniform(&mut rng, &[1, 3, 16, 16], 1.0),
        uniform(&mut rng, &[1, 2, 3, 16, 16], 1.0),
    ];
    let f = |x: &[Tensor]| identity_loss(&x[0], &x[1], &x[2], &embedder).unwrap();
    record("identity/gen_through_embedder", fd_max_relative_error(&faces, 0, &f, &any, &mut rng));

    // Weighted totals, composed from the component losses.
    let w = LossWeights::default();
    let parts = vec![
        uniform(&mut rng, &[1, 2, 3, 8, 8], 1.0),
        uniform(&mut rng, &[1, 2, 3, 8, 8], 1.0),
        uniform(&mut rng, &[1, 2, 68, 8, 8], 1.0),
        uniform(&mut rng, &[1, 2, 68, 8, 8], 1.0).abs(),
        uniform(&mut rng, &[1, 2, 16], 1.0),
        uniform(&mut rng, &[1, 16], 1.0),
        uniform(&mut rng, &[1, 2, 16], 1.0),
        uniform(&mut rng, &[2, 8, 4, 4], 1.0),
        uniform(&mut rng, &[2, 8, 4, 4], 1.0),
        uniform(&mut rng, &[1, 2, 8, 4, 4], 1.0),
        uniform(&mut rng, &[1, 2, 8, 4, 4], 1.0),
    ];
    let (a, b) = (values(&parts[0]), values(&parts[1]));
    let away = |i: usize| (a[i] - b[i]).abs() > 1e-3;
    let f = |x: &[Tensor]| {
        weighted_generator_loss(
            &image_reconstruction_loss(&x[0], &x[1]).unwrap(),
            &feature_matching_loss(&x[7], &x[8], &x[9], &x[10]).unwrap(),
            &landmark_loss(&x[2], &x[3]).unwrap(),
            &identity_loss_from_embeddings(&x[4], &x[5], &x[6]).unwrap(),
            &w,
        )
    };
    record("generator_total/frames", fd_max_relative_error(&parts, 0, &f, &away, &mut rng));
    for (k, name) in [(2, "heatmaps"), (4, "embeddings"), (7, "frame_features"), (9, "video_features")] {
        record(
            &format!("generator_total/{name}"),
            fd_max_relative_error_with_step(&parts, k, &f, &any, &mut rng, WIDE_STEP),
        );
    }
    let dv = vec![
        uniform(&mut rng, &[1, 4, 1, 4, 4], 3.0),
        uniform(&mut rng, &[1, 4, 1, 4, 4], 3.0),
        uniform(&mut rng, &[1, 4, 68, 8, 8], 1.0),
        uniform(&mut rng, &[1, 4, 68, 8, 8], 1.0).abs(),
    ];
    let f = |x: &[Tensor]| {
        video_adversarial_loss_d_logits(&x[0], &x[1]).unwrap() * w.lambda5 + landmark_loss(&x[2], &x[3]).unwrap() * w.lambda6
    };
    for (k, name) in [(0, "real_logits"), (1, "fake_logits")] {
        record(&format!("video_disc_total/{name}"), fd_max_relative_error(&dv, k, &f, &any, &mut rng));
    }
    record(
        "video_disc_total/heatmaps",
        fd_max_relative_error_with_step(&dv, 2, &f, &any, &mut rng, WIDE_STEP),
    );
    out
}
