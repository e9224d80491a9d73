//! Overfits one synthetic clip at toy scale, reporting reconstruction PSNR
//! and decoded-landmark error as training progresses.
//!
//! `cargo run --release --example overfit -- [steps] [report_every]`

use std::time::Instant;

use motiongan::generate::{decode_landmarks, generate_frames};
use motiongan::{GenerationMode, TrainConfig, Trainer};
use motiongan_core::dataset::{make_synthetic_clip, valid_window_pairs};
use motiongan_core::metrics::{auc_and_fr, normalized_rms, psnr_frames, DEFAULT_MAX_ERROR};
use motiongan_core::{SyntheticFaceParams, VideoClip};

fn report(trainer: &Trainer, clip: &VideoClip) -> motiongan::Result<()> {
    let cfg = &trainer.config;
    let sigma = cfg.sigma;
    let nets = &trainer.nets;
    let mut window_psnr = Vec::new();
    for (s, f) in valid_window_pairs(clip.len(), cfg.t, cfg.min_gap) {
        let targets = &clip.landmarks[f..f + cfg.t];
        let out = generate_frames(nets, &clip.frames[s], &clip.landmarks[s], targets, sigma, GenerationMode::Windowed)?;
        for (o, g) in out.iter().zip(&clip.frames[f..f + cfg.t]) {
            window_psnr.push(psnr_frames(o, g)?);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut line = format!("step {} window-psnr {:.2}", trainer.step(), mean(&window_psnr));
    for mode in [GenerationMode::Continuous, GenerationMode::Windowed] {
        let out = generate_frames(nets, &clip.frames[0], &clip.landmarks[0], &clip.landmarks, sigma, mode)?;
        let p: Vec<f64> = out.iter().zip(&clip.frames).map(|(o, g)| psnr_frames(o, g)).collect::<Result<_, _>>()?;
        let decoded = decode(trainer, &out)?;
        let errs: Vec<f64> = decoded
            .iter()
            .zip(&clip.landmarks)
            .map(|(d, g)| normalized_rms(d, g))
            .collect::<Result<_, _>>()?;
        let (auc, fr) = auc_and_fr(&errs, DEFAULT_MAX_ERROR)?;
        if let Ok(dir) = std::env::var("OVERFIT_DUMP") {
            let n = cfg.image_size;
            let mut side = motiongan_core::Frame::filled(n, 2 * n, 0.0);
            for y in 0..n {
                for x in 0..n {
                    side.set_pixel(y, x, out[8].pixel(y, x));
                    side.set_pixel(y, n + x, clip.frames[8].pixel(y, x));
                }
            }
            side.save_png(&std::path::Path::new(&dir).join(format!("{mode:?}_{:05}.png", trainer.step())))?;
        }
        line += &format!(" | {mode:?} psnr {:.2} nrmse {:.4} auc {auc:.1} fr {fr:.1}", mean(&p), mean(&errs));
    }
    let real = decode(trainer, &clip.frames)?;
    let errs: Vec<f64> = real
        .iter()
        .zip(&clip.landmarks)
        .map(|(d, g)| normalized_rms(d, g))
        .collect::<Result<_, _>>()?;
    line += &format!(" | real nrmse {:.4}", mean(&errs));
    println!("{line}");
    Ok(())
}

fn decode(trainer: &Trainer, frames: &[motiongan_core::Frame]) -> motiongan::Result<Vec<motiongan_core::LandmarkSet>> {
    decode_landmarks(&trainer.nets, frames)
}

fn main() -> motiongan::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let every: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(250);
    let mut cfg = TrainConfig {
        batch_size: 1,
        ..TrainConfig::toy()
    };
    if let Ok(text) = std::env::var("OVERFIT_CONFIG") {
        cfg = TrainConfig::parse(&format!("toy_scale = true\nbatch_size = 1\n{}", text.replace(';', "\n")))?;
    }
    let frames: usize = std::env::var("OVERFIT_FRAMES").ok().and_then(|s| s.parse().ok()).unwrap_or(16);
    let clip = make_synthetic_clip(&SyntheticFaceParams::default(), frames, cfg.image_size, 0)?;
    let mut trainer = Trainer::new(&cfg, tch::Device::Cpu)?;
    let corpus = [clip.clone()];
    let start = Instant::now();
    report(&trainer, &clip)?;
    while trainer.step() < steps {
        let batch = trainer.sample_batch(&corpus)?;
        trainer.train_step(&batch)?;
        if trainer.step() % every == 0 {
            report(&trainer, &clip)?;
            println!("  elapsed {:.0} s", start.elapsed().as_secs_f64());
        }
    }
    Ok(())
}
