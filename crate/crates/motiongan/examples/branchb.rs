//! Trains only the landmark branch of the video discriminator on one clip.

use motiongan::adam::Adam;
use motiongan::generate::decode_landmarks;
use motiongan::losses::landmark_loss;
use motiongan::networks::{sorted_variables, Networks};
use motiongan::TrainConfig;
use motiongan_core::dataset::make_synthetic_clip;
use motiongan_core::metrics::normalized_rms;
use motiongan_core::SyntheticFaceParams;
use tch::Tensor;

fn main() -> motiongan::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let lr: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e-4);
    let sigma_px: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let cfg = TrainConfig { batch_size: 1, ..TrainConfig::toy() };
    let clip = make_synthetic_clip(&SyntheticFaceParams::default(), 16, cfg.image_size, 0)?;
    let nets = Networks::new(&cfg.net_config(), 1, tch::Device::Cpu)?;
    let mut opt = Adam::new(sorted_variables(&nets.dv_vs), lr, 0.9, 0.999);
    let frames: Vec<Tensor> = clip.frames.iter().map(motiongan::tensor::frame_to_tensor).collect();
    let hms: Vec<Tensor> = clip
        .landmarks
        .iter()
        .map(|l| motiongan::tensor::landmarks_to_tensor(l, cfg.image_size, sigma_px))
        .collect::<Result<_, _>>()?;
    let t = cfg.t;
    for step in 0..=steps {
        let start = (step as usize * 3) % (clip.len() - t + 1);
        let f = Tensor::stack(&frames[start..start + t], 0).unsqueeze(0);
        let h = Tensor::stack(&hms[start..start + t], 0).unsqueeze(0);
        let out = nets.video_disc.forward(&f)?;
        let loss = landmark_loss(&out.heatmaps, &h)?;
        if step % 100 == 0 {
            let dec = decode_landmarks(&nets, &clip.frames)?;
            let e: f64 = dec.iter().zip(&clip.landmarks).map(|(d, g)| normalized_rms(d, g).unwrap()).sum::<f64>() / dec.len() as f64;
            println!("step {step} loss {:.3e} nrmse {e:.4}", loss.double_value(&[]));
        }
        opt.minimize(&loss)?;
    }
    Ok(())
}
