//! Times training steps at toy scale on one synthetic clip.

use std::time::Instant;

use motiongan::{TrainConfig, Trainer};
use motiongan_core::dataset::make_synthetic_clip;
use motiongan_core::SyntheticFaceParams;

fn main() -> motiongan::Result<()> {
    let steps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cfg = TrainConfig {
        batch_size: 1,
        ..TrainConfig::toy()
    };
    let clip = make_synthetic_clip(&SyntheticFaceParams::default(), 16, cfg.image_size, 0)?;
    let mut trainer = Trainer::new(&cfg, tch::Device::Cpu)?;
    let corpus = [clip];
    let batch = trainer.sample_batch(&corpus)?;
    trainer.train_step(&batch)?;
    let start = Instant::now();
    for _ in 0..steps {
        let batch = trainer.sample_batch(&corpus)?;
        let r = trainer.train_step(&batch)?;
        println!("{}", r.log_line(trainer.step()));
    }
    let per = start.elapsed().as_secs_f64() / steps as f64;
    println!("{per:.3} s/step over {steps} steps");
    Ok(())
}
