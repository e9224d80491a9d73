//! Alternating D_f / D_v / G optimization with checkpointing and a loss log.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use motiongan_core::dataset::sample_window;
use motiongan_core::VideoClip;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tch::{Device, Tensor};

use crate::adam::Adam;
use crate::checkpoint::{self, Checkpoint, CheckpointHeader, RngState};
use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::losses::{
    feature_matching_loss, frame_adversarial_loss_d_logits, identity_loss, image_reconstruction_loss, landmark_loss,
    scalar, video_adversarial_loss_d_logits, weighted_generator_loss, LossReport, LossWeights,
};
use crate::networks::{sorted_variables, FaceEmbedder, Networks};
use crate::tensor::WindowBatch;

pub const LOSS_LOG: &str = "losses.log";

pub fn checkpoint_name(step: u64) -> String {
    format!("step_{step:08}.ckpt")
}

fn prefixed(prefix: &str, vs: &tch::nn::VarStore) -> Vec<(String, Tensor)> {
    sorted_variables(vs)
        .into_iter()
        .map(|(n, t)| (format!("{prefix}/{n}"), t))
        .collect()
}

/// All mutable training state: networks, three optimizers, the window
/// sampler and the step counter.
#[derive(Debug)]
pub struct Trainer {
    pub config: TrainConfig,
    pub nets: Networks,
    pub weights: LossWeights,
    opt_g: Adam,
    opt_df: Adam,
    opt_dv: Adam,
    rng: ChaCha8Rng,
    step: u64,
    running: [f64; 7],
}

impl Trainer {
    pub fn new(config: &TrainConfig, device: Device) -> Result<Self> {
        config.validate()?;
        let nets = Networks::new(&config.net_config(), config.seed, device)?;
        Ok(Self::assemble(config, nets, ChaCha8Rng::seed_from_u64(config.seed)))
    }

    fn assemble(config: &TrainConfig, nets: Networks, rng: ChaCha8Rng) -> Self {
        let adam = |params| Adam::new(params, config.adam_alpha, config.adam_beta1, config.adam_beta2);
        Self {
            config: config.clone(),
            weights: LossWeights::from(config),
            opt_g: adam(prefixed("g", &nets.g_vs)),
            opt_df: adam(prefixed("df", &nets.df_vs)),
            opt_dv: adam(prefixed("dv", &nets.dv_vs)),
            nets,
            rng,
            step: 0,
            running: [0.0; 7],
        }
    }

    /// Restores networks, optimizer moments, sampler position and step.
    pub fn from_checkpoint(path: &Path, device: Device) -> Result<Self> {
        let ckpt = Checkpoint::read(path)?;
        let h = &ckpt.header;
        h.train.validate()?;
        let nets = Networks::new(&h.net, h.train.seed, device)?;
        ckpt.restore(&nets.named_parameters())?;
        let mut seed = <ChaCha8Rng as SeedableRng>::Seed::default();
        seed.copy_from_slice(&h.rng.seed);
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(h.rng.stream);
        let word_pos: u128 = h
            .rng
            .word_pos
            .parse()
            .map_err(|_| Error::checkpoint(path, "malformed rng position"))?;
        rng.set_word_pos(word_pos);
        let mut trainer = Self::assemble(&h.train, nets, rng);
        let lookup = |k: &str| ckpt.get(k);
        for opt in [&mut trainer.opt_g, &mut trainer.opt_df, &mut trainer.opt_dv] {
            opt.load_state(h.step, &lookup)
                .map_err(|e| Error::checkpoint(path, e.to_string()))?;
        }
        trainer.step = h.step;
        trainer.running = h.running_means;
        Ok(trainer)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Mean of each loss component over all steps taken so far.
    pub fn running_means(&self) -> [f64; 7] {
        self.running
    }

    /// Names of the parameters each optimizer updates.
    pub fn optimized_parameter_names(&self) -> Vec<String> {
        [&self.opt_g, &self.opt_df, &self.opt_dv]
            .iter()
            .flat_map(|o| o.params().iter().map(|(n, _)| n.clone()))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = CheckpointHeader {
            format: checkpoint::FORMAT.to_string(),
            net: self.nets.cfg.clone(),
            train: self.config.clone(),
            step: self.step,
            rng: RngState {
                seed: self.rng.get_seed(),
                stream: self.rng.get_stream(),
                word_pos: self.rng.get_word_pos().to_string(),
            },
            running_means: self.running,
            tensors: Vec::new(),
        };
        let mut tensors = self.nets.named_parameters();
        for opt in [&self.opt_g, &self.opt_df, &self.opt_dv] {
            tensors.extend(opt.state_tensors());
        }
        checkpoint::write(path, header, &tensors)
    }

    /// Draws `batch_size` windows, each from a uniformly chosen clip long enough
    /// to hold one.
    pub fn sample_batch(&mut self, corpus: &[VideoClip]) -> Result<WindowBatch> {
        let (t, gap) = (self.config.t, self.config.min_gap);
        let usable: Vec<&VideoClip> = corpus.iter().filter(|c| c.len() >= t + gap).collect();
        if usable.is_empty() {
            return Err(Error::Argument(format!(
                "no clip holds a window (need at least {} frames)",
                t + gap
            )));
        }
        let size = self.config.image_size;
        let mut windows = Vec::with_capacity(self.config.batch_size);
        for _ in 0..self.config.batch_size {
            let clip = usable[self.rng.gen_range(0..usable.len())];
            if clip.frame_shape() != (size, size) {
                return Err(Error::Argument(format!(
                    "clip '{}' has frames of {:?}, config expects {size}x{size}",
                    clip.identity_id,
                    clip.frame_shape()
                )));
            }
            windows.push(sample_window(clip, t, gap, &mut self.rng)?);
        }
        Ok(WindowBatch::from_windows(&windows, self.config.sigma)?.to(self.nets.kind(), self.nets.device()))
    }

    fn finite(&self, name: &'static str, t: &Tensor) -> Result<f64> {
        let v = scalar(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                loss: name,
                step: self.step + 1,
            })
        }
    }

    /// One D_f update, one D_v update, then one G update. Reported values are
    /// the losses each network minimized, measured before its update.
    pub fn train_step(&mut self, batch: &WindowBatch) -> Result<LossReport> {
        let w = self.weights;
        let size = batch.frames.size();
        let (b, t) = (size[0], size[1]);
        let flat = |x: &Tensor| {
            let s = x.size();
            x.reshape([b * t, s[2], s[3], s[4]])
        };
        let repeat = |x: &Tensor| {
            let s = x.size();
            x.unsqueeze(1).expand([b, t, s[1], s[2], s[3]], false).reshape([b * t, s[1], s[2], s[3]])
        };
        let s = &batch.source;
        let l = &batch.source_heatmap;
        let (s_rep, l_rep) = (repeat(s), repeat(l));
        let real = &batch.frames;
        let real_flat = flat(real);
        let lt = flat(&batch.heatmaps);

        let fake = self.nets.generator.generate_sequence(s, l, &batch.heatmaps)?;
        let fake_detached = fake.detach();

        let df = &self.nets.frame_disc;
        let df_real = df.forward(&s_rep, &l_rep, &real_flat, &lt)?;
        let df_fake = df.forward(&s_rep, &l_rep, &flat(&fake_detached), &lt)?;
        let df_adv = frame_adversarial_loss_d_logits(&df_real.logits, &df_fake.logits)?;
        let df_adv_v = self.finite("df_adv", &df_adv)?;
        self.opt_df.minimize(&df_adv)?;

        let dv = &self.nets.video_disc;
        let dv_real = dv.forward(real)?;
        let dv_fake = dv.forward(&fake_detached)?;
        let dv_adv = video_adversarial_loss_d_logits(&dv_real.adversarial.logits, &dv_fake.adversarial.logits)?;
        let dv_lms = landmark_loss(&dv_real.heatmaps, &batch.heatmaps)?;
        let dv_adv_v = self.finite("dv_adv", &dv_adv)?;
        let dv_lms_v = self.finite("dv_lms", &dv_lms)?;
        self.opt_dv.minimize(&(&dv_adv * w.lambda5 + &dv_lms * w.lambda6))?;

        let (df_real_feat, dv_real_feat) = tch::no_grad(|| -> Result<_> {
            let f = self.nets.frame_disc.forward(&s_rep, &l_rep, &real_flat, &lt)?.features;
            let v = self.nets.video_disc.forward(real)?.adversarial.features;
            Ok((f, v))
        })?;
        let df_gen = self.nets.frame_disc.forward(&s_rep, &l_rep, &flat(&fake), &lt)?;
        let dv_gen = self.nets.video_disc.forward(&fake)?;
        let g_img = image_reconstruction_loss(&fake, real)?;
        let g_fm = feature_matching_loss(&df_gen.features, &df_real_feat, &dv_gen.adversarial.features, &dv_real_feat)?;
        let g_lms = landmark_loss(&dv_gen.heatmaps, &batch.heatmaps)?;
        let g_id = identity_loss(&fake, s, real, &self.nets.embedder as &dyn FaceEmbedder)?;
        let values = [
            self.finite("g_img", &g_img)?,
            self.finite("g_featmatch", &g_fm)?,
            self.finite("g_lms", &g_lms)?,
            self.finite("g_id", &g_id)?,
        ];
        self.opt_g
            .minimize(&weighted_generator_loss(&g_img, &g_fm, &g_lms, &g_id, &w))?;

        self.step += 1;
        let components = [values[0], values[1], values[2], values[3], df_adv_v, dv_adv_v, dv_lms_v];
        let n = self.step as f64;
        for (r, v) in self.running.iter_mut().zip(components) {
            *r += (v - *r) / n;
        }
        LossReport::new(components, &w)
    }

    /// Trains up to `max_steps`, writing `step_XXXXXXXX.ckpt` every
    /// `checkpoint_every` steps (and at the start of a fresh run and at the
    /// end) plus one `losses.log` line per step. Returns the last checkpoint.
    pub fn fit(&mut self, corpus: &[VideoClip], out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let log_path = out_dir.join(LOSS_LOG);
        let kept = kept_log_lines(&log_path, self.step)?;
        let file = fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
        let mut log = BufWriter::new(file);
        for line in &kept {
            writeln!(log, "{line}").map_err(|e| Error::io(&log_path, e))?;
        }
        let mut last = out_dir.join(checkpoint_name(self.step));
        if self.step == 0 || !last.exists() {
            self.save(&last)?;
        }
        while self.step < self.config.max_steps {
            let batch = self.sample_batch(corpus)?;
            let report = self.train_step(&batch)?;
            writeln!(log, "{}", report.log_line(self.step)).map_err(|e| Error::io(&log_path, e))?;
            if self.step % self.config.checkpoint_every == 0 || self.step == self.config.max_steps {
                log.flush().map_err(|e| Error::io(&log_path, e))?;
                last = out_dir.join(checkpoint_name(self.step));
                self.save(&last)?;
            }
        }
        log.flush().map_err(|e| Error::io(&log_path, e))?;
        Ok(last)
    }
}

/// Lines of an existing log whose step is at most `step`.
fn kept_log_lines(path: &Path, step: u64) -> Result<Vec<String>> {
    if step == 0 || !path.exists() {
        return Ok(Vec::new());
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut kept = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (s, _) = LossReport::parse_log_line(&line)?;
        if s <= step {
            kept.push(line);
        }
    }
    Ok(kept)
}

/// Parses a loss log into `(step, components)` records.
pub fn read_loss_log(path: &Path) -> Result<Vec<(u64, [f64; 7])>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(LossReport::parse_log_line)
        .collect()
}
