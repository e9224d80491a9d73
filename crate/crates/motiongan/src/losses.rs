//! Training objectives. Norms are element-means; discriminator scores enter
//! the adversarial terms as pre-sigmoid patch logits.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use tch::{Kind, Tensor};

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::networks::FaceEmbedder;

fn same_shape(name: &str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.size() == b.size() {
        Ok(())
    } else {
        Err(Error::Shape(format!("{name}: {:?} vs {:?}", a.size(), b.size())))
    }
}

fn mean_sq_diff(a: &Tensor, b: &Tensor) -> Tensor {
    (a - b).square().mean(a.kind())
}

/// Mean absolute difference of `[B, T, 3, H, W]` sequences, i.e. the average
/// over frames of the per-frame element-mean L1 distance.
pub fn image_reconstruction_loss(gen: &Tensor, gt: &Tensor) -> Result<Tensor> {
    same_shape("image reconstruction", gen, gt)?;
    Ok((gen - gt).abs().mean(gen.kind()))
}

/// `ln(mean(sigmoid(z)))` over every axis but the first, computed in log space.
fn log_mean_sigmoid(logits: &Tensor) -> Tensor {
    let n = logits.size()[0];
    let flat = logits.view([n, -1]);
    let count = flat.size()[1] as f64;
    flat.log_sigmoid().logsumexp([1], false) - count.ln()
}

/// `ln(1 - mean(sigmoid(z)))`, using `1 - sigmoid(z) = sigmoid(-z)`.
fn log_one_minus_mean_sigmoid(logits: &Tensor) -> Tensor {
    log_mean_sigmoid(&-logits)
}

/// `-(1/N) sum_i [ln D(real_i) + ln(1 - D(fake_i))]` where `D` is the mean of
/// the sigmoid patch map of each sample. Inputs are `[N, ...]` logits.
pub fn adversarial_loss_d_logits(real_logits: &Tensor, fake_logits: &Tensor) -> Result<Tensor> {
    if real_logits.size().first() != fake_logits.size().first() {
        return Err(Error::Shape(format!(
            "real and fake score counts differ: {:?} vs {:?}",
            real_logits.size(),
            fake_logits.size()
        )));
    }
    let per_sample = log_mean_sigmoid(real_logits) + log_one_minus_mean_sigmoid(fake_logits);
    Ok(-per_sample.mean(real_logits.kind()))
}

/// Frame discriminator loss over `T` frames (any batch folded into the first axis).
pub fn frame_adversarial_loss_d_logits(real_logits: &Tensor, fake_logits: &Tensor) -> Result<Tensor> {
    adversarial_loss_d_logits(real_logits, fake_logits)
}

/// Video discriminator loss: one score per video.
pub fn video_adversarial_loss_d_logits(real_logits: &Tensor, fake_logits: &Tensor) -> Result<Tensor> {
    adversarial_loss_d_logits(real_logits, fake_logits)
}

fn check_score(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::Domain(format!("{p}")))
    }
}

/// Logit of a probability, `ln p - ln(1 - p)`.
fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// Scalar form of the frame discriminator loss on post-sigmoid scores:
/// `-(1/T) sum_t [ln real_t + ln(1 - fake_t)]`.
pub fn frame_adversarial_loss_d(real_scores: &[f64], fake_scores: &[f64]) -> Result<f64> {
    if real_scores.len() != fake_scores.len() || real_scores.is_empty() {
        return Err(Error::Argument(format!(
            "need equally many real and fake scores, got {} and {}",
            real_scores.len(),
            fake_scores.len()
        )));
    }
    let mut total = 0.0;
    for (&r, &f) in real_scores.iter().zip(fake_scores) {
        let (zr, zf) = (logit(check_score(r)?), logit(check_score(f)?));
        // ln sigmoid(z) = -softplus(-z)
        total += softplus(-zr) + softplus(zf);
    }
    Ok(total / real_scores.len() as f64)
}

/// Scalar form of the video discriminator loss: `-[ln real + ln(1 - fake)]`.
pub fn video_adversarial_loss_d(real_score: f64, fake_score: f64) -> Result<f64> {
    frame_adversarial_loss_d(&[real_score], &[fake_score])
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Chance-level discriminator loss, `2 ln 2`.
pub const CHANCE_LOSS: f64 = 2.0 * LN_2;

/// Squared feature distance of the frame discriminator hook (averaged over
/// frames) plus that of the video discriminator hook, element-mean normalized.
pub fn feature_matching_loss(
    frame_gen: &Tensor,
    frame_real: &Tensor,
    video_gen: &Tensor,
    video_real: &Tensor,
) -> Result<Tensor> {
    same_shape("frame features", frame_gen, frame_real)?;
    same_shape("video features", video_gen, video_real)?;
    Ok(mean_sq_diff(frame_gen, frame_real) + mean_sq_diff(video_gen, video_real))
}

/// Element-mean squared heatmap difference.
pub fn landmark_loss(pred: &Tensor, target: &Tensor) -> Result<Tensor> {
    same_shape("landmark heatmaps", pred, target)?;
    Ok(mean_sq_diff(pred, target))
}

/// Identity loss from precomputed embeddings: `gen` and `gt` are `[B, T, D]`,
/// `source` is `[B, D]`. Averages `msd(gen_t, source) + msd(gen_t, gt_t)` over
/// every frame.
pub fn identity_loss_from_embeddings(gen: &Tensor, source: &Tensor, gt: &Tensor) -> Result<Tensor> {
    same_shape("identity embeddings", gen, gt)?;
    let gs = gen.size();
    if gs.len() != 3 || source.size() != [gs[0], gs[2]] {
        return Err(Error::Shape(format!(
            "identity embeddings: gen {:?}, source {:?}",
            gs,
            source.size()
        )));
    }
    Ok(mean_sq_diff(gen, &source.unsqueeze(1)) + mean_sq_diff(gen, gt))
}

/// Identity loss of `[B, T, 3, H, W]` generated frames against the `[B, 3, H, W]`
/// source and the ground-truth frames, through a frozen embedder.
pub fn identity_loss(gen: &Tensor, source: &Tensor, gt: &Tensor, embedder: &dyn FaceEmbedder) -> Result<Tensor> {
    same_shape("identity frames", gen, gt)?;
    let s = gen.size();
    if s.len() != 5 {
        return Err(Error::Shape(format!("expected [B, T, 3, H, W], got {s:?}")));
    }
    let flat = |t: &Tensor| t.view([s[0] * s[1], s[2], s[3], s[4]]);
    let eg = embedder.embed(&flat(gen))?.view([s[0], s[1], -1]);
    let et = embedder.embed(&flat(gt))?.view([s[0], s[1], -1]);
    let es = embedder.embed(source)?;
    identity_loss_from_embeddings(&eg, &es, &et)
}

/// Loss weights `lambda1..lambda6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    pub lambda6: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::from(&TrainConfig::default())
    }
}

impl From<&TrainConfig> for LossWeights {
    fn from(c: &TrainConfig) -> Self {
        Self {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            lambda3: c.lambda3,
            lambda4: c.lambda4,
            lambda5: c.lambda5,
            lambda6: c.lambda6,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda1, self.lambda2, self.lambda3, self.lambda4, self.lambda5, self.lambda6];
        match all.iter().position(|l| !(*l >= 0.0)) {
            Some(i) => Err(Error::Config(format!("lambda{} must be >= 0, got {}", i + 1, all[i]))),
            None => Ok(()),
        }
    }
}

/// `lambda1 img + lambda2 featmatch + lambda3 lms + lambda4 id`.
pub fn total_generator_loss(img: f64, featmatch: f64, lms: f64, id: f64, w: &LossWeights) -> Result<f64> {
    w.validate()?;
    Ok(w.lambda1 * img + w.lambda2 * featmatch + w.lambda3 * lms + w.lambda4 * id)
}

/// `lambda5 adv + lambda6 lms`.
pub fn total_video_discriminator_loss(adv: f64, lms: f64, w: &LossWeights) -> Result<f64> {
    w.validate()?;
    Ok(w.lambda5 * adv + w.lambda6 * lms)
}

/// Tensor form of [`total_generator_loss`], keeping the graph.
pub fn weighted_generator_loss(img: &Tensor, featmatch: &Tensor, lms: &Tensor, id: &Tensor, w: &LossWeights) -> Tensor {
    img * w.lambda1 + featmatch * w.lambda2 + lms * w.lambda3 + id * w.lambda4
}

/// Every loss component of one training step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossReport {
    pub g_img: f64,
    pub g_featmatch: f64,
    pub g_lms: f64,
    pub g_id: f64,
    pub df_adv: f64,
    pub dv_adv: f64,
    pub dv_lms: f64,
    pub weighted_g_total: f64,
    pub weighted_dv_total: f64,
}

impl LossReport {
    pub const FIELDS: [&'static str; 7] = ["g_img", "g_featmatch", "g_lms", "g_id", "df_adv", "dv_adv", "dv_lms"];

    /// Fills the weighted totals from the components.
    pub fn new(components: [f64; 7], w: &LossWeights) -> Result<Self> {
        let [g_img, g_featmatch, g_lms, g_id, df_adv, dv_adv, dv_lms] = components;
        Ok(Self {
            g_img,
            g_featmatch,
            g_lms,
            g_id,
            df_adv,
            dv_adv,
            dv_lms,
            weighted_g_total: total_generator_loss(g_img, g_featmatch, g_lms, g_id, w)?,
            weighted_dv_total: total_video_discriminator_loss(dv_adv, dv_lms, w)?,
        })
    }

    pub fn components(&self) -> [f64; 7] {
        [self.g_img, self.g_featmatch, self.g_lms, self.g_id, self.df_adv, self.dv_adv, self.dv_lms]
    }

    /// `step g_img g_featmatch g_lms g_id df_adv dv_adv dv_lms`
    pub fn log_line(&self, step: u64) -> String {
        let mut line = step.to_string();
        for v in self.components() {
            line.push(' ');
            line.push_str(&v.to_string());
        }
        line
    }

    pub fn parse_log_line(line: &str) -> Result<(u64, [f64; 7])> {
        let bad = || Error::Argument(format!("malformed loss record '{line}'"));
        let mut it = line.split_whitespace();
        let step = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let mut values = [0.0; 7];
        for v in values.iter_mut() {
            *v = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        }
        if it.next().is_some() {
            return Err(bad());
        }
        Ok((step, values))
    }
}

/// Scalar value of a 0-d tensor.
pub fn scalar(t: &Tensor) -> f64 {
    t.to_kind(Kind::Double).double_value(&[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use tch::Device;

    fn t(values: &[f64], shape: &[i64]) -> Tensor {
        Tensor::from_slice(values).view(shape)
    }

    #[test]
    fn reconstruction_examples() {
        let gt = Tensor::zeros([1, 3, 3, 4, 4], (Kind::Double, Device::Cpu));
        let gen = gt.ones_like() * 0.5;
        assert_eq!(scalar(&image_reconstruction_loss(&gen, &gt).unwrap()), 0.5);
        assert_eq!(scalar(&image_reconstruction_loss(&gt, &gt).unwrap()), 0.0);
        assert!(image_reconstruction_loss(&gen, &gt.narrow(1, 0, 2)).is_err());
    }

    #[test]
    fn chance_scores_give_two_ln_two() {
        let v = frame_adversarial_loss_d(&[0.5; 4], &[0.5; 4]).unwrap();
        assert!((v - CHANCE_LOSS).abs() < 1e-12);
        let z = Tensor::zeros([4, 1, 2, 2], (Kind::Double, Device::Cpu));
        assert!((scalar(&adversarial_loss_d_logits(&z, &z).unwrap()) - CHANCE_LOSS).abs() < 1e-12);
        assert!(matches!(frame_adversarial_loss_d(&[1.0], &[0.5]), Err(Error::Domain(_))));
        assert!(matches!(video_adversarial_loss_d(0.5, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn logit_form_matches_probability_form() {
        // patch maps of one pixel reduce to the scalar form
        let real = [0.9, 0.2, 0.6];
        let fake = [0.1, 0.7, 0.4];
        let zr: Vec<f64> = real.iter().map(|&p| logit(p)).collect();
        let zf: Vec<f64> = fake.iter().map(|&p| logit(p)).collect();
        let a = scalar(&adversarial_loss_d_logits(&t(&zr, &[3, 1]), &t(&zf, &[3, 1])).unwrap());
        let b = frame_adversarial_loss_d(&real, &fake).unwrap();
        let direct = -(0..3).map(|i| real[i].ln() + (1.0 - fake[i]).ln()).sum::<f64>() / 3.0;
        assert!((a - b).abs() < 1e-12 && (b - direct).abs() < 1e-12);
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let big = t(&[80.0, -80.0], &[1, 2]);
        let v = scalar(&adversarial_loss_d_logits(&big, &-&big).unwrap());
        assert!(v.is_finite() && v > 0.0);
        let perfect = scalar(&adversarial_loss_d_logits(&t(&[60.0], &[1, 1]), &t(&[-60.0], &[1, 1])).unwrap());
        assert!(perfect >= 0.0 && perfect < 1e-20);
    }

    #[test]
    fn weighted_totals() {
        let w = LossWeights::default();
        assert!((total_generator_loss(1.0, 1.0, 1.0, 1.0, &w).unwrap() - 11.11).abs() < 1e-12);
        assert_eq!(total_generator_loss(2.0, 0.0, 0.0, 0.0, &w).unwrap(), 2.0);
        assert_eq!(total_video_discriminator_loss(1.0, 1.0, &w).unwrap(), 101.0);
        let neg = LossWeights { lambda3: -1.0, ..w };
        assert!(matches!(total_generator_loss(0.0, 0.0, 0.0, 0.0, &neg), Err(Error::Config(_))));
    }

    #[test]
    fn log_line_round_trip() {
        let r = LossReport::new([0.1, 0.2, 0.3, 0.4, 1.3, 1.4, 1e-7], &LossWeights::default()).unwrap();
        let line = r.log_line(12);
        assert_eq!(line.split(' ').count(), 8);
        assert_eq!(LossReport::parse_log_line(&line).unwrap(), (12, r.components()));
    }
}
