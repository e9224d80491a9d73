//! Network and training hyperparameters, and the flat `key = value` config file.

use std::fs;
use std::path::Path;

use motiongan_core::heatmap::DEFAULT_SIGMA;
use motiongan_core::landmarks::N_LANDMARKS;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture of the four networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub image_size: usize,
    pub base_channels: i64,
    /// Residual blocks of the generator, split evenly between encoder and decoder.
    pub n_residual: usize,
    pub residual_split: usize,
    pub lstm_layers: usize,
    pub heatmap_channels: i64,
    /// Residual blocks after the downsampling stages of the frame discriminator.
    pub frame_disc_residual: usize,
    /// Residual blocks in the spatio-temporal trunk of the video discriminator.
    pub video_disc_residual: usize,
    /// Window length the video discriminator is built for.
    pub window: usize,
    pub embed_dim: i64,
    /// Seed of the frozen default embedder's weights.
    pub embed_seed: u64,
}

impl NetConfig {
    pub fn full() -> Self {
        Self {
            image_size: 128,
            base_channels: 64,
            n_residual: 6,
            residual_split: 3,
            lstm_layers: 1,
            heatmap_channels: N_LANDMARKS as i64,
            frame_disc_residual: 3,
            video_disc_residual: 3,
            window: 4,
            embed_dim: 128,
            embed_seed: 7,
        }
    }

    /// 64x64, half widths, lighter discriminator trunks.
    pub fn toy() -> Self {
        Self {
            image_size: 64,
            base_channels: 32,
            frame_disc_residual: 1,
            video_disc_residual: 1,
            ..Self::full()
        }
    }

    pub fn bottleneck_size(&self) -> usize {
        self.image_size / 4
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_size == 0 || self.image_size % 4 != 0 {
            return Err(Error::Config(format!(
                "image_size must be a positive multiple of 4, got {}",
                self.image_size
            )));
        }
        if self.base_channels < 1 || self.embed_dim < 1 {
            return Err(Error::Config("base_channels and embed_dim must be positive".into()));
        }
        if self.residual_split > self.n_residual {
            return Err(Error::Config(format!(
                "residual_split {} exceeds n_residual {}",
                self.residual_split, self.n_residual
            )));
        }
        if self.lstm_layers != 1 {
            return Err(Error::Config(format!(
                "only a single recurrent layer is supported, got {}",
                self.lstm_layers
            )));
        }
        if self.heatmap_channels != N_LANDMARKS as i64 {
            return Err(Error::Config(format!("heatmap_channels must be {N_LANDMARKS}")));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything the training loop needs. Field names are the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    pub lambda6: f64,
    pub adam_alpha: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    #[serde(rename = "T")]
    pub t: usize,
    pub min_gap: usize,
    /// Heatmap standard deviation in pixels.
    pub sigma: f64,
    pub image_size: usize,
    pub batch_size: usize,
    pub max_steps: u64,
    pub checkpoint_every: u64,
    pub seed: u64,
    pub toy_scale: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 0.01,
            lambda3: 10.0,
            lambda4: 0.1,
            lambda5: 1.0,
            lambda6: 100.0,
            adam_alpha: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            t: 4,
            min_gap: motiongan_core::dataset::DEFAULT_MIN_GAP,
            sigma: DEFAULT_SIGMA,
            image_size: 128,
            batch_size: 8,
            max_steps: 10_000,
            checkpoint_every: 1000,
            seed: 0,
            toy_scale: false,
        }
    }
}

/// The same fields, all optional, for partial config files.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    lambda3: Option<f64>,
    lambda4: Option<f64>,
    lambda5: Option<f64>,
    lambda6: Option<f64>,
    adam_alpha: Option<f64>,
    adam_beta1: Option<f64>,
    adam_beta2: Option<f64>,
    #[serde(rename = "T")]
    t: Option<usize>,
    min_gap: Option<usize>,
    sigma: Option<f64>,
    image_size: Option<usize>,
    batch_size: Option<usize>,
    max_steps: Option<u64>,
    checkpoint_every: Option<u64>,
    seed: Option<u64>,
    toy_scale: Option<bool>,
}

impl TrainConfig {
    /// Toy preset: 64x64 images, half-width networks.
    pub fn toy() -> Self {
        Self {
            toy_scale: true,
            image_size: 64,
            ..Self::default()
        }
    }

    /// Parses `key = value` lines (`#` starts a comment). Keys are the field
    /// names; omitted keys keep their defaults. With `toy_scale = true` and
    /// no `image_size`, the image size is 64.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let base = if file.toy_scale == Some(true) {
            Self::toy()
        } else {
            Self::default()
        };
        let cfg = Self {
            lambda1: file.lambda1.unwrap_or(base.lambda1),
            lambda2: file.lambda2.unwrap_or(base.lambda2),
            lambda3: file.lambda3.unwrap_or(base.lambda3),
            lambda4: file.lambda4.unwrap_or(base.lambda4),
            lambda5: file.lambda5.unwrap_or(base.lambda5),
            lambda6: file.lambda6.unwrap_or(base.lambda6),
            adam_alpha: file.adam_alpha.unwrap_or(base.adam_alpha),
            adam_beta1: file.adam_beta1.unwrap_or(base.adam_beta1),
            adam_beta2: file.adam_beta2.unwrap_or(base.adam_beta2),
            t: file.t.unwrap_or(base.t),
            min_gap: file.min_gap.unwrap_or(base.min_gap),
            sigma: file.sigma.unwrap_or(base.sigma),
            image_size: file.image_size.unwrap_or(base.image_size),
            batch_size: file.batch_size.unwrap_or(base.batch_size),
            max_steps: file.max_steps.unwrap_or(base.max_steps),
            checkpoint_every: file.checkpoint_every.unwrap_or(base.checkpoint_every),
            seed: file.seed.unwrap_or(base.seed),
            toy_scale: file.toy_scale.unwrap_or(base.toy_scale),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Renders every field in file order; `parse(to_text())` is the identity.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let lambdas = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
            ("lambda5", self.lambda5),
            ("lambda6", self.lambda6),
        ];
        for (key, v) in lambdas {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{key} must be a finite value >= 0, got {v}")));
            }
        }
        if !(self.adam_alpha > 0.0) {
            return Err(Error::Config(format!("adam_alpha must be > 0, got {}", self.adam_alpha)));
        }
        for (key, v) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{key} must lie in [0, 1), got {v}")));
            }
        }
        if self.t == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if self.min_gap < 2 {
            return Err(Error::Config(format!(
                "min_gap must be at least 2 (source and target never consecutive), got {}",
                self.min_gap
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint_every must be at least 1".into()));
        }
        self.net_config().validate()
    }

    pub fn net_config(&self) -> NetConfig {
        let preset = if self.toy_scale { NetConfig::toy() } else { NetConfig::full() };
        NetConfig {
            image_size: self.image_size,
            window: self.t,
            ..preset
        }
    }
}
