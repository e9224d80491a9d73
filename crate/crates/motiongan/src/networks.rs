//! Recurrent generator, frame and video discriminators, and the frozen face embedder.
//!
//! Every network takes and returns `NCHW` tensors; video tensors are `[B, T, C, H, W]`.

use std::path::Path;

use tch::nn::{self, Module};
use tch::{CModule, Device, Kind, Tensor};

use crate::config::NetConfig;
use crate::error::{Error, Result};

const NORM_EPS: f64 = 1e-5;
const LEAKY_SLOPE: f64 = 0.2;
const FRAME_CHANNELS: i64 = 3;

fn conv(p: nn::Path, cin: i64, cout: i64, k: i64, stride: i64, padding: i64) -> nn::Conv2D {
    nn::conv2d(
        p,
        cin,
        cout,
        k,
        nn::ConvConfig {
            stride,
            padding,
            ..Default::default()
        },
    )
}

fn conv_t(p: nn::Path, cin: i64, cout: i64, k: i64, stride: i64, padding: i64) -> nn::ConvTranspose2D {
    nn::conv_transpose2d(
        p,
        cin,
        cout,
        k,
        nn::ConvTransposeConfig {
            stride,
            padding,
            ..Default::default()
        },
    )
}

const OUTPUT_INIT_SCALE: f64 = 0.01;

/// Shrinks a freshly initialized output layer so training starts near a zero output.
fn small_init(mut layer: nn::ConvTranspose2D) -> nn::ConvTranspose2D {
    tch::no_grad(|| {
        let _ = layer.ws.g_mul_scalar_(OUTPUT_INIT_SCALE);
        if let Some(b) = layer.bs.as_mut() {
            let _ = b.zero_();
        }
    });
    layer
}

fn leaky(x: &Tensor) -> Tensor {
    x.relu() - (-x).relu() * LEAKY_SLOPE
}

fn expect_shape(name: &str, t: &Tensor, expected: &[i64]) -> Result<()> {
    let size = t.size();
    let ok = size.len() == expected.len() && size.iter().zip(expected).all(|(a, b)| *b < 0 || a == b);
    if ok {
        Ok(())
    } else {
        Err(Error::Shape(format!("{name}: expected {expected:?} (-1 = any), got {size:?}")))
    }
}

/// Per-sample, per-channel normalization over the spatial axes with a learned affine.
#[derive(Debug)]
struct InstanceNorm {
    weight: Tensor,
    bias: Tensor,
}

impl InstanceNorm {
    fn new(p: nn::Path, channels: i64) -> Self {
        Self {
            weight: p.var("weight", &[channels], nn::Init::Const(1.0)),
            bias: p.var("bias", &[channels], nn::Init::Const(0.0)),
        }
    }
}

impl Module for InstanceNorm {
    fn forward(&self, x: &Tensor) -> Tensor {
        let mean = x.mean_dim([2i64, 3].as_slice(), true, None);
        let centered = x - mean;
        let var = centered.square().mean_dim([2i64, 3].as_slice(), true, None);
        centered / (var + NORM_EPS).sqrt() * self.weight.view([1, -1, 1, 1]) + self.bias.view([1, -1, 1, 1])
    }
}

/// `x + IN(conv(ReLU(IN(conv(x)))))` with 3x3 convolutions.
#[derive(Debug)]
struct ResBlock {
    conv1: nn::Conv2D,
    norm1: InstanceNorm,
    conv2: nn::Conv2D,
    norm2: InstanceNorm,
}

impl ResBlock {
    fn new(p: nn::Path, channels: i64) -> Self {
        Self {
            conv1: conv(&p / "conv1", channels, channels, 3, 1, 1),
            norm1: InstanceNorm::new(&p / "norm1", channels),
            conv2: conv(&p / "conv2", channels, channels, 3, 1, 1),
            norm2: InstanceNorm::new(&p / "norm2", channels),
        }
    }
}

impl Module for ResBlock {
    fn forward(&self, x: &Tensor) -> Tensor {
        let y = self.norm1.forward(&self.conv1.forward(x)).relu();
        x + self.norm2.forward(&self.conv2.forward(&y))
    }
}

/// Hidden and cell state of the convolutional LSTM, `[B, C, H/4, W/4]` each.
#[derive(Debug)]
pub struct GeneratorState {
    pub hidden: Tensor,
    pub cell: Tensor,
}

impl GeneratorState {
    pub fn zeros(cfg: &NetConfig, batch: i64, kind: Kind, device: Device) -> Self {
        let s = cfg.bottleneck_size() as i64;
        let shape = [batch, 2 * cfg.base_channels, s, s];
        Self {
            hidden: Tensor::zeros(shape, (kind, device)),
            cell: Tensor::zeros(shape, (kind, device)),
        }
    }

    pub fn detach(&self) -> Self {
        Self {
            hidden: self.hidden.detach(),
            cell: self.cell.detach(),
        }
    }
}

/// Single-layer convolutional LSTM; one 3x3 convolution produces all four gates.
#[derive(Debug)]
struct ConvLstm {
    gates: nn::Conv2D,
    channels: i64,
}

impl ConvLstm {
    fn new(p: nn::Path, channels: i64) -> Self {
        let gates = conv(&p / "gates", 2 * channels, 4 * channels, 3, 1, 1);
        if let Some(bias) = &gates.bs {
            // gate order: input, forget, candidate, output
            tch::no_grad(|| {
                let _ = bias.narrow(0, channels, channels).fill_(1.0);
            });
        }
        Self { gates, channels }
    }

    fn step(&self, x: &Tensor, state: &GeneratorState) -> GeneratorState {
        let z = self.gates.forward(&Tensor::cat(&[x, &state.hidden], 1));
        let parts = z.split(self.channels, 1);
        let (i, f, g, o) = (parts[0].sigmoid(), parts[1].sigmoid(), parts[2].tanh(), parts[3].sigmoid());
        let cell = f * &state.cell + i * g;
        let hidden = o * cell.tanh();
        GeneratorState { hidden, cell }
    }
}

/// Frame-recurrent generator `G(s, l, l_t)`.
#[derive(Debug)]
pub struct Generator {
    down1: nn::Conv2D,
    norm1: InstanceNorm,
    down2: nn::Conv2D,
    norm2: InstanceNorm,
    encoder: Vec<ResBlock>,
    lstm: ConvLstm,
    decoder: Vec<ResBlock>,
    up1: nn::ConvTranspose2D,
    norm3: InstanceNorm,
    up2: nn::ConvTranspose2D,
    cfg: NetConfig,
}

impl Generator {
    pub fn new(p: &nn::Path, cfg: &NetConfig) -> Self {
        let c = cfg.base_channels;
        let hm = cfg.heatmap_channels;
        let input = FRAME_CHANNELS + 2 * hm;
        Self {
            down1: conv(p / "down1", input, c, 4, 2, 1),
            norm1: InstanceNorm::new(p / "norm1", c),
            down2: conv(p / "down2", c, 2 * c, 4, 2, 1),
            norm2: InstanceNorm::new(p / "norm2", 2 * c),
            encoder: (0..cfg.residual_split)
                .map(|i| ResBlock::new(p / "encoder" / i, 2 * c))
                .collect(),
            lstm: ConvLstm::new(p / "lstm", 2 * c),
            decoder: (0..cfg.n_residual - cfg.residual_split)
                .map(|i| ResBlock::new(p / "decoder" / i, 2 * c))
                .collect(),
            up1: conv_t(p / "up1", 2 * c, c, 4, 2, 1),
            norm3: InstanceNorm::new(p / "norm3", c),
            up2: small_init(conv_t(p / "up2", c, FRAME_CHANNELS, 4, 2, 1)),
            cfg: cfg.clone(),
        }
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    fn check_inputs(&self, s: &Tensor, l: &Tensor, l_t: &Tensor) -> Result<i64> {
        let n = self.cfg.image_size as i64;
        let b = s.size().first().copied().unwrap_or(0);
        let hm = self.cfg.heatmap_channels;
        expect_shape("source frame", s, &[b, FRAME_CHANNELS, n, n])?;
        expect_shape("source heatmap", l, &[b, hm, n, n])?;
        expect_shape("target heatmap", l_t, &[b, hm, n, n])?;
        Ok(b)
    }

    /// One frame: `[s, l, l_t]` through encoder, LSTM (added to the encoder
    /// output) and decoder. Output is in `[-1, 1]`.
    pub fn step(&self, s: &Tensor, l: &Tensor, l_t: &Tensor, state: &GeneratorState) -> Result<(Tensor, GeneratorState)> {
        let b = self.check_inputs(s, l, l_t)?;
        let k = self.cfg.bottleneck_size() as i64;
        expect_shape("lstm hidden", &state.hidden, &[b, 2 * self.cfg.base_channels, k, k])?;
        expect_shape("lstm cell", &state.cell, &[b, 2 * self.cfg.base_channels, k, k])?;
        let x = Tensor::cat(&[s, l, l_t], 1);
        let mut e = self.norm1.forward(&self.down1.forward(&x)).relu();
        e = self.norm2.forward(&self.down2.forward(&e)).relu();
        for block in &self.encoder {
            e = block.forward(&e);
        }
        let next = self.lstm.step(&e, state);
        let mut d = e + &next.hidden;
        for block in &self.decoder {
            d = block.forward(&d);
        }
        d = self.norm3.forward(&self.up1.forward(&d)).relu();
        Ok((self.up2.forward(&d).tanh(), next))
    }

    /// `[B, T, 68, H, W]` target heatmaps to `[B, T, 3, H, W]` frames, threading
    /// the recurrent state from zero.
    pub fn generate_sequence(&self, s: &Tensor, l: &Tensor, l_seq: &Tensor) -> Result<Tensor> {
        let size = l_seq.size();
        if size.len() != 5 {
            return Err(Error::Shape(format!("target heatmaps must be [B, T, 68, H, W], got {size:?}")));
        }
        if size[1] == 0 {
            return Err(Error::Argument("target sequence is empty".into()));
        }
        let mut state = GeneratorState::zeros(&self.cfg, size[0], s.kind(), s.device());
        let mut frames = Vec::with_capacity(size[1] as usize);
        for t in 0..size[1] {
            let (f, next) = self.step(s, l, &l_seq.select(1, t), &state)?;
            frames.push(f);
            state = next;
        }
        Ok(Tensor::stack(&frames, 1))
    }
}

/// Patch predictions of a discriminator together with its feature hook.
#[derive(Debug)]
pub struct DiscriminatorOutput {
    /// Pre-sigmoid patch scores.
    pub logits: Tensor,
    /// `sigmoid(logits)`.
    pub patch_map: Tensor,
    /// Mean of `patch_map` per sample, shape `[N]`.
    pub scalar: Tensor,
    /// Activation after the last downsampling stage.
    pub features: Tensor,
}

impl DiscriminatorOutput {
    fn from_logits(logits: Tensor, features: Tensor) -> Self {
        let patch_map = logits.sigmoid();
        let n = logits.size()[0];
        let scalar = patch_map.view([n, -1]).mean_dim(1, false, None);
        Self {
            logits,
            patch_map,
            scalar,
            features,
        }
    }
}

/// Patch discriminator on `[s, l, f, l_t]`.
#[derive(Debug)]
pub struct FrameDiscriminator {
    down1: nn::Conv2D,
    down2: nn::Conv2D,
    blocks: Vec<ResBlock>,
    head: nn::Conv2D,
    cfg: NetConfig,
}

impl FrameDiscriminator {
    pub fn new(p: &nn::Path, cfg: &NetConfig) -> Self {
        let c = cfg.base_channels;
        let input = 2 * FRAME_CHANNELS + 2 * cfg.heatmap_channels;
        Self {
            down1: conv(p / "down1", input, c, 4, 2, 1),
            down2: conv(p / "down2", c, 2 * c, 4, 2, 1),
            blocks: (0..cfg.frame_disc_residual)
                .map(|i| ResBlock::new(p / "blocks" / i, 2 * c))
                .collect(),
            head: conv(p / "head", 2 * c, 1, 3, 1, 1),
            cfg: cfg.clone(),
        }
    }

    /// All inputs `[N, C, H, W]`; the patch map is `[N, 1, H/4, W/4]`.
    pub fn forward(&self, s: &Tensor, l: &Tensor, f: &Tensor, l_t: &Tensor) -> Result<DiscriminatorOutput> {
        let n = self.cfg.image_size as i64;
        let b = s.size().first().copied().unwrap_or(0);
        let hm = self.cfg.heatmap_channels;
        expect_shape("source frame", s, &[b, FRAME_CHANNELS, n, n])?;
        expect_shape("source heatmap", l, &[b, hm, n, n])?;
        expect_shape("frame", f, &[b, FRAME_CHANNELS, n, n])?;
        expect_shape("target heatmap", l_t, &[b, hm, n, n])?;
        let x = Tensor::cat(&[s, l, f, l_t], 1);
        let features = leaky(&self.down2.forward(&leaky(&self.down1.forward(&x))));
        let mut y = features.shallow_clone();
        for block in &self.blocks {
            y = block.forward(&y);
        }
        Ok(DiscriminatorOutput::from_logits(self.head.forward(&y), features))
    }
}

/// Spatio-temporal convolution over `[B, T, C, H, W]` with zero padding in time
/// and no temporal stride. The weight has the `conv3d` layout `[O, C, kt, kh, kw]`;
/// the temporal taps are unfolded into channels and run as one 2D convolution.
#[derive(Debug)]
struct TemporalConv {
    weight: Tensor,
    bias: Tensor,
    kt: i64,
    stride: i64,
    padding: i64,
}

impl TemporalConv {
    fn new(p: nn::Path, cin: i64, cout: i64, kt: i64, k: i64, stride: i64, padding: i64) -> Self {
        let weight = p.var("weight", &[cout, cin, kt, k, k], nn::init::DEFAULT_KAIMING_UNIFORM);
        let bound = 1.0 / ((cin * kt * k * k) as f64).sqrt();
        let bias = p.var("bias", &[cout], nn::Init::Uniform { lo: -bound, up: bound });
        Self {
            weight,
            bias,
            kt,
            stride,
            padding,
        }
    }

    fn forward(&self, x: &Tensor) -> Tensor {
        let [b, t, c, h, w] = x.size()[..] else {
            panic!("temporal conv expects a 5D input, got {:?}", x.size())
        };
        let pad = self.kt / 2;
        let zeros = Tensor::zeros([b, pad, c, h, w], (x.kind(), x.device()));
        let padded = Tensor::cat(&[&zeros, x, &zeros], 1);
        let taps: Vec<Tensor> = (0..self.kt).map(|k| padded.narrow(1, k, t)).collect();
        let stacked = Tensor::cat(&taps, 2).view([b * t, self.kt * c, h, w]);
        let ws = self.weight.size();
        let weight = self.weight.permute([0, 2, 1, 3, 4]).reshape([ws[0], self.kt * c, ws[3], ws[4]]);
        let y = stacked.conv2d(
            &weight,
            Some(&self.bias),
            [self.stride, self.stride],
            [self.padding, self.padding],
            [1, 1],
            1,
        );
        let ys = y.size();
        y.view([b, t, ys[1], ys[2], ys[3]])
    }
}

/// Frame-wise instance normalization of a video tensor.
fn norm_video(norm: &InstanceNorm, x: &Tensor) -> Tensor {
    let s = x.size();
    norm.forward(&x.view([s[0] * s[1], s[2], s[3], s[4]])).view(s.as_slice())
}

#[derive(Debug)]
struct TemporalResBlock {
    conv1: TemporalConv,
    norm1: InstanceNorm,
    conv2: TemporalConv,
    norm2: InstanceNorm,
}

impl TemporalResBlock {
    fn new(p: nn::Path, channels: i64) -> Self {
        Self {
            conv1: TemporalConv::new(&p / "conv1", channels, channels, 3, 3, 1, 1),
            norm1: InstanceNorm::new(&p / "norm1", channels),
            conv2: TemporalConv::new(&p / "conv2", channels, channels, 3, 3, 1, 1),
            norm2: InstanceNorm::new(&p / "norm2", channels),
        }
    }

    fn forward(&self, x: &Tensor) -> Tensor {
        let y = norm_video(&self.norm1, &self.conv1.forward(x)).relu();
        x + norm_video(&self.norm2, &self.conv2.forward(&y))
    }
}

/// Output of the video discriminator: the real/fake branch and the per-frame landmark branch.
#[derive(Debug)]
pub struct VideoDiscriminatorOutput {
    /// Patch map `[B, T, 1, H/4, W/4]`; features `[B, T, 2c, H/4, W/4]`.
    pub adversarial: DiscriminatorOutput,
    /// `[B, T, 68, H, W]`
    pub heatmaps: Tensor,
}

/// Spatio-temporal trunk with a real/fake head and a heatmap-regression branch.
#[derive(Debug)]
pub struct VideoDiscriminator {
    down1: TemporalConv,
    down2: TemporalConv,
    blocks: Vec<TemporalResBlock>,
    head: TemporalConv,
    lms_block: ResBlock,
    up1: nn::ConvTranspose2D,
    up2: nn::ConvTranspose2D,
    cfg: NetConfig,
}

impl VideoDiscriminator {
    pub fn new(p: &nn::Path, cfg: &NetConfig) -> Self {
        let c = cfg.base_channels;
        Self {
            down1: TemporalConv::new(p / "down1", FRAME_CHANNELS, c, 3, 4, 2, 1),
            down2: TemporalConv::new(p / "down2", c, 2 * c, 3, 4, 2, 1),
            blocks: (0..cfg.video_disc_residual)
                .map(|i| TemporalResBlock::new(p / "blocks" / i, 2 * c))
                .collect(),
            head: TemporalConv::new(p / "head", 2 * c, 1, 3, 3, 1, 1),
            lms_block: ResBlock::new(p / "lms_block", 2 * c),
            up1: conv_t(p / "lms_up1", 2 * c, c, 4, 2, 1),
            up2: small_init(conv_t(p / "lms_up2", c, cfg.heatmap_channels, 2, 2, 0)),
            cfg: cfg.clone(),
        }
    }

    /// `f_seq` is `[B, T, 3, H, W]` with `T` the configured window.
    pub fn forward(&self, f_seq: &Tensor) -> Result<VideoDiscriminatorOutput> {
        let n = self.cfg.image_size as i64;
        let t = self.cfg.window as i64;
        expect_shape("video", f_seq, &[-1, t, FRAME_CHANNELS, n, n])?;
        let b = f_seq.size()[0];
        let features = leaky(&self.down2.forward(&leaky(&self.down1.forward(f_seq))));
        let mut y = features.shallow_clone();
        for block in &self.blocks {
            y = block.forward(&y);
        }
        let logits = self.head.forward(&y);
        let (c, k) = (self.cfg.base_channels, n / 4);
        let frames = self.lms_block.forward(&y.view([b * t, 2 * c, k, k]));
        let up = leaky(&self.up1.forward(&frames));
        let heatmaps = self.up2.forward(&up).view([b, t, self.cfg.heatmap_channels, n, n]);
        Ok(VideoDiscriminatorOutput {
            adversarial: DiscriminatorOutput::from_logits(logits, features),
            heatmaps,
        })
    }
}

/// Identity feature extractor `V`. Implementations are frozen: their
/// parameters never receive updates.
pub trait FaceEmbedder {
    /// `[N, 3, H, W]` faces to `[N, D]` features; differentiable w.r.t. the input.
    fn embed(&self, faces: &Tensor) -> Result<Tensor>;

    fn dim(&self) -> i64;

    /// Named parameter tensors, for checkpointing and the frozen-weights check.
    fn parameters(&self) -> Vec<(String, Tensor)> {
        Vec::new()
    }
}

/// Default embedder: a small strided convolution stack with fixed seeded
/// weights, global average pooling and a linear projection.
#[derive(Debug)]
pub struct ToyEmbedder {
    vs: nn::VarStore,
    convs: Vec<nn::Conv2D>,
    proj: nn::Linear,
    dim: i64,
}

impl ToyEmbedder {
    const WIDTHS: [i64; 4] = [FRAME_CHANNELS, 16, 32, 64];

    pub fn new(dim: i64, seed: u64, device: Device) -> Self {
        // Seeded on its own generator so the weights depend only on `seed`.
        let vs = nn::VarStore::new(device);
        let root = vs.root();
        let (convs, proj) = tch::no_grad(|| {
            let previous = Tensor::randint(i64::MAX, [1], (Kind::Int64, Device::Cpu)).int64_value(&[0]);
            tch::manual_seed(seed as i64);
            let convs = Self::WIDTHS
                .windows(2)
                .enumerate()
                .map(|(i, w)| conv(&root / "conv" / i, w[0], w[1], 4, 2, 1))
                .collect();
            let proj = nn::linear(&root / "proj", Self::WIDTHS[3], dim, Default::default());
            tch::manual_seed(previous);
            (convs, proj)
        });
        let mut embedder = Self { vs, convs, proj, dim };
        embedder.vs.freeze();
        embedder
    }

    pub fn var_store(&self) -> &nn::VarStore {
        &self.vs
    }

    pub fn var_store_mut(&mut self) -> &mut nn::VarStore {
        &mut self.vs
    }
}

impl FaceEmbedder for ToyEmbedder {
    fn embed(&self, faces: &Tensor) -> Result<Tensor> {
        expect_shape("face", faces, &[-1, FRAME_CHANNELS, -1, -1])?;
        let mut x = faces.shallow_clone();
        for c in &self.convs {
            x = leaky(&c.forward(&x));
        }
        Ok(self.proj.forward(&x.mean_dim([2i64, 3].as_slice(), false, None)))
    }

    fn dim(&self) -> i64 {
        self.dim
    }

    fn parameters(&self) -> Vec<(String, Tensor)> {
        sorted_variables(&self.vs)
    }
}

/// Adapter for externally trained embedders exported as TorchScript modules
/// mapping `[N, 3, H, W]` faces to `[N, D]` features.
#[derive(Debug)]
pub struct ScriptedEmbedder {
    module: CModule,
    dim: i64,
}

impl ScriptedEmbedder {
    pub fn load(path: &Path, dim: i64) -> Result<Self> {
        let mut module = CModule::load(path)?;
        module.set_eval();
        Ok(Self { module, dim })
    }
}

impl FaceEmbedder for ScriptedEmbedder {
    fn embed(&self, faces: &Tensor) -> Result<Tensor> {
        let out = self.module.forward_ts(&[faces])?;
        expect_shape("embedding", &out, &[faces.size()[0], self.dim])?;
        Ok(out)
    }

    fn dim(&self) -> i64 {
        self.dim
    }
}

/// Variables of a store ordered by name.
pub fn sorted_variables(vs: &nn::VarStore) -> Vec<(String, Tensor)> {
    let mut vars: Vec<(String, Tensor)> = vs.variables().into_iter().collect();
    vars.sort_by(|a, b| a.0.cmp(&b.0));
    vars
}

/// The three trained networks (each in its own variable store) plus the frozen embedder.
#[derive(Debug)]
pub struct Networks {
    pub cfg: NetConfig,
    pub g_vs: nn::VarStore,
    pub generator: Generator,
    pub df_vs: nn::VarStore,
    pub frame_disc: FrameDiscriminator,
    pub dv_vs: nn::VarStore,
    pub video_disc: VideoDiscriminator,
    pub embedder: ToyEmbedder,
}

/// Checkpoint name prefixes of the four parameter groups.
pub const GROUPS: [&str; 4] = ["g", "df", "dv", "embed"];

impl Networks {
    /// Fresh weights drawn from `seed`.
    pub fn new(cfg: &NetConfig, seed: u64, device: Device) -> Result<Self> {
        cfg.validate()?;
        tch::manual_seed(seed as i64);
        let g_vs = nn::VarStore::new(device);
        let generator = Generator::new(&g_vs.root(), cfg);
        let df_vs = nn::VarStore::new(device);
        let frame_disc = FrameDiscriminator::new(&df_vs.root(), cfg);
        let dv_vs = nn::VarStore::new(device);
        let video_disc = VideoDiscriminator::new(&dv_vs.root(), cfg);
        let embedder = ToyEmbedder::new(cfg.embed_dim, cfg.embed_seed, device);
        Ok(Self {
            cfg: cfg.clone(),
            g_vs,
            generator,
            df_vs,
            frame_disc,
            dv_vs,
            video_disc,
            embedder,
        })
    }

    /// Every parameter as `group/name`, in a fixed order.
    pub fn named_parameters(&self) -> Vec<(String, Tensor)> {
        let stores = [&self.g_vs, &self.df_vs, &self.dv_vs, self.embedder.var_store()];
        GROUPS
            .iter()
            .zip(stores)
            .flat_map(|(g, vs)| {
                sorted_variables(vs)
                    .into_iter()
                    .map(move |(n, t)| (format!("{g}/{n}"), t))
            })
            .collect()
    }

    /// Casts every network to double precision.
    pub fn to_double(&mut self) {
        self.g_vs.double();
        self.df_vs.double();
        self.dv_vs.double();
        self.embedder.var_store_mut().double();
    }

    pub fn kind(&self) -> Kind {
        self.g_vs.root().kind()
    }

    pub fn device(&self) -> Device {
        self.g_vs.device()
    }
}
