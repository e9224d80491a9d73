//! Conversions between core data types and `NCHW` tensors.

use motiongan_core::dataset::TrainingWindow;
use motiongan_core::heatmap::{encode_heatmap, Heatmap};
use motiongan_core::landmarks::{LandmarkSet, N_LANDMARKS};
use motiongan_core::Frame;
use tch::{Device, Kind, Tensor};

use crate::error::{Error, Result};

/// `[3, H, W]` float tensor of an interleaved frame.
pub fn frame_to_tensor(frame: &Frame) -> Tensor {
    let (h, w) = frame.shape();
    Tensor::from_slice(frame.data())
        .view([h as i64, w as i64, 3])
        .permute([2, 0, 1])
        .contiguous()
}

/// Inverse of [`frame_to_tensor`]; accepts `[3, H, W]` or `[1, 3, H, W]`.
pub fn tensor_to_frame(t: &Tensor) -> Result<Frame> {
    let t = if t.dim() == 4 && t.size()[0] == 1 { t.squeeze_dim(0) } else { t.shallow_clone() };
    let size = t.size();
    if size.len() != 3 || size[0] != 3 {
        return Err(Error::Shape(format!("expected a [3, H, W] frame tensor, got {size:?}")));
    }
    let hwc = t.detach().to_kind(Kind::Float).permute([1, 2, 0]).contiguous();
    let n = hwc.numel();
    let mut data = vec![0f32; n];
    hwc.copy_data(&mut data, n);
    Ok(Frame::new(size[1] as usize, size[2] as usize, data)?)
}

/// `[68, H, W]` tensor of a heatmap (storage is already channel-major).
pub fn heatmap_to_tensor(hm: &Heatmap) -> Tensor {
    Tensor::from_slice(hm.data()).view([N_LANDMARKS as i64, hm.height() as i64, hm.width() as i64])
}

pub fn landmarks_to_tensor(lms: &LandmarkSet, size: usize, sigma: f64) -> Result<Tensor> {
    Ok(heatmap_to_tensor(&encode_heatmap(lms, size, size, sigma)?))
}

/// Flattens a tensor into `f32` values.
pub fn to_vec_f32(t: &Tensor) -> Vec<f32> {
    let flat = t.detach().to_kind(Kind::Float).contiguous().view([-1]);
    let n = flat.numel();
    let mut out = vec![0f32; n];
    flat.copy_data(&mut out, n);
    out
}

/// A batch of training windows as tensors.
#[derive(Debug)]
pub struct WindowBatch {
    /// `[B, 3, H, W]`
    pub source: Tensor,
    /// `[B, 68, H, W]`
    pub source_heatmap: Tensor,
    /// `[B, T, 3, H, W]`
    pub frames: Tensor,
    /// `[B, T, 68, H, W]`
    pub heatmaps: Tensor,
}

impl WindowBatch {
    /// Encodes every window's landmarks with `sigma` (pixels).
    pub fn from_windows(windows: &[TrainingWindow], sigma: f64) -> Result<Self> {
        let first = windows
            .first()
            .ok_or_else(|| Error::Argument("a batch needs at least one window".into()))?;
        let t = first.len();
        let (h, w) = first.source_frame.shape();
        if h != w {
            return Err(Error::Shape(format!("frames must be square, got {h}x{w}")));
        }
        let mut sources = Vec::new();
        let mut source_hms = Vec::new();
        let mut frames = Vec::new();
        let mut hms = Vec::new();
        for win in windows {
            if win.len() != t {
                return Err(Error::Shape(format!("windows of length {} and {t} in one batch", win.len())));
            }
            if win.source_frame.shape() != (h, w) {
                return Err(Error::Shape("frames of different sizes in one batch".into()));
            }
            sources.push(frame_to_tensor(&win.source_frame));
            source_hms.push(landmarks_to_tensor(&win.source_lms, h, sigma)?);
            let f: Vec<Tensor> = win.target_frames.iter().map(frame_to_tensor).collect();
            let l: Vec<Tensor> = win
                .target_lms
                .iter()
                .map(|lms| landmarks_to_tensor(lms, h, sigma))
                .collect::<Result<_>>()?;
            frames.push(Tensor::stack(&f, 0));
            hms.push(Tensor::stack(&l, 0));
        }
        Ok(Self {
            source: Tensor::stack(&sources, 0),
            source_heatmap: Tensor::stack(&source_hms, 0),
            frames: Tensor::stack(&frames, 0),
            heatmaps: Tensor::stack(&hms, 0),
        })
    }

    pub fn batch_size(&self) -> i64 {
        self.frames.size()[0]
    }

    pub fn window(&self) -> i64 {
        self.frames.size()[1]
    }

    pub fn to(&self, kind: Kind, device: Device) -> Self {
        let cast = |t: &Tensor| t.to_device(device).to_kind(kind);
        Self {
            source: cast(&self.source),
            source_heatmap: cast(&self.source_heatmap),
            frames: cast(&self.frames),
            heatmaps: cast(&self.heatmaps),
        }
    }
}
