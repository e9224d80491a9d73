//! Video synthesis from a trained checkpoint, and the landmark estimator
//! that reads generated frames back through the video discriminator.

use std::fs;
use std::path::{Path, PathBuf};

use motiongan_core::dataset::{frame_file_name, pts_files};
use motiongan_core::geometry::{crop_transform, DEFAULT_CROP_MARGIN};
use motiongan_core::heatmap::decode_channels;
use motiongan_core::landmarks::StructuredLandmarks;
use motiongan_core::metrics::{AnnotationEstimator, LandmarkEstimator};
use motiongan_core::pts::read_pts;
use motiongan_core::{crop_to_landmarks, Frame, GeometricTransform, LandmarkSet};
use serde::{Deserialize, Serialize};
use tch::{Device, Tensor};

use crate::checkpoint::{Checkpoint, CheckpointHeader};
use crate::error::{Error, Result};
use crate::networks::{GeneratorState, Networks};
use crate::tensor::{frame_to_tensor, landmarks_to_tensor, tensor_to_frame, to_vec_f32};

pub const GENERATION_MANIFEST: &str = "generation.json";
pub const GENERATION_FORMAT: &str = "motiongan-generation-v1";

/// Networks with the weights of a checkpoint.
pub fn load_networks(path: &Path, device: Device) -> Result<(Networks, CheckpointHeader)> {
    let ckpt = Checkpoint::read(path)?;
    let nets = Networks::new(&ckpt.header.net, ckpt.header.train.seed, device)?;
    ckpt.restore(&nets.named_parameters())?;
    Ok((nets, ckpt.header))
}

/// How sequences longer than the training window are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMode {
    /// One recurrent pass; the state carries across the whole sequence.
    Continuous,
    /// Independent passes over consecutive windows of the training length,
    /// each from zero state.
    Windowed,
}

/// Generates one frame per target. All landmarks are in network-frame
/// coordinates; `sigma` is the heatmap width in pixels.
pub fn generate_frames(
    nets: &Networks,
    source: &Frame,
    source_lms: &LandmarkSet,
    targets: &[LandmarkSet],
    sigma: f64,
    mode: GenerationMode,
) -> Result<Vec<Frame>> {
    if targets.is_empty() {
        return Err(Error::Argument("at least one target landmark set is required".into()));
    }
    let size = nets.cfg.image_size;
    if source.shape() != (size, size) {
        return Err(Error::Shape(format!(
            "source is {:?}, network expects {size}x{size}",
            source.shape()
        )));
    }
    let (kind, device) = (nets.kind(), nets.device());
    let prep = |t: Tensor| t.unsqueeze(0).to_device(device).to_kind(kind);
    let s = prep(frame_to_tensor(source));
    let l = prep(landmarks_to_tensor(source_lms, size, sigma)?);
    let hms: Vec<Tensor> = targets
        .iter()
        .map(|lms| Ok(prep(landmarks_to_tensor(lms, size, sigma)?)))
        .collect::<Result<_>>()?;
    tch::no_grad(|| {
        let mut out = Vec::with_capacity(targets.len());
        match mode {
            GenerationMode::Continuous => {
                let mut state = GeneratorState::zeros(&nets.cfg, 1, kind, device);
                for lt in &hms {
                    let (f, next) = nets.generator.step(&s, &l, lt, &state)?;
                    out.push(tensor_to_frame(&f)?);
                    state = next;
                }
            }
            GenerationMode::Windowed => {
                for chunk in hms.chunks(nets.cfg.window) {
                    let seq = Tensor::stack(chunk, 1);
                    let frames = nets.generator.generate_sequence(&s, &l, &seq)?;
                    for i in 0..chunk.len() as i64 {
                        out.push(tensor_to_frame(&frames.select(1, i))?);
                    }
                }
            }
        }
        Ok(out)
    })
}

/// Record of one `generate` run, written beside the frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationManifest {
    pub format: String,
    pub checkpoint: PathBuf,
    pub mode: GenerationMode,
    pub image_size: usize,
    /// Source image to network-frame coordinates.
    pub source_transform: GeometricTransform,
    pub frames: Vec<GeneratedFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedFrame {
    pub file: String,
    pub target_file: PathBuf,
    /// Target landmark coordinates to this frame's coordinates.
    pub transform: GeometricTransform,
    /// Target landmarks in this frame's coordinates.
    pub landmarks: StructuredLandmarks,
}

impl GenerationManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
        if m.format != GENERATION_FORMAT {
            return Err(Error::Argument(format!(
                "{}: format '{}' is not {GENERATION_FORMAT}",
                path.display(),
                m.format
            )));
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Crops the source around its landmarks, brings every target into the
/// crop it would have been given by the training loader, generates, and
/// writes `NNNNNN.png` frames plus `generation.json` to `out_dir`.
pub fn generate_to_directory(
    ckpt: &Path,
    source_image: &Path,
    source_lms: &Path,
    target_dir: &Path,
    out_dir: &Path,
    mode: GenerationMode,
    device: Device,
) -> Result<GenerationManifest> {
    let (nets, header) = load_networks(ckpt, device)?;
    let size = header.net.image_size;
    let image = motiongan_core::Frame::load_png(source_image)?.to_rgb8();
    let lms = read_pts(source_lms)?;
    let (source, source_crop_lms, source_transform) = crop_to_landmarks(&image, &lms, DEFAULT_CROP_MARGIN, size)?;
    if !target_dir.is_dir() {
        return Err(Error::Argument(format!("{} is not a directory", target_dir.display())));
    }
    let target_files = pts_files(target_dir)?;
    if target_files.is_empty() {
        return Err(Error::Argument(format!("no .pts files in {}", target_dir.display())));
    }
    let mut targets = Vec::with_capacity(target_files.len());
    let mut transforms = Vec::with_capacity(target_files.len());
    for p in &target_files {
        let raw = read_pts(p)?;
        let t = crop_transform(&raw, DEFAULT_CROP_MARGIN, size)?;
        targets.push(t.apply(&raw));
        transforms.push(t);
    }
    let frames = generate_frames(&nets, &source, &source_crop_lms, &targets, header.train.sigma, mode)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut records = Vec::with_capacity(frames.len());
    for (i, ((frame, t), (lms, p))) in frames.iter().zip(&transforms).zip(targets.into_iter().zip(&target_files)).enumerate() {
        let file = frame_file_name(i, "png");
        frame.save_png(&out_dir.join(&file))?;
        records.push(GeneratedFrame {
            file,
            target_file: p.clone(),
            transform: *t,
            landmarks: lms.into(),
        });
    }
    let manifest = GenerationManifest {
        format: GENERATION_FORMAT.to_string(),
        checkpoint: fs::canonicalize(ckpt).map_err(|e| Error::io(ckpt, e))?,
        mode,
        image_size: size,
        source_transform,
        frames: records,
    };
    manifest.write(&out_dir.join(GENERATION_MANIFEST))?;
    Ok(manifest)
}

/// [`decode_landmarks`] as a [`LandmarkEstimator`], optionally mapping the
/// points back through per-frame transforms.
#[derive(Debug)]
pub struct DvLandmarkEstimator {
    nets: Networks,
    inverse: Option<Vec<GeometricTransform>>,
}

impl DvLandmarkEstimator {
    pub fn new(nets: Networks) -> Self {
        Self { nets, inverse: None }
    }

    /// Estimator for a generated directory: the manifest's checkpoint,
    /// decoding back into target-landmark coordinates.
    pub fn from_manifest(manifest: &GenerationManifest, device: Device) -> Result<Self> {
        let (nets, _) = load_networks(&manifest.checkpoint, device)?;
        Ok(Self {
            nets,
            inverse: Some(manifest.frames.iter().map(|f| f.transform).collect()),
        })
    }

    /// Decoded landmarks in frame coordinates.
    pub fn decode(&self, frames: &[Frame]) -> Result<Vec<LandmarkSet>> {
        decode_landmarks(&self.nets, frames)
    }
}

/// Argmax-decoded landmarks of the video discriminator's heatmap branch, in
/// frame coordinates, over windows of the training length (the last window
/// padded by repeating its final frame).
pub fn decode_landmarks(nets: &Networks, frames: &[Frame]) -> Result<Vec<LandmarkSet>> {
    let size = nets.cfg.image_size;
    let t = nets.cfg.window;
    let (kind, device) = (nets.kind(), nets.device());
    let mut out = Vec::with_capacity(frames.len());
    for chunk in frames.chunks(t) {
        let mut seq = Vec::with_capacity(t);
        for i in 0..t {
            let f = &chunk[i.min(chunk.len() - 1)];
            if f.shape() != (size, size) {
                return Err(Error::Shape(format!("frame is {:?}, network expects {size}x{size}", f.shape())));
            }
            seq.push(frame_to_tensor(f));
        }
        let input = Tensor::stack(&seq, 0).unsqueeze(0).to_device(device).to_kind(kind);
        let hms = tch::no_grad(|| nets.video_disc.forward(&input))?.heatmaps;
        for i in 0..chunk.len() as i64 {
            let data = to_vec_f32(&hms.get(0).get(i));
            out.push(decode_channels(&data, size, size).landmarks);
        }
    }
    Ok(out)
}

impl LandmarkEstimator for DvLandmarkEstimator {
    fn estimate(&mut self, frames: &[Frame], _paths: &[PathBuf]) -> motiongan_core::Result<Vec<LandmarkSet>> {
        let core_err = |e: Error| motiongan_core::Error::Argument(e.to_string());
        let decoded = self.decode(frames).map_err(core_err)?;
        match &self.inverse {
            None => Ok(decoded),
            Some(ts) if ts.len() == decoded.len() => Ok(decoded.iter().zip(ts).map(|(l, t)| t.invert(l)).collect()),
            Some(ts) => Err(motiongan_core::Error::Argument(format!(
                "manifest lists {} frames, directory has {}",
                ts.len(),
                decoded.len()
            ))),
        }
    }
}

/// Landmark estimator for a predicted directory: its own annotations when
/// present, else the video discriminator named by its generation manifest.
pub fn resolve_estimator(pred_dir: &Path, device: Device) -> Result<Box<dyn LandmarkEstimator>> {
    if let Some(a) = AnnotationEstimator::for_directory(pred_dir)? {
        return Ok(Box::new(a));
    }
    let manifest = pred_dir.join(GENERATION_MANIFEST);
    if manifest.is_file() {
        let m = GenerationManifest::read(&manifest)?;
        return Ok(Box::new(DvLandmarkEstimator::from_manifest(&m, device)?));
    }
    Err(Error::Argument(format!(
        "{} has neither landmark annotations nor a {GENERATION_MANIFEST}",
        pred_dir.display()
    )))
}
