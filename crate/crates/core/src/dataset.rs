//! Video clips, training windows, on-disk corpora and the synthetic corpus manifest.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{crop_to_landmarks, mirror, DEFAULT_CROP_MARGIN};
use crate::landmarks::{GeometricTransform, LandmarkSet};
use crate::pts::{read_pts, write_pts};
use crate::synthetic::{render_synthetic_clip, SyntheticFaceParams};

pub const FRAMES_DIR: &str = "frames";
pub const LANDMARKS_DIR: &str = "landmarks";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Smallest index distance allowed between the source frame and the first target.
pub const DEFAULT_MIN_GAP: usize = 2;

/// Aligned frames and landmarks of one identity.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    pub frames: Vec<Frame>,
    pub landmarks: Vec<LandmarkSet>,
    pub identity_id: String,
    pub fps: Option<f64>,
    /// Per-frame map from the original capture coordinates into `landmarks`.
    pub transforms: Vec<GeometricTransform>,
}

impl VideoClip {
    pub fn new(frames: Vec<Frame>, landmarks: Vec<LandmarkSet>, identity_id: impl Into<String>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Argument("a clip needs at least one frame".into()));
        }
        if frames.len() != landmarks.len() {
            return Err(Error::Argument(format!(
                "{} frames but {} landmark sets",
                frames.len(),
                landmarks.len()
            )));
        }
        let shape = frames[0].shape();
        if let Some(i) = frames.iter().position(|f| f.shape() != shape) {
            return Err(Error::Shape(format!(
                "frame {i} is {:?}, expected {:?}",
                frames[i].shape(),
                shape
            )));
        }
        let transforms = vec![GeometricTransform::identity(shape.1); frames.len()];
        Ok(Self {
            frames,
            landmarks,
            identity_id: identity_id.into(),
            fps: None,
            transforms,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(height, width)` shared by every frame.
    pub fn frame_shape(&self) -> (usize, usize) {
        self.frames[0].shape()
    }

    pub fn mirrored(&self) -> Self {
        let (frames, landmarks) = self
            .frames
            .iter()
            .zip(&self.landmarks)
            .map(|(f, l)| mirror(f, l))
            .unzip();
        Self {
            frames,
            landmarks,
            identity_id: format!("{}-mirrored", self.identity_id),
            fps: self.fps,
            transforms: self.transforms.iter().map(|t| t.then_mirror()).collect(),
        }
    }

    /// A clip restricted to frame indices `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::Argument(format!(
                "frame range {range:?} outside clip of length {}",
                self.len()
            )));
        }
        Ok(Self {
            frames: self.frames[range.clone()].to_vec(),
            landmarks: self.landmarks[range.clone()].to_vec(),
            identity_id: self.identity_id.clone(),
            fps: self.fps,
            transforms: self.transforms[range].to_vec(),
        })
    }
}

/// A source frame plus `T` consecutive target frames from the same clip.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow {
    pub source_frame: Frame,
    pub source_lms: LandmarkSet,
    pub target_frames: Vec<Frame>,
    pub target_lms: Vec<LandmarkSet>,
    pub source_index: usize,
    pub first_target_index: usize,
}

impl TrainingWindow {
    pub fn len(&self) -> usize {
        self.target_frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_frames.is_empty()
    }

    /// Window at fixed indices; no gap constraint is enforced.
    pub fn at(clip: &VideoClip, source_index: usize, first_target_index: usize, t: usize) -> Result<Self> {
        if source_index >= clip.len() || first_target_index + t > clip.len() || t == 0 {
            return Err(Error::Sampling(format!(
                "source {source_index} / targets {first_target_index}..{} outside clip of length {}",
                first_target_index + t,
                clip.len()
            )));
        }
        let range = first_target_index..first_target_index + t;
        Ok(Self {
            source_frame: clip.frames[source_index].clone(),
            source_lms: clip.landmarks[source_index].clone(),
            target_frames: clip.frames[range.clone()].to_vec(),
            target_lms: clip.landmarks[range].to_vec(),
            source_index,
            first_target_index,
        })
    }
}

/// All `(source, first_target)` pairs with `first_target + t <= len` and
/// `|first_target - source| >= min_gap`, in lexicographic order.
pub fn valid_window_pairs(len: usize, t: usize, min_gap: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    if t == 0 || t > len {
        return pairs;
    }
    for source in 0..len {
        for start in 0..=(len - t) {
            if start.abs_diff(source) >= min_gap {
                pairs.push((source, start));
            }
        }
    }
    pairs
}

/// Draws a window uniformly over every valid `(source, first_target)` pair.
pub fn sample_window<R: Rng + ?Sized>(clip: &VideoClip, t: usize, min_gap: usize, rng: &mut R) -> Result<TrainingWindow> {
    if t == 0 {
        return Err(Error::Sampling("window length must be at least 1".into()));
    }
    if clip.len() < t + min_gap {
        return Err(Error::Sampling(format!(
            "clip '{}' has {} frames, need at least T + min_gap = {}",
            clip.identity_id,
            clip.len(),
            t + min_gap
        )));
    }
    let pairs = valid_window_pairs(clip.len(), t, min_gap);
    let (source, start) = pairs[rng.gen_range(0..pairs.len())];
    TrainingWindow::at(clip, source, start, t)
}

/// Originals followed by their mirrored copies.
pub fn augment_mirror(corpus: &[VideoClip]) -> Vec<VideoClip> {
    corpus
        .iter()
        .cloned()
        .chain(corpus.iter().map(VideoClip::mirrored))
        .collect()
}

/// A synthetic identity rendered as a clip (identity label `synthetic-<color seed>`).
pub fn make_synthetic_clip(params: &SyntheticFaceParams, n_frames: usize, size: usize, seed: u64) -> Result<VideoClip> {
    let clip = render_synthetic_clip(params, n_frames, size, seed)?;
    VideoClip::new(clip.frames, clip.landmarks, format!("synthetic-{}", params.color_seed))
}

fn sorted_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let matches = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case(extension));
        if path.is_file() && matches {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    sorted_files(dir, "png")
}

pub fn pts_files(dir: &Path) -> Result<Vec<PathBuf>> {
    sorted_files(dir, "pts")
}

/// How frames are brought to network resolution on load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub size: usize,
    pub margin_frac: f64,
}

impl LoadOptions {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            margin_frac: DEFAULT_CROP_MARGIN,
        }
    }
}

/// Reads `*.png` frames and `*.pts` landmarks, paired by sorted file name,
/// and crops every frame around its landmarks to `options.size`.
pub fn load_clip(frame_dir: &Path, landmark_dir: &Path, options: LoadOptions) -> Result<VideoClip> {
    let frame_paths = frame_files(frame_dir)?;
    let pts_paths = pts_files(landmark_dir)?;
    if frame_paths.len() != pts_paths.len() {
        return Err(Error::Ingestion(format!(
            "{} has {} frames but {} has {} landmark files",
            frame_dir.display(),
            frame_paths.len(),
            landmark_dir.display(),
            pts_paths.len()
        )));
    }
    if frame_paths.is_empty() {
        return Err(Error::Ingestion(format!("no frames in {}", frame_dir.display())));
    }
    let mut frames = Vec::with_capacity(frame_paths.len());
    let mut landmarks = Vec::with_capacity(frame_paths.len());
    let mut transforms = Vec::with_capacity(frame_paths.len());
    for (fp, lp) in frame_paths.iter().zip(&pts_paths) {
        let image = image::open(fp)
            .map_err(|e| Error::Ingestion(format!("{}: {e}", fp.display())))?
            .to_rgb8();
        let lms = read_pts(lp).map_err(|e| Error::Ingestion(e.to_string()))?;
        let (frame, lms, t) = crop_to_landmarks(&image, &lms, options.margin_frac, options.size)
            .map_err(|e| Error::Ingestion(format!("{}: {e}", lp.display())))?;
        frames.push(frame);
        landmarks.push(lms);
        transforms.push(t);
    }
    let identity = frame_dir
        .parent()
        .and_then(|p| p.file_name())
        .or_else(|| frame_dir.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut clip = VideoClip::new(frames, landmarks, identity)?;
    clip.transforms = transforms;
    Ok(clip)
}

/// Loads `<dir>/frames` + `<dir>/landmarks`.
pub fn load_clip_dir(dir: &Path, options: LoadOptions) -> Result<VideoClip> {
    load_clip(&dir.join(FRAMES_DIR), &dir.join(LANDMARKS_DIR), options)
}

/// Every clip directory (one containing `frames/`) directly under `root`, in name order.
pub fn load_corpus(root: &Path, options: LoadOptions) -> Result<Vec<VideoClip>> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(FRAMES_DIR).is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::Ingestion(format!("no clip directories under {}", root.display())));
    }
    dirs.iter().map(|d| load_clip_dir(d, options)).collect()
}

pub fn frame_file_name(index: usize, extension: &str) -> String {
    format!("{index:06}.{extension}")
}

/// Writes `<dir>/frames/NNNNNN.png` and `<dir>/landmarks/NNNNNN.pts`.
pub fn save_clip(clip: &VideoClip, dir: &Path) -> Result<()> {
    let fdir = dir.join(FRAMES_DIR);
    let ldir = dir.join(LANDMARKS_DIR);
    for d in [&fdir, &ldir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    for (i, (frame, lms)) in clip.frames.iter().zip(&clip.landmarks).enumerate() {
        frame.save_png(&fdir.join(frame_file_name(i, "png")))?;
        write_pts(&ldir.join(frame_file_name(i, "pts")), lms)?;
    }
    Ok(())
}

/// One identity of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub clip_seed: u64,
    pub params: SyntheticFaceParams,
}

/// Everything needed to regenerate a synthetic corpus bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticManifest {
    pub format: String,
    pub seed: u64,
    pub size: usize,
    pub frames: usize,
    pub identities: Vec<ManifestEntry>,
}

impl SyntheticManifest {
    pub const FORMAT: &'static str = "motiongan-synthetic-v1";

    /// Draws `identities` random faces from `seed`.
    pub fn random(seed: u64, identities: usize, frames: usize, size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let identities = (0..identities)
            .map(|i| ManifestEntry {
                name: format!("clip_{i:03}"),
                clip_seed: rng.gen(),
                params: SyntheticFaceParams::random(&mut rng, frames),
            })
            .collect();
        Self {
            format: Self::FORMAT.to_string(),
            seed,
            size,
            frames,
            identities,
        }
    }

    pub fn render(&self) -> Result<Vec<VideoClip>> {
        self.identities
            .iter()
            .map(|e| {
                let mut clip = make_synthetic_clip(&e.params, self.frames, self.size, e.clip_seed)?;
                clip.identity_id = e.name.clone();
                Ok(clip)
            })
            .collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        if manifest.format != Self::FORMAT {
            return Err(Error::parse(path, format!("unknown manifest format '{}'", manifest.format)));
        }
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Renders the manifest's identities into `root/<name>/{frames,landmarks}`
/// and writes `root/manifest.json`.
pub fn write_synthetic_corpus(manifest: &SyntheticManifest, root: &Path) -> Result<Vec<VideoClip>> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let clips = manifest.render()?;
    for clip in &clips {
        let dir = root.join(&clip.identity_id);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        save_clip(clip, &dir)?;
    }
    manifest.write(&root.join(MANIFEST_FILE))?;
    Ok(clips)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(len: usize) -> VideoClip {
        make_synthetic_clip(&SyntheticFaceParams::default(), len, 32, 0).unwrap()
    }

    #[test]
    fn windows_respect_gap_and_bounds() {
        let c = clip(8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let w = sample_window(&c, 4, 2, &mut rng).unwrap();
            assert!(w.first_target_index.abs_diff(w.source_index) >= 2);
            assert!(w.first_target_index + 4 <= 8);
            assert_eq!(w.target_frames.len(), 4);
            assert_eq!(w.target_lms[0], c.landmarks[w.first_target_index]);
        }
    }

    #[test]
    fn short_clip_cannot_be_sampled() {
        let c = clip(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(sample_window(&c, 4, 2, &mut rng), Err(Error::Sampling(_))));
    }

    #[test]
    fn pair_enumeration() {
        // len 6, T 4 -> starts {0,1,2}; sources with |start - s| >= 2
        let pairs = valid_window_pairs(6, 4, 2);
        assert_eq!(pairs.len(), 4 + 3 + 3);
        assert!(pairs.contains(&(5, 0)) && pairs.contains(&(0, 2)) && !pairs.contains(&(1, 0)));
    }

    #[test]
    fn mirror_augmentation_doubles() {
        let corpus: Vec<_> = (0..7).map(|_| clip(3)).collect();
        let out = augment_mirror(&corpus);
        assert_eq!(out.len(), 14);
        assert_eq!(out[7].landmarks[0], corpus[0].landmarks[0].mirrored(32));
        assert!(augment_mirror(&[]).is_empty());
    }

    #[test]
    fn clip_rejects_mismatched_lengths() {
        let c = clip(3);
        assert!(VideoClip::new(c.frames.clone(), c.landmarks[..2].to_vec(), "x").is_err());
        assert!(VideoClip::new(vec![], vec![], "x").is_err());
    }
}
