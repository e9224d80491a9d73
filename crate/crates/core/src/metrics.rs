//! Image-quality and landmark-accuracy metrics: PSNR, SSIM, interocular-normalized
//! RMS, cumulative error distribution, AUC and failure rate.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{frame_files, pts_files, FRAMES_DIR, LANDMARKS_DIR};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::landmarks::{interocular_distance, LandmarkSet};
use crate::pts::read_pts;

/// Peak-to-peak range of `[-1, 1]` frames; PSNR/SSIM on frames with this
/// range equal the 8-bit values computed with 255.
pub const FRAME_RANGE: f64 = 2.0;

/// Largest normalized landmark error counted by the AUC, and the failure threshold.
pub const DEFAULT_MAX_ERROR: f64 = 0.1;

/// Integration bins for the AUC.
pub const AUC_BINS: usize = 1000;

/// `10 log10(max_val^2 / MSE)`. Identical inputs give `f64::INFINITY`.
pub fn psnr(a: &[f32], b: &[f32], max_val: f64) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Shape(format!(
            "psnr needs equal non-empty inputs, got {} and {} values",
            a.len(),
            b.len()
        )));
    }
    if !(max_val > 0.0) {
        return Err(Error::Argument(format!("max_val must be positive, got {max_val}")));
    }
    let mse = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (max_val * max_val / mse).log10())
}

pub fn psnr_frames(a: &Frame, b: &Frame) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("frames {:?} vs {:?}", a.shape(), b.shape())));
    }
    psnr(a.data(), b.data(), FRAME_RANGE)
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Normalized 1D Gaussian taps of the SSIM window.
pub fn ssim_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.map(|v| v / sum)
}

/// Valid-mode separable filtering of one plane.
fn filter_valid(plane: &[f64], height: usize, width: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; height * ow];
    for y in 0..height {
        let src = &plane[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&src[x..x + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(j, w)| w * rows[(y + j) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all valid 11x11 Gaussian windows and all channels of two
/// interleaved `height x width x channels` images with dynamic range `data_range`.
pub fn ssim_raw(a: &[f32], b: &[f32], height: usize, width: usize, channels: usize, data_range: f64) -> Result<f64> {
    let n = height * width * channels;
    if a.len() != n || b.len() != n {
        return Err(Error::Shape(format!(
            "ssim expects {n} values, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if height < SSIM_WINDOW || width < SSIM_WINDOW {
        return Err(Error::Argument(format!(
            "image {height}x{width} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )));
    }
    if channels == 0 || !(data_range > 0.0) {
        return Err(Error::Argument("ssim needs channels > 0 and a positive data range".into()));
    }
    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);
    let k = ssim_kernel();
    let mut total = 0.0;
    let mut count = 0usize;
    for ch in 0..channels {
        let pa: Vec<f64> = a.iter().skip(ch).step_by(channels).map(|&v| v as f64).collect();
        let pb: Vec<f64> = b.iter().skip(ch).step_by(channels).map(|&v| v as f64).collect();
        let aa: Vec<f64> = pa.iter().map(|v| v * v).collect();
        let bb: Vec<f64> = pb.iter().map(|v| v * v).collect();
        let ab: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        let mu_a = filter_valid(&pa, height, width, &k);
        let mu_b = filter_valid(&pb, height, width, &k);
        let e_aa = filter_valid(&aa, height, width, &k);
        let e_bb = filter_valid(&bb, height, width, &k);
        let e_ab = filter_valid(&ab, height, width, &k);
        for i in 0..mu_a.len() {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
        count += mu_a.len();
    }
    Ok(total / count as f64)
}

pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("frames {:?} vs {:?}", a.shape(), b.shape())));
    }
    ssim_raw(a.data(), b.data(), a.height(), a.width(), Frame::CHANNELS, FRAME_RANGE)
}

/// Root-mean-square point-to-point error divided by the interocular distance of `gt`.
pub fn normalized_rms(pred: &LandmarkSet, gt: &LandmarkSet) -> Result<f64> {
    let norm = interocular_distance(gt)?;
    let mean_sq = pred
        .points()
        .iter()
        .zip(gt.points())
        .map(|(p, g)| {
            let d = p.distance(g);
            d * d
        })
        .sum::<f64>()
        / pred.points().len() as f64;
    Ok(mean_sq.sqrt() / norm)
}

/// Cumulative error distribution sampled at uniformly spaced thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CedCurve {
    pub thresholds: Vec<f64>,
    pub fractions: Vec<f64>,
}

fn check_errors(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::Argument("error list is empty".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e >= 0.0) || e.is_nan()) {
        return Err(Error::Argument(format!("errors must be non-negative, got {e}")));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(sorted)
}

/// `fractions[i]` is the share of errors `<= thresholds[i]`, with `n_bins`
/// thresholds spread evenly over `[0, e_max]`.
pub fn ced(errors: &[f64], e_max: f64, n_bins: usize) -> Result<CedCurve> {
    let sorted = check_errors(errors)?;
    if n_bins < 2 {
        return Err(Error::Argument(format!("ced needs at least 2 thresholds, got {n_bins}")));
    }
    if !(e_max > 0.0) || !e_max.is_finite() {
        return Err(Error::Argument(format!("e_max must be positive, got {e_max}")));
    }
    let n = sorted.len() as f64;
    let thresholds: Vec<f64> = (0..n_bins)
        .map(|i| e_max * i as f64 / (n_bins - 1) as f64)
        .collect();
    let fractions = thresholds
        .iter()
        .map(|&t| sorted.partition_point(|&e| e <= t) as f64 / n)
        .collect();
    Ok(CedCurve {
        thresholds,
        fractions,
    })
}

impl CedCurve {
    /// Trapezoidal area under the curve divided by the threshold span, in percent.
    pub fn auc_percent(&self) -> f64 {
        let span = self.thresholds.last().copied().unwrap_or(0.0) - self.thresholds[0];
        let area: f64 = self
            .thresholds
            .windows(2)
            .zip(self.fractions.windows(2))
            .map(|(t, f)| (t[1] - t[0]) * (f[0] + f[1]) / 2.0)
            .sum();
        100.0 * area / span
    }
}

/// AUC of the CED over `[0, e_max]` (percent) and the percentage of errors above `e_max`.
pub fn auc_and_fr(errors: &[f64], e_max: f64) -> Result<(f64, f64)> {
    let curve = ced(errors, e_max, AUC_BINS + 1)?;
    let failures = errors.iter().filter(|&&e| e > e_max).count();
    Ok((curve.auc_percent(), 100.0 * failures as f64 / errors.len() as f64))
}

/// Aggregate quality of a generated sequence against its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean over frames with finite PSNR; `None` when every frame matched exactly.
    pub psnr_mean: Option<f64>,
    pub ssim_mean: f64,
    pub auc: f64,
    pub failure_rate: f64,
    pub n_frames: usize,
    pub n_infinite_psnr: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn summary_line(&self) -> String {
        let psnr = self
            .psnr_mean
            .map(|p| format!("{p:.3} dB"))
            .unwrap_or_else(|| "inf".to_string());
        format!(
            "frames={} psnr={} ssim={:.4} auc={:.2} fr={:.2}% (infinite psnr frames: {})",
            self.n_frames, psnr, self.ssim_mean, self.auc, self.failure_rate, self.n_infinite_psnr
        )
    }
}

/// Per-frame scores gathered before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScores {
    pub psnr: f64,
    pub ssim: f64,
    pub landmark_error: f64,
}

/// Folds per-frame scores in order into a report.
pub fn aggregate(scores: &[FrameScores], e_max: f64) -> Result<EvalReport> {
    if scores.is_empty() {
        return Err(Error::Argument("no frames to evaluate".into()));
    }
    let finite: Vec<f64> = scores.iter().map(|s| s.psnr).filter(|p| p.is_finite()).collect();
    let psnr_mean = (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
    let ssim_mean = scores.iter().map(|s| s.ssim).sum::<f64>() / scores.len() as f64;
    let errors: Vec<f64> = scores.iter().map(|s| s.landmark_error).collect();
    let (auc, failure_rate) = auc_and_fr(&errors, e_max)?;
    Ok(EvalReport {
        psnr_mean,
        // structural dissimilarity below zero is reported as zero
        ssim_mean: ssim_mean.clamp(0.0, 1.0),
        auc,
        failure_rate,
        n_frames: scores.len(),
        n_infinite_psnr: scores.len() - finite.len(),
    })
}

/// Estimates landmarks of evaluated frames; stands in for an external face-alignment network.
pub trait LandmarkEstimator {
    /// `paths[i]` is the file `frames[i]` was read from.
    fn estimate(&mut self, frames: &[Frame], paths: &[PathBuf]) -> Result<Vec<LandmarkSet>>;
}

/// Reads the `.pts` file with the same stem next to each frame; exact for
/// annotated (e.g. synthetic) frames.
#[derive(Debug, Default, Clone, Copy)]
pub struct SidecarPtsEstimator;

impl SidecarPtsEstimator {
    pub fn sidecar(path: &Path) -> PathBuf {
        path.with_extension("pts")
    }

    /// True when every frame has a sidecar `.pts`.
    pub fn available(paths: &[PathBuf]) -> bool {
        !paths.is_empty() && paths.iter().all(|p| Self::sidecar(p).is_file())
    }
}

impl LandmarkEstimator for SidecarPtsEstimator {
    fn estimate(&mut self, _frames: &[Frame], paths: &[PathBuf]) -> Result<Vec<LandmarkSet>> {
        paths.iter().map(|p| read_pts(&Self::sidecar(p))).collect()
    }
}

/// Reads a fixed list of `.pts` files, one per frame in order; used when the
/// predicted directory carries its own annotations.
#[derive(Debug, Clone)]
pub struct AnnotationEstimator {
    pub paths: Vec<PathBuf>,
}

impl AnnotationEstimator {
    /// The annotations of `dir` (a `landmarks/` subdirectory or `.pts` files
    /// beside the frames), if there is one per frame.
    pub fn for_directory(dir: &Path) -> Result<Option<Self>> {
        let d = FrameDirectory::open(dir)?;
        let complete = !d.frame_paths.is_empty() && d.landmark_paths.len() == d.frame_paths.len();
        Ok(complete.then_some(Self { paths: d.landmark_paths }))
    }
}

impl LandmarkEstimator for AnnotationEstimator {
    fn estimate(&mut self, frames: &[Frame], _paths: &[PathBuf]) -> Result<Vec<LandmarkSet>> {
        if frames.len() != self.paths.len() {
            return Err(Error::Argument(format!(
                "{} annotations for {} frames",
                self.paths.len(),
                frames.len()
            )));
        }
        self.paths.iter().map(|p| read_pts(p)).collect()
    }
}

/// A directory of evaluated frames: `<dir>/frames` + `<dir>/landmarks`
/// when present, else `*.png` (and optional `*.pts`) directly in `<dir>`.
#[derive(Debug, Clone)]
pub struct FrameDirectory {
    pub frame_paths: Vec<PathBuf>,
    pub landmark_paths: Vec<PathBuf>,
}

impl FrameDirectory {
    pub fn open(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Ingestion(format!("{} is not a directory", dir.display())));
        }
        let (fdir, ldir) = if dir.join(FRAMES_DIR).is_dir() {
            (dir.join(FRAMES_DIR), dir.join(LANDMARKS_DIR))
        } else {
            (dir.to_path_buf(), dir.to_path_buf())
        };
        let frame_paths = frame_files(&fdir)?;
        let landmark_paths = if ldir.is_dir() { pts_files(&ldir)? } else { vec![] };
        Ok(Self {
            frame_paths,
            landmark_paths,
        })
    }

    pub fn load_frames(&self) -> Result<Vec<Frame>> {
        self.frame_paths.iter().map(|p| Frame::load_png(p)).collect()
    }
}

/// Scores every predicted frame against the ground-truth frame at the same
/// sorted position. Ground truth must carry `.pts` landmarks.
pub fn evaluate_directories(
    pred_dir: &Path,
    gt_dir: &Path,
    estimator: &mut dyn LandmarkEstimator,
) -> Result<EvalReport> {
    let pred = FrameDirectory::open(pred_dir)?;
    let gt = FrameDirectory::open(gt_dir)?;
    if pred.frame_paths.len() != gt.frame_paths.len() {
        return Err(Error::Ingestion(format!(
            "{} has {} frames but {} has {}",
            pred_dir.display(),
            pred.frame_paths.len(),
            gt_dir.display(),
            gt.frame_paths.len()
        )));
    }
    if gt.landmark_paths.len() != gt.frame_paths.len() {
        return Err(Error::Ingestion(format!(
            "{} has {} frames but {} landmark files",
            gt_dir.display(),
            gt.frame_paths.len(),
            gt.landmark_paths.len()
        )));
    }
    let pred_frames = pred.load_frames()?;
    let gt_frames = gt.load_frames()?;
    let gt_lms: Vec<LandmarkSet> = gt.landmark_paths.iter().map(|p| read_pts(p)).collect::<Result<_>>()?;
    let est = estimator.estimate(&pred_frames, &pred.frame_paths)?;
    if est.len() != pred_frames.len() {
        return Err(Error::Argument(format!(
            "estimator returned {} landmark sets for {} frames",
            est.len(),
            pred_frames.len()
        )));
    }
    let scores = pred_frames
        .iter()
        .zip(&gt_frames)
        .zip(est.iter().zip(&gt_lms))
        .map(|((p, g), (pl, gl))| {
            Ok(FrameScores {
                psnr: psnr_frames(p, g)?,
                ssim: ssim(p, g)?,
                landmark_error: normalized_rms(pl, gl)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate(&scores, DEFAULT_MAX_ERROR)
}

pub fn write_report(report: &EvalReport, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, report.to_json()).map_err(|e| Error::io(path, e))
}
