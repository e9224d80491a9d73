//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three operations: render a synthetic face with its landmark heatmap
//! overlaid (and decode the heatmap back), mirror it, and compute a CED
//! curve with AUC and failure rate for a list of errors.

use motiongan_core::heatmap::{decode_heatmap, encode_heatmap};
use motiongan_core::metrics::{auc_and_fr, ced, AUC_BINS, DEFAULT_MAX_ERROR};
use motiongan_core::{mirror, render_synthetic_clip, Frame, LandmarkSet, SyntheticFaceParams};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Frames spanned by one demo identity.
pub const CLIP_FRAMES: usize = 64;

/// The synthetic identity drawn from `seed`.
pub fn identity_params(seed: u32) -> SyntheticFaceParams {
    SyntheticFaceParams::random(&mut ChaCha8Rng::seed_from_u64(seed as u64), CLIP_FRAMES)
}

/// One rendered face: RGBA pixels, the true landmarks and the landmarks
/// decoded from their heatmap.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct FaceView {
    size: usize,
    rgba: Vec<u8>,
    landmarks: Vec<f64>,
    decoded: Vec<f64>,
    max_decode_error: f64,
}

#[wasm_bindgen]
impl FaceView {
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.size
    }

    /// `size * size * 4` bytes, row-major.
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// `[x0, y0, x1, y1, ...]` for the 68 points.
    #[wasm_bindgen(getter)]
    pub fn landmarks(&self) -> Vec<f64> {
        self.landmarks.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn decoded(&self) -> Vec<f64> {
        self.decoded.clone()
    }

    /// Largest distance between a true point and its decoded heatmap peak.
    #[wasm_bindgen(getter, js_name = maxDecodeError)]
    pub fn max_decode_error(&self) -> f64 {
        self.max_decode_error
    }
}

fn flat(lms: &LandmarkSet) -> Vec<f64> {
    lms.points().iter().flat_map(|p| [p.x, p.y]).collect()
}

/// Renders frame `frame` of identity `seed` on a `size` canvas, blending the
/// per-pixel maximum of its 68 heatmap channels (width `sigma`) in red with
/// weight `overlay`. With `mirrored`, frame and landmarks are flipped first.
pub fn face_view(seed: u32, frame: usize, size: usize, sigma: f64, overlay: f64, mirrored: bool) -> Result<FaceView, String> {
    if !(16..=256).contains(&size) {
        return Err(format!("size must lie in 16..=256, got {size}"));
    }
    if frame >= CLIP_FRAMES {
        return Err(format!("frame must be below {CLIP_FRAMES}, got {frame}"));
    }
    let params: SyntheticFaceParams = identity_params(seed);
    let clip = render_synthetic_clip(&params, frame + 1, size, seed as u64).map_err(|e| e.to_string())?;
    let (mut img, mut lms): (Frame, LandmarkSet) = (clip.frames[frame].clone(), clip.landmarks[frame].clone());
    if mirrored {
        (img, lms) = mirror(&img, &lms);
    }
    let hm = encode_heatmap(&lms, size, size, sigma).map_err(|e| e.to_string())?;
    let decoded = decode_heatmap(&hm).landmarks;
    let max_decode_error = lms
        .points()
        .iter()
        .zip(decoded.points())
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max);
    let overlay = overlay.clamp(0.0, 1.0) as f32;
    let mut rgba = Vec::with_capacity(size * size * 4);
    for y in 0..size {
        for x in 0..size {
            let peak = (0..68).map(|c| hm.at(y, x, c)).fold(0.0f32, f32::max) * overlay;
            let [r, g, b] = img.pixel(y, x).map(|v| (v + 1.0) * 127.5);
            let mix = |v: f32, target: f32| (v * (1.0 - peak) + target * peak).round().clamp(0.0, 255.0) as u8;
            rgba.extend([mix(r, 255.0), mix(g, 0.0), mix(b, 0.0), 255]);
        }
    }
    Ok(FaceView {
        size,
        rgba,
        landmarks: flat(&lms),
        decoded: flat(&decoded),
        max_decode_error,
    })
}

#[wasm_bindgen(js_name = renderFace)]
pub fn render_face(seed: u32, frame: usize, size: usize, sigma: f64, overlay: f64, mirrored: bool) -> Result<FaceView, JsError> {
    face_view(seed, frame, size, sigma, overlay, mirrored).map_err(|e| JsError::new(&e))
}

/// CED curve of a set of normalized errors.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct CedView {
    thresholds: Vec<f64>,
    fractions: Vec<f64>,
    auc: f64,
    failure_rate: f64,
}

#[wasm_bindgen]
impl CedView {
    #[wasm_bindgen(getter)]
    pub fn thresholds(&self) -> Vec<f64> {
        self.thresholds.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn fractions(&self) -> Vec<f64> {
        self.fractions.clone()
    }

    /// Percent.
    #[wasm_bindgen(getter)]
    pub fn auc(&self) -> f64 {
        self.auc
    }

    /// Percent of errors above the cutoff.
    #[wasm_bindgen(getter, js_name = failureRate)]
    pub fn failure_rate(&self) -> f64 {
        self.failure_rate
    }
}

/// CED over `[0, e_max]` (at most 200 plotted points), AUC and failure rate.
pub fn ced_view(errors: &[f64], e_max: f64) -> Result<CedView, String> {
    let e_max = if e_max > 0.0 { e_max } else { DEFAULT_MAX_ERROR };
    let (auc, failure_rate) = auc_and_fr(errors, e_max).map_err(|e| e.to_string())?;
    let curve = ced(errors, e_max, (AUC_BINS / 5).max(2)).map_err(|e| e.to_string())?;
    Ok(CedView {
        thresholds: curve.thresholds,
        fractions: curve.fractions,
        auc,
        failure_rate,
    })
}

#[wasm_bindgen(js_name = cedCurve)]
pub fn ced_curve(errors: Vec<f64>, e_max: f64) -> Result<CedView, JsError> {
    ced_view(&errors, e_max).map_err(|e| JsError::new(&e))
}
