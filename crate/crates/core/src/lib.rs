//! Landmark codec, dataset handling and evaluation metrics for
//! landmark-driven face video generation.
//!
//! Everything here is plain Rust with no tensor backend, so it also builds
//! for `wasm32-unknown-unknown`.

pub mod dataset;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod heatmap;
pub mod landmarks;
pub mod metrics;
pub mod pts;
pub mod synthetic;

pub use dataset::{sample_window, TrainingWindow, VideoClip};
pub use error::{Error, Result};
pub use frame::Frame;
pub use geometry::{crop_to_landmarks, crop_transform, mirror};
pub use heatmap::{decode_heatmap, encode_heatmap, DecodedLandmarks, Heatmap};
pub use landmarks::{interocular_distance, GeometricTransform, LandmarkSet, Point, N_LANDMARKS};
pub use metrics::{auc_and_fr, ced, psnr, ssim, CedCurve, EvalReport};
pub use synthetic::{render_synthetic_clip, SyntheticClip, SyntheticFaceParams};
