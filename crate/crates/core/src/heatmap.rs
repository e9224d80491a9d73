//! Gaussian heatmap encoding of landmark sets.
//!
//! Each of the 68 channels holds an unnormalized Gaussian bump (peak value 1)
//! centered on its landmark. Heatmaps share the spatial size of the frames
//! they are concatenated with.

use crate::error::{Error, Result};
use crate::landmarks::{LandmarkSet, Point, MIRROR_INDEX, N_LANDMARKS};

/// Gaussian std-dev in pixels, used at every image size.
pub const DEFAULT_SIGMA: f64 = 2.0;

/// `68 x H x W` channel-major array; `at(y, x, c)` is the H×W×68 view.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    height: usize,
    width: usize,
    sigma: f64,
    data: Vec<f32>,
}

/// Result of argmax decoding. `degenerate[c]` is set when channel `c` had no
/// usable peak (all zero or constant); its landmark is then `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedLandmarks {
    pub landmarks: LandmarkSet,
    pub degenerate: Vec<bool>,
}

impl DecodedLandmarks {
    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

impl Heatmap {
    pub fn from_data(height: usize, width: usize, sigma: f64, data: Vec<f32>) -> Result<Self> {
        if data.len() != N_LANDMARKS * height * width {
            return Err(Error::Shape(format!(
                "heatmap {height}x{width}x{N_LANDMARKS} needs {} values, got {}",
                N_LANDMARKS * height * width,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            sigma,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Channel-major `[c][y][x]` samples.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn at(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    /// Left-right flip of every channel followed by the markup permutation;
    /// equals the encoding of the mirrored landmark set.
    pub fn flipped_and_permuted(&self) -> Self {
        let n = self.height * self.width;
        let mut data = vec![0.0f32; self.data.len()];
        for c in 0..N_LANDMARKS {
            let src = self.channel(MIRROR_INDEX[c]);
            let dst = &mut data[c * n..(c + 1) * n];
            for y in 0..self.height {
                for x in 0..self.width {
                    dst[y * self.width + x] = src[y * self.width + (self.width - 1 - x)];
                }
            }
        }
        Self { data, ..*self }
    }
}

/// Renders `exp(-((x - x_c)^2 + (y - y_c)^2) / (2 sigma^2))` for every channel.
pub fn encode_heatmap(lms: &LandmarkSet, height: usize, width: usize, sigma: f64) -> Result<Heatmap> {
    if height == 0 || width == 0 {
        return Err(Error::Argument(format!(
            "heatmap size must be positive, got {height}x{width}"
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Argument(format!("sigma must be positive, got {sigma}")));
    }
    lms.validate()?;

    let inv = 1.0 / (2.0 * sigma * sigma);
    let n = height * width;
    let mut data = vec![0.0f32; N_LANDMARKS * n];
    let mut gx = vec![0.0f64; width];
    let mut gy = vec![0.0f64; height];
    for (c, p) in lms.points().iter().enumerate() {
        // The 2D Gaussian factorizes into row and column profiles.
        for (x, g) in gx.iter_mut().enumerate() {
            let d = x as f64 - p.x;
            *g = (-d * d * inv).exp();
        }
        for (y, g) in gy.iter_mut().enumerate() {
            let d = y as f64 - p.y;
            *g = (-d * d * inv).exp();
        }
        let chan = &mut data[c * n..(c + 1) * n];
        for (y, row) in chan.chunks_exact_mut(width).enumerate() {
            for (v, g) in row.iter_mut().zip(&gx) {
                *v = (gy[y] * g) as f32;
            }
        }
    }
    Ok(Heatmap {
        height,
        width,
        sigma,
        data,
    })
}

/// Per-channel argmax decoding; ties resolve to the first pixel in row-major order.
pub fn decode_heatmap(hm: &Heatmap) -> DecodedLandmarks {
    decode_channels(hm.data(), hm.height(), hm.width())
}

/// Argmax decoding over a raw channel-major `68 x H x W` buffer.
pub fn decode_channels(data: &[f32], height: usize, width: usize) -> DecodedLandmarks {
    let n = height * width;
    assert_eq!(data.len(), N_LANDMARKS * n, "decode_channels: buffer size");
    let mut points = Vec::with_capacity(N_LANDMARKS);
    let mut degenerate = Vec::with_capacity(N_LANDMARKS);
    for chan in data.chunks_exact(n) {
        let mut best = 0usize;
        let mut best_val = chan[0];
        let mut lowest = chan[0];
        for (i, &v) in chan.iter().enumerate().skip(1) {
            if v > best_val {
                best_val = v;
                best = i;
            }
            lowest = lowest.min(v);
        }
        let flat = !(best_val > lowest) || !best_val.is_finite();
        if flat {
            points.push(Point::new(0.0, 0.0));
        } else {
            points.push(Point::new((best % width) as f64, (best / width) as f64));
        }
        degenerate.push(flat);
    }
    DecodedLandmarks {
        landmarks: LandmarkSet::new(points).expect("68 channels"),
        degenerate,
    }
}
