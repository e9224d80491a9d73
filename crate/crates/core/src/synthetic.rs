//! Procedural schematic faces with exact 68-point ground truth.
//!
//! A face is a filled head ellipse with a jaw outline, two eyes whose lids
//! follow a blink schedule, brows, a nose, and a mouth whose opening follows
//! a raised-cosine cycle. The landmarks are the geometry the renderer draws,
//! so they are exact by construction.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::landmarks::{LandmarkSet, Point, N_LANDMARKS};

/// Geometry and appearance of one synthetic identity. Lengths and positions
/// are fractions of the canvas side, so the same identity renders at any size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFaceParams {
    pub head_center: (f64, f64),
    /// Semi-axes of the head ellipse.
    pub head_size: (f64, f64),
    /// Distance between the outer eye corners.
    pub eye_spacing: f64,
    /// Largest inner-lip opening.
    pub mouth_amplitude: f64,
    /// Mouth cycles per frame.
    pub mouth_frequency: f64,
    /// Frames at which both eyes are fully closed; neighbouring frames are half closed.
    pub blink_frames: Vec<usize>,
    pub translation_amplitude: (f64, f64),
    /// Head-path cycles per frame.
    pub translation_frequency: f64,
    pub color_seed: u64,
}

impl Default for SyntheticFaceParams {
    fn default() -> Self {
        Self {
            head_center: (0.5, 0.5),
            head_size: (0.38, 0.42),
            eye_spacing: 0.58,
            mouth_amplitude: 0.08,
            mouth_frequency: 0.1,
            blink_frames: vec![],
            translation_amplitude: (0.02, 0.015),
            translation_frequency: 0.05,
            color_seed: 0,
        }
    }
}

impl SyntheticFaceParams {
    /// A random identity whose geometry stays inside the canvas for any clip length.
    pub fn random(rng: &mut impl Rng, n_frames: usize) -> Self {
        let rx = rng.gen_range(0.34..0.39);
        let ry = rng.gen_range(0.39..0.43);
        let n_blinks = if n_frames > 4 { rng.gen_range(0..=n_frames / 20 + 1) } else { 0 };
        let mut blink_frames: Vec<usize> = (0..n_blinks).map(|_| rng.gen_range(0..n_frames)).collect();
        blink_frames.sort_unstable();
        blink_frames.dedup();
        Self {
            head_center: (rng.gen_range(0.48..0.52), rng.gen_range(0.48..0.52)),
            head_size: (rx, ry),
            eye_spacing: rx * rng.gen_range(1.45..1.6),
            mouth_amplitude: rng.gen_range(0.03..0.1),
            mouth_frequency: rng.gen_range(0.04..0.15),
            blink_frames,
            translation_amplitude: (rng.gen_range(0.0..0.03), rng.gen_range(0.0..0.02)),
            translation_frequency: rng.gen_range(0.01..0.06),
            color_seed: rng.gen(),
        }
    }

    /// Outer-corner eye distance in pixels on a `size` canvas.
    pub fn eye_spacing_px(&self, size: usize) -> f64 {
        self.eye_spacing * size as f64
    }

    fn eye_openness(&self, frame: usize) -> f64 {
        if self.blink_frames.contains(&frame) {
            0.0
        } else if self
            .blink_frames
            .iter()
            .any(|&b| b.abs_diff(frame) == 1)
        {
            0.5
        } else {
            1.0
        }
    }
}

/// Motion phases drawn from the clip seed.
#[derive(Debug, Clone, Copy)]
struct Phases {
    x: f64,
    y: f64,
    mouth: f64,
}

impl Phases {
    fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            x: rng.gen_range(0.0..TAU),
            y: rng.gen_range(0.0..TAU),
            mouth: rng.gen_range(0.0..TAU),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Palette {
    background: [f64; 3],
    skin: [f64; 3],
    outline: [f64; 3],
    brow: [f64; 3],
    sclera: [f64; 3],
    iris: [f64; 3],
    lip: [f64; 3],
    mouth: [f64; 3],
}

impl Palette {
    fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut color = |lo: f64, hi: f64| -> [f64; 3] {
            [rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi)]
        };
        let background = color(-0.9, 0.2);
        let skin = color(-0.1, 0.9);
        let brow = color(-1.0, -0.4);
        let iris = color(-0.9, 0.0);
        let lip = {
            let base = color(-0.2, 0.5);
            [(base[0] + 0.5).min(1.0), base[1] - 0.4, base[2] - 0.3]
        };
        Self {
            background,
            skin,
            outline: skin.map(|v| v - 0.6),
            brow,
            sclera: [0.95, 0.95, 0.92],
            iris,
            lip,
            mouth: [-0.85, -0.95, -0.9],
        }
    }
}

/// Per-frame face layout in pixels.
struct Layout {
    center: Point,
    radii: (f64, f64),
    landmarks: Vec<Point>,
    eye_centers: [Point; 2],
    eye_radii: (f64, f64),
}

fn layout(params: &SyntheticFaceParams, phases: Phases, frame: usize, size: usize) -> Layout {
    let s = size as f64;
    let t = frame as f64;
    let w = TAU * params.translation_frequency * t;
    let cx = params.head_center.0 * s + params.translation_amplitude.0 * s * (w + phases.x).sin();
    let cy = params.head_center.1 * s + params.translation_amplitude.1 * s * (w + phases.y).sin();
    let (rx, ry) = (params.head_size.0 * s, params.head_size.1 * s);

    let mut pts = vec![Point::default(); N_LANDMARKS];

    // jaw 1..17 along the lower half of the head ellipse, image-left to image-right
    for i in 0..17 {
        let th = PI - i as f64 * PI / 16.0;
        pts[i] = Point::new(cx + rx * th.cos(), cy + ry * th.sin());
    }

    // eyes 37..48
    let es = params.eye_spacing * s;
    let ew = 0.17 * es;
    let eh = 0.55 * ew * params.eye_openness(frame);
    let eye_y = cy - 0.15 * ry;
    let left_eye = Point::new(cx - es / 2.0 + ew, eye_y);
    let right_eye = Point::new(cx + es / 2.0 - ew, eye_y);
    let angles = [PI, 2.0 * PI / 3.0, PI / 3.0, 0.0, -PI / 3.0, -2.0 * PI / 3.0];
    for (k, &a) in angles.iter().enumerate() {
        let dy = -eh * a.sin();
        pts[36 + k] = Point::new(left_eye.x + ew * a.cos(), left_eye.y + dy);
        pts[42 + k] = Point::new(right_eye.x + ew * a.cos(), right_eye.y + dy);
    }

    // brows 18..27: arcs over the eyes
    let brow_y = cy - 0.4 * ry;
    let lift = 0.06 * ry;
    for k in 0..5 {
        let f = k as f64 / 4.0;
        let arc = lift * (PI * f).sin();
        let lx = (left_eye.x - 1.1 * ew) + f * 2.0 * ew;
        pts[17 + k] = Point::new(lx, brow_y - arc);
        pts[26 - k] = Point::new(2.0 * cx - lx, brow_y - arc);
    }

    // nose bridge 28..31 and lower nose 32..36
    for k in 0..4 {
        pts[27 + k] = Point::new(cx, eye_y + 0.05 * ry + k as f64 * 0.1 * ry);
    }
    let nose_w = 0.16 * rx;
    let nose_y = pts[30].y + 0.06 * ry;
    for k in 0..5 {
        let f = k as f64 / 4.0 - 0.5;
        pts[31 + k] = Point::new(cx + 2.0 * f * nose_w, nose_y + 0.04 * ry * (1.0 - (2.0 * f).powi(2)));
    }

    // mouth 49..68
    let opening = params.mouth_amplitude * s * 0.5 * (1.0 - (TAU * params.mouth_frequency * t + phases.mouth).cos());
    let my = cy + 0.55 * ry;
    let mw = 0.3 * rx;
    let lip = 0.06 * ry;
    for k in 0..12 {
        let a = PI - k as f64 * PI / 6.0;
        let half = lip + opening / 2.0;
        pts[48 + k] = Point::new(cx + mw * a.cos(), my - half * a.sin());
    }
    let iw = 0.75 * mw;
    let inner = [PI, 2.0 * PI / 3.0, PI / 2.0, PI / 3.0, 0.0, -PI / 3.0, -PI / 2.0, -2.0 * PI / 3.0];
    for (k, &a) in inner.iter().enumerate() {
        pts[60 + k] = Point::new(cx + iw * a.cos(), my - opening / 2.0 * a.sin());
    }

    Layout {
        center: Point::new(cx, cy),
        radii: (rx, ry),
        landmarks: pts,
        eye_centers: [left_eye, right_eye],
        eye_radii: (ew, eh),
    }
}

fn inside_polygon(poly: &[Point], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(&Point::new(a.x + t * dx, a.y + t * dy))
}

fn near_polyline(points: &[Point], p: Point, width: f64) -> bool {
    points
        .windows(2)
        .any(|w| distance_to_segment(p, w[0], w[1]) < width)
}

const SUPERSAMPLE: usize = 3;

fn shade(layout: &Layout, palette: &Palette, p: Point, unit: f64) -> [f64; 3] {
    let lm = &layout.landmarks;
    let (rx, ry) = layout.radii;
    let (ux, uy) = ((p.x - layout.center.x) / rx, (p.y - layout.center.y) / ry);
    let r = (ux * ux + uy * uy).sqrt();
    if r > 1.0 {
        return palette.background;
    }
    // jaw outline: a band just inside the lower half of the head ellipse
    if p.y >= layout.center.y && r > 1.0 - 1.2 * unit / rx.min(ry) {
        return palette.outline;
    }
    if near_polyline(&lm[17..22], p, 0.9 * unit) || near_polyline(&lm[22..27], p, 0.9 * unit) {
        return palette.brow;
    }
    let (ew, eh) = layout.eye_radii;
    for (e, c) in layout.eye_centers.iter().enumerate() {
        if eh > 0.0 {
            let (ex, ey) = ((p.x - c.x) / ew, (p.y - c.y) / eh);
            if ex * ex + ey * ey <= 1.0 {
                let iris = eh.min(0.45 * ew);
                return if p.distance(c) <= iris { palette.iris } else { palette.sclera };
            }
        } else {
            let corners = if e == 0 { (lm[36], lm[39]) } else { (lm[42], lm[45]) };
            if distance_to_segment(p, corners.0, corners.1) < 0.6 * unit {
                return palette.brow;
            }
        }
    }
    if near_polyline(&lm[27..31], p, 0.6 * unit) || near_polyline(&lm[31..36], p, 0.6 * unit) {
        return palette.outline;
    }
    if inside_polygon(&lm[48..60], p.x, p.y) {
        if inside_polygon(&lm[60..68], p.x, p.y) {
            return palette.mouth;
        }
        return palette.lip;
    }
    palette.skin
}

fn render(layout: &Layout, palette: &Palette, size: usize) -> Frame {
    let unit = size as f64 / 64.0;
    let mut data = Vec::with_capacity(size * size * 3);
    let n = (SUPERSAMPLE * SUPERSAMPLE) as f64;
    for y in 0..size {
        for x in 0..size {
            let mut acc = [0.0; 3];
            for sy in 0..SUPERSAMPLE {
                for sx in 0..SUPERSAMPLE {
                    let off = |k: usize| (k as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5;
                    let p = Point::new(x as f64 + off(sx), y as f64 + off(sy));
                    let c = shade(layout, palette, p, unit);
                    for k in 0..3 {
                        acc[k] += c[k];
                    }
                }
            }
            data.extend(acc.iter().map(|&v| (v / n).clamp(-1.0, 1.0) as f32));
        }
    }
    Frame::new(size, size, data).expect("rendered frame has canvas size")
}

/// One rendered clip with its exact landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticClip {
    pub frames: Vec<Frame>,
    pub landmarks: Vec<LandmarkSet>,
}

/// Renders `n_frames` frames of the face described by `params` on a
/// `size x size` canvas. Motion phases come from `seed`; output is a pure
/// function of the arguments.
pub fn render_synthetic_clip(
    params: &SyntheticFaceParams,
    n_frames: usize,
    size: usize,
    seed: u64,
) -> Result<SyntheticClip> {
    if n_frames == 0 {
        return Err(Error::Parameter("clip needs at least one frame".into()));
    }
    if size < 8 {
        return Err(Error::Parameter(format!("canvas size {size} is too small")));
    }
    let phases = Phases::from_seed(seed);
    let palette = Palette::from_seed(params.color_seed);
    let limit = size as f64 - 1.0;
    let mut frames = Vec::with_capacity(n_frames);
    let mut landmarks = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let lay = layout(params, phases, t, size);
        let (rx, ry) = lay.radii;
        let head_ok = lay.center.x - rx >= 0.0
            && lay.center.x + rx <= limit
            && lay.center.y - ry >= 0.0
            && lay.center.y + ry <= limit;
        let marks_ok = lay
            .landmarks
            .iter()
            .all(|p| p.x >= 0.0 && p.x <= limit && p.y >= 0.0 && p.y <= limit);
        if !head_ok || !marks_ok {
            return Err(Error::Parameter(format!(
                "face geometry leaves the {size}x{size} canvas at frame {t}"
            )));
        }
        frames.push(render(&lay, &palette, size));
        landmarks.push(LandmarkSet::new(lay.landmarks)?);
    }
    Ok(SyntheticClip { frames, landmarks })
}
