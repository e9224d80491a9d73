//! The 68-point face markup and the geometry that acts on it.
//!
//! Coordinates are pixel units with the origin at the center of the top-left
//! pixel, x growing rightward and y downward. Indices are 0-based here; the
//! familiar 1-based markup numbers appear only in comments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_LANDMARKS: usize = 68;

/// Outer eye corners (markup points 37 and 46).
pub const LEFT_OUTER_EYE_CORNER: usize = 36;
pub const RIGHT_OUTER_EYE_CORNER: usize = 45;

/// Nose tip (markup point 31), which lies on the facial midline.
pub const NOSE_TIP: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Left-right correspondence of the 68-point markup: `MIRROR_INDEX[i]` is the
/// index that point `i` becomes after a horizontal flip.
pub const MIRROR_INDEX: [usize; N_LANDMARKS] = mirror_index();

const fn mirror_index() -> [usize; N_LANDMARKS] {
    let mut map = [0usize; N_LANDMARKS];
    let mut i = 0;
    while i < N_LANDMARKS {
        map[i] = i;
        i += 1;
    }
    // (a, b) pairs, 0-based.
    const PAIRS: [(usize, usize); 29] = [
        // jaw 1..17
        (0, 16),
        (1, 15),
        (2, 14),
        (3, 13),
        (4, 12),
        (5, 11),
        (6, 10),
        (7, 9),
        // brows 18..27
        (17, 26),
        (18, 25),
        (19, 24),
        (20, 23),
        (21, 22),
        // lower nose 32..36
        (31, 35),
        (32, 34),
        // eyes 37..48
        (36, 45),
        (37, 44),
        (38, 43),
        (39, 42),
        (40, 47),
        (41, 46),
        // outer lip 49..60
        (48, 54),
        (49, 53),
        (50, 52),
        (55, 59),
        (56, 58),
        // inner lip 61..68
        (60, 64),
        (61, 63),
        (65, 67),
    ];
    let mut k = 0;
    while k < PAIRS.len() {
        let (a, b) = PAIRS[k];
        map[a] = b;
        map[b] = a;
        k += 1;
    }
    map
}

/// An ordered set of exactly 68 landmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StructuredLandmarks", into = "StructuredLandmarks")]
pub struct LandmarkSet {
    points: Vec<Point>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() != N_LANDMARKS {
            return Err(Error::InvalidLandmark(format!(
                "expected {N_LANDMARKS} points, got {}",
                points.len()
            )));
        }
        Ok(Self { points })
    }

    pub fn from_xy(xy: &[[f64; 2]]) -> Result<Self> {
        Self::new(xy.iter().map(|&[x, y]| Point::new(x, y)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn points_mut(&mut self) -> &mut [Point] {
        &mut self.points
    }

    pub fn get(&self, index: usize) -> Point {
        self.points[index]
    }

    /// Fails on the first non-finite coordinate.
    pub fn validate(&self) -> Result<()> {
        match self.points.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(Error::InvalidLandmark(format!(
                "point {i} has non-finite coordinates ({}, {})",
                self.points[i].x, self.points[i].y
            ))),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Self {
        Self {
            points: self.points.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        self.map(|p| Point::new(p.x + dx, p.y + dy))
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|p| Point::new(p.x * factor, p.y * factor))
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        )
    }

    /// Horizontal flip about the center of a `width`-pixel image, with the
    /// point order permuted so every index keeps its anatomical meaning.
    pub fn mirrored(&self, width: usize) -> Self {
        let axis = width as f64 - 1.0;
        let points = (0..N_LANDMARKS)
            .map(|i| {
                let p = self.points[MIRROR_INDEX[i]];
                Point::new(axis - p.x, p.y)
            })
            .collect();
        Self { points }
    }

    /// Largest per-coordinate absolute difference.
    pub fn max_abs_diff(&self, other: &LandmarkSet) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a.x - b.x).abs().max((a.y - b.y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Distance between the outer eye corners.
pub fn interocular_distance(lms: &LandmarkSet) -> Result<f64> {
    let d = lms
        .get(LEFT_OUTER_EYE_CORNER)
        .distance(&lms.get(RIGHT_OUTER_EYE_CORNER));
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::DegenerateNormalizer(format!(
            "interocular distance is {d}"
        )));
    }
    Ok(d)
}

/// Similarity transform recorded by cropping and mirroring, so landmarks can
/// be carried into and out of generated-frame coordinates.
///
/// Forward: `p' = p * scale + offset`, followed by a horizontal flip about
/// the center of a `width`-pixel frame (with index permutation) when
/// `mirrored` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricTransform {
    pub scale: f64,
    pub offset: (f64, f64),
    pub mirrored: bool,
    pub width: usize,
}

impl GeometricTransform {
    pub fn identity(width: usize) -> Self {
        Self {
            scale: 1.0,
            offset: (0.0, 0.0),
            mirrored: false,
            width,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.offset == (0.0, 0.0) && !self.mirrored
    }

    pub fn apply_point(&self, p: Point) -> Point {
        let q = Point::new(p.x * self.scale + self.offset.0, p.y * self.scale + self.offset.1);
        if self.mirrored {
            Point::new(self.width as f64 - 1.0 - q.x, q.y)
        } else {
            q
        }
    }

    pub fn invert_point(&self, p: Point) -> Point {
        let q = if self.mirrored {
            Point::new(self.width as f64 - 1.0 - p.x, p.y)
        } else {
            p
        };
        Point::new(
            (q.x - self.offset.0) / self.scale,
            (q.y - self.offset.1) / self.scale,
        )
    }

    pub fn apply(&self, lms: &LandmarkSet) -> LandmarkSet {
        let moved = lms.map(|p| Point::new(p.x * self.scale + self.offset.0, p.y * self.scale + self.offset.1));
        if self.mirrored {
            moved.mirrored(self.width)
        } else {
            moved
        }
    }

    pub fn invert(&self, lms: &LandmarkSet) -> LandmarkSet {
        let unflipped = if self.mirrored {
            lms.mirrored(self.width)
        } else {
            lms.clone()
        };
        unflipped.map(|p| {
            Point::new(
                (p.x - self.offset.0) / self.scale,
                (p.y - self.offset.1) / self.scale,
            )
        })
    }

    /// The same transform followed by a horizontal flip.
    pub fn then_mirror(&self) -> Self {
        Self {
            mirrored: !self.mirrored,
            ..*self
        }
    }
}

/// Serialized form of a [`LandmarkSet`]: `{"n_points": 68, "points": [[x, y], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredLandmarks {
    pub n_points: usize,
    pub points: Vec<[f64; 2]>,
}

impl From<LandmarkSet> for StructuredLandmarks {
    fn from(lms: LandmarkSet) -> Self {
        Self {
            n_points: N_LANDMARKS,
            points: lms.points.iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

impl TryFrom<StructuredLandmarks> for LandmarkSet {
    type Error = Error;

    fn try_from(value: StructuredLandmarks) -> Result<Self> {
        if value.n_points != value.points.len() {
            return Err(Error::InvalidLandmark(format!(
                "n_points is {} but {} points are listed",
                value.n_points,
                value.points.len()
            )));
        }
        LandmarkSet::from_xy(&value.points)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn ring(cx: f64, cy: f64, r: f64) -> LandmarkSet {
        let pts = (0..N_LANDMARKS)
            .map(|i| {
                let a = i as f64 / N_LANDMARKS as f64 * std::f64::consts::TAU;
                Point::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        LandmarkSet::new(pts).unwrap()
    }

    #[test]
    fn mirror_index_is_an_involution() {
        for i in 0..N_LANDMARKS {
            assert_eq!(MIRROR_INDEX[MIRROR_INDEX[i]], i);
        }
        // midline points stay put
        for i in [8, 27, 28, 29, 30, 33, 51, 57, 62, 66] {
            assert_eq!(MIRROR_INDEX[i], i, "point {i}");
        }
    }

    #[test]
    fn wrong_point_count_is_rejected() {
        assert!(matches!(
            LandmarkSet::new(vec![Point::default(); 67]),
            Err(Error::InvalidLandmark(_))
        ));
    }

    #[test]
    fn mirror_twice_is_identity() {
        let lms = ring(20.3, 31.7, 9.1);
        assert!(lms.mirrored(64).mirrored(64).max_abs_diff(&lms) < 1e-12);
    }

    #[test]
    fn nose_tip_maps_to_itself() {
        let lms = ring(20.0, 30.0, 10.0);
        let m = lms.mirrored(64);
        let before = lms.get(NOSE_TIP);
        let after = m.get(NOSE_TIP);
        assert_eq!(after.x, 63.0 - before.x);
        assert_eq!(after.y, before.y);
    }

    #[test]
    fn interocular_horizontal() {
        let mut lms = ring(64.0, 64.0, 10.0);
        lms.points_mut()[LEFT_OUTER_EYE_CORNER] = Point::new(40.0, 60.0);
        lms.points_mut()[RIGHT_OUTER_EYE_CORNER] = Point::new(88.0, 60.0);
        assert_eq!(interocular_distance(&lms).unwrap(), 48.0);
    }

    #[test]
    fn interocular_coincident_points_fail() {
        let lms = LandmarkSet::new(vec![Point::new(5.0, 5.0); N_LANDMARKS]).unwrap();
        assert!(matches!(
            interocular_distance(&lms),
            Err(Error::DegenerateNormalizer(_))
        ));
    }

    #[test]
    fn transform_round_trip() {
        let lms = ring(40.0, 50.0, 17.0);
        let t = GeometricTransform {
            scale: 0.73,
            offset: (-11.5, 3.25),
            mirrored: true,
            width: 64,
        };
        let back = t.invert(&t.apply(&lms));
        assert!(back.max_abs_diff(&lms) < 1e-9);
        let p = Point::new(3.0, 4.0);
        let q = t.invert_point(t.apply_point(p));
        assert!(q.distance(&p) < 1e-12);
    }

    #[test]
    fn structured_json_uses_exact_field_names() {
        let lms = ring(1.0, 2.0, 3.0);
        let text = serde_json::to_string(&lms).unwrap();
        assert!(text.starts_with("{\"n_points\":68,\"points\":[["));
        let back: LandmarkSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, lms);
        let bad = r#"{"n_points": 2, "points": [[0,0],[1,1]]}"#;
        assert!(serde_json::from_str::<LandmarkSet>(bad).is_err());
    }
}
