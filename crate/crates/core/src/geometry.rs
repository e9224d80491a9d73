//! Landmark-aware cropping and mirroring.

use image::RgbImage;

use crate::error::{Error, Result};
use crate::frame::{sample_bilinear, Frame};
use crate::landmarks::{GeometricTransform, LandmarkSet, Point};

/// Crop margin added on every side of the landmark bounding box, as a
/// fraction of the box size.
pub const DEFAULT_CROP_MARGIN: f64 = 0.2;

/// Transform of the square crop around `lms`, grown by `margin_frac` of the
/// box side on each side and scaled to `out_size x out_size`.
pub fn crop_transform(lms: &LandmarkSet, margin_frac: f64, out_size: usize) -> Result<GeometricTransform> {
    lms.validate()?;
    if !(margin_frac >= 0.0) {
        return Err(Error::Argument(format!(
            "crop margin must be non-negative, got {margin_frac}"
        )));
    }
    if out_size == 0 {
        return Err(Error::Argument("crop output size must be positive".into()));
    }
    let (x0, y0, x1, y1) = lms.bounding_box();
    let (bw, bh) = (x1 - x0, y1 - y0);
    if !(bw > 0.0 && bh > 0.0) {
        return Err(Error::InvalidLandmark(format!(
            "landmark bounding box has zero area ({bw} x {bh})"
        )));
    }
    let side = bw.max(bh) * (1.0 + 2.0 * margin_frac);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let origin = (cx - side / 2.0, cy - side / 2.0);
    let scale = out_size as f64 / side;
    Ok(GeometricTransform {
        scale,
        offset: (-origin.0 * scale, -origin.1 * scale),
        mirrored: false,
        width: out_size,
    })
}

/// Square crop around the landmarks (see [`crop_transform`]), bilinearly
/// resampled to `out_size x out_size`.
///
/// The returned transform maps input landmark coordinates to output ones.
pub fn crop_to_landmarks(
    image: &RgbImage,
    lms: &LandmarkSet,
    margin_frac: f64,
    out_size: usize,
) -> Result<(Frame, LandmarkSet, GeometricTransform)> {
    let transform = crop_transform(lms, margin_frac, out_size)?;
    let mut data = Vec::with_capacity(out_size * out_size * 3);
    for v in 0..out_size {
        for u in 0..out_size {
            let src = transform.invert_point(Point::new(u as f64, v as f64));
            let rgb = sample_bilinear(image, src.x, src.y);
            data.extend(rgb.iter().map(|&c| (c / 127.5 - 1.0).clamp(-1.0, 1.0) as f32));
        }
    }
    let frame = Frame::new(out_size, out_size, data)?;
    Ok((frame, transform.apply(lms), transform))
}

/// Left-right flip of a frame and its landmarks (`x -> W - 1 - x`, markup
/// indices permuted).
pub fn mirror(frame: &Frame, lms: &LandmarkSet) -> (Frame, LandmarkSet) {
    (frame.flipped_horizontally(), lms.mirrored(frame.width()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::tests::ring;
    use image::Rgb;

    fn gradient_image(w: u32, h: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| Rgb([(x * 3 % 256) as u8, (y * 5 % 256) as u8, ((x + y) % 256) as u8]))
    }

    #[test]
    fn filling_square_is_identity() {
        // Landmarks spanning [0, 64] in both axes, centered on a 64 crop.
        let mut lms = ring(32.0, 32.0, 32.0);
        lms.points_mut()[0] = Point::new(0.0, 0.0);
        lms.points_mut()[1] = Point::new(64.0, 64.0);
        let img = gradient_image(64, 64);
        let (frame, out, t) = crop_to_landmarks(&img, &lms, 0.0, 64).unwrap();
        assert!(t.is_identity(), "{t:?}");
        assert_eq!(out, lms);
        let direct = Frame::from_rgb8(&img);
        let diff = frame
            .data()
            .iter()
            .zip(direct.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn crop_then_invert_recovers_landmarks() {
        let lms = ring(70.3, 41.9, 23.4);
        let img = gradient_image(160, 120);
        let (_, out, t) = crop_to_landmarks(&img, &lms, 0.2, 64).unwrap();
        assert!(t.invert(&out).max_abs_diff(&lms) < 1e-6);
    }

    #[test]
    fn output_range_is_normalized() {
        let img = RgbImage::from_fn(50, 50, |x, y| Rgb([if (x + y) % 2 == 0 { 0 } else { 255 }, 255, 0]));
        let (frame, _, _) = crop_to_landmarks(&img, &ring(25.0, 25.0, 12.0), 0.5, 40).unwrap();
        let (lo, hi) = frame.min_max();
        assert!(lo >= -1.0 && hi <= 1.0);
    }

    #[test]
    fn zero_area_box_rejected() {
        let lms = LandmarkSet::new(vec![Point::new(3.0, 3.0); 68]).unwrap();
        let img = gradient_image(16, 16);
        assert!(matches!(
            crop_to_landmarks(&img, &lms, 0.2, 8),
            Err(Error::InvalidLandmark(_))
        ));
    }

    #[test]
    fn mirror_is_an_involution() {
        let frame = Frame::from_rgb8(&gradient_image(17, 9));
        let lms = ring(8.0, 4.0, 3.0);
        let (f1, l1) = mirror(&frame, &lms);
        let (f2, l2) = mirror(&f1, &l1);
        assert_eq!(f2, frame);
        assert!(l2.max_abs_diff(&lms) < 1e-12);
    }
}
