use motiongan_core::heatmap::{decode_heatmap, encode_heatmap, DEFAULT_SIGMA};
use motiongan_core::landmarks::{LandmarkSet, Point, MIRROR_INDEX, N_LANDMARKS};
use motiongan_core::synthetic::{render_synthetic_clip, SyntheticFaceParams};
use motiongan_core::{interocular_distance, mirror, Frame};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_interior(rng: &mut impl Rng, size: usize, margin: f64) -> LandmarkSet {
    let hi = size as f64 - 1.0 - margin;
    let pts = (0..N_LANDMARKS)
        .map(|_| Point::new(rng.gen_range(margin..hi), rng.gen_range(margin..hi)))
        .collect();
    LandmarkSet::new(pts).unwrap()
}

#[test]
fn round_trip_100_sets_at_128() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sigma = 2.0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let lms = random_interior(&mut rng, 128, 3.0 * sigma);
        let hm = encode_heatmap(&lms, 128, 128, sigma).unwrap();
        let dec = decode_heatmap(&hm);
        assert!(!dec.any_degenerate());
        worst = worst.max(dec.landmarks.max_abs_diff(&lms));
    }
    assert!(worst <= 0.5, "max decode error {worst}");
}

#[test]
fn far_outside_landmark_has_negligible_channel() {
    let mut pts = vec![Point::new(32.0, 32.0); N_LANDMARKS];
    pts[5] = Point::new(-100.0, -100.0);
    let hm = encode_heatmap(&LandmarkSet::new(pts).unwrap(), 64, 64, 2.0).unwrap();
    let max = hm.channel(5).iter().cloned().fold(0.0f32, f32::max) as f64;
    // nearest pixel (0, 0) is 100 * sqrt(2) away
    let analytic = (-(2.0 * 100.0f64 * 100.0) / (2.0 * 4.0)).exp();
    assert!(max <= analytic.max(f32::MIN_POSITIVE as f64) && max < 1e-10);
}

#[test]
fn peak_on_pixel_center_is_one() {
    let lms = LandmarkSet::new(vec![Point::new(17.0, 40.0); N_LANDMARKS]).unwrap();
    let hm = encode_heatmap(&lms, 64, 64, DEFAULT_SIGMA).unwrap();
    assert!((hm.at(40, 17, 0) as f64 - 1.0).abs() < 1e-6);
}

#[test]
fn equal_peaks_resolve_row_major() {
    let mut data = vec![0.0f32; N_LANDMARKS * 16 * 16];
    data[3 * 16 + 3] = 1.0;
    data[10 * 16 + 10] = 1.0;
    let dec = motiongan_core::heatmap::decode_channels(&data, 16, 16);
    assert_eq!(dec.landmarks.get(0), Point::new(3.0, 3.0));
    assert!(!dec.degenerate[0]);
    assert!(dec.degenerate[1]);
    assert_eq!(dec.landmarks.get(1), Point::new(0.0, 0.0));
}

#[test]
fn mirror_table_matches_markup() {
    // 1-based pairs of the 68-point markup
    let pairs = [
        (1, 17), (2, 16), (3, 15), (4, 14), (5, 13), (6, 12), (7, 11), (8, 10),
        (18, 27), (19, 26), (20, 25), (21, 24), (22, 23),
        (32, 36), (33, 35),
        (37, 46), (38, 45), (39, 44), (40, 43), (41, 48), (42, 47),
        (49, 55), (50, 54), (51, 53), (56, 60), (57, 59),
        (61, 65), (62, 64), (66, 68),
    ];
    let mut expected: Vec<usize> = (0..N_LANDMARKS).collect();
    for (a, b) in pairs {
        expected[a - 1] = b - 1;
        expected[b - 1] = a - 1;
    }
    assert_eq!(MIRROR_INDEX.to_vec(), expected);
    for i in [9, 28, 29, 30, 31, 34, 52, 58, 63, 67] {
        assert_eq!(MIRROR_INDEX[i - 1], i - 1, "midline point {i}");
    }
}

#[test]
fn mirror_involution_exact_on_pixel_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts = (0..N_LANDMARKS)
        .map(|_| Point::new(rng.gen_range(0..256) as f64 / 4.0, rng.gen_range(0..256) as f64 / 4.0))
        .collect();
    let lms = LandmarkSet::new(pts).unwrap();
    let frame = Frame::new(64, 64, (0..64 * 64 * 3).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let (f1, l1) = mirror(&frame, &lms);
    let (f2, l2) = mirror(&f1, &l1);
    assert_eq!(f2, frame);
    assert_eq!(l2, lms);
}

#[test]
fn synthetic_interocular_is_declared_spacing() {
    let params = SyntheticFaceParams {
        translation_amplitude: (0.0, 0.0),
        ..Default::default()
    };
    let clip = render_synthetic_clip(&params, 5, 64, 9).unwrap();
    for lms in &clip.landmarks {
        let d = interocular_distance(lms).unwrap();
        assert!((d - params.eye_spacing_px(64)).abs() < 1e-9, "{d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encode_commutes_with_mirror(seed in any::<u64>(), size in 16usize..48, sigma in 0.7f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lms = random_interior(&mut rng, size, 0.0);
        let frame = Frame::filled(size, size, 0.0);
        let (_, mirrored) = mirror(&frame, &lms);
        let a = encode_heatmap(&mirrored, size, size, sigma).unwrap();
        let b = encode_heatmap(&lms, size, size, sigma).unwrap().flipped_and_permuted();
        let diff = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0f32, f32::max);
        prop_assert!(diff <= 1e-6, "diff {}", diff);
    }

    #[test]
    fn round_trip_within_half_pixel(seed in any::<u64>(), sigma in 0.8f64..3.0) {
        let size = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lms = random_interior(&mut rng, size, 3.0 * sigma);
        let dec = decode_heatmap(&encode_heatmap(&lms, size, size, sigma).unwrap());
        prop_assert!(dec.landmarks.max_abs_diff(&lms) <= 0.5);
    }

    #[test]
    fn heatmap_values_in_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..N_LANDMARKS).map(|_| Point::new(rng.gen_range(-40.0..70.0), rng.gen_range(-40.0..70.0))).collect();
        let hm = encode_heatmap(&LandmarkSet::new(pts).unwrap(), 32, 32, 2.0).unwrap();
        prop_assert!(hm.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
