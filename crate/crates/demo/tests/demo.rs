use motiongan_core::landmarks::{LandmarkSet, Point};
use motiongan_demo::{ced_view, face_view, CLIP_FRAMES};

fn points(flat: &[f64]) -> LandmarkSet {
    LandmarkSet::new(flat.chunks(2).map(|p| Point::new(p[0], p[1])).collect()).unwrap()
}

#[test]
fn heatmap_decodes_back_to_the_landmarks() {
    for seed in 0..5 {
        let v = face_view(seed, 10, 128, 2.0, 0.5, false).unwrap();
        assert_eq!(v.rgba().len(), 128 * 128 * 4);
        assert_eq!(v.landmarks().len(), 136);
        assert!(v.max_decode_error() <= 0.5 * 2f64.sqrt(), "seed {seed}: {}", v.max_decode_error());
    }
}

#[test]
fn mirrored_view_flips_pixels_and_remaps_points() {
    let size = 96;
    let a = face_view(3, 5, size, 2.0, 0.0, false).unwrap();
    let b = face_view(3, 5, size, 2.0, 0.0, true).unwrap();
    let (pa, pb) = (a.rgba(), b.rgba());
    for y in 0..size {
        for x in 0..size {
            let i = (y * size + x) * 4;
            let j = (y * size + size - 1 - x) * 4;
            assert_eq!(pa[i..i + 4], pb[j..j + 4], "pixel ({x}, {y})");
        }
    }
    assert_eq!(points(&b.landmarks()), points(&a.landmarks()).mirrored(size));
}

#[test]
fn overlay_only_reddens() {
    let plain = face_view(1, 0, 64, 2.0, 0.0, false).unwrap().rgba();
    let lit = face_view(1, 0, 64, 2.0, 1.0, false).unwrap().rgba();
    assert_ne!(plain, lit);
    for (p, l) in plain.chunks(4).zip(lit.chunks(4)) {
        assert!(l[0] >= p[0] && l[1] <= p[1] && l[2] <= p[2]);
    }
}

#[test]
fn rejects_bad_arguments() {
    assert!(face_view(0, 0, 8, 2.0, 0.5, false).is_err());
    assert!(face_view(0, CLIP_FRAMES, 64, 2.0, 0.5, false).is_err());
    assert!(face_view(0, 0, 64, 0.0, 0.5, false).is_err());
    assert!(ced_view(&[], 0.1).is_err());
}

#[test]
fn ced_summary() {
    let v = ced_view(&[0.0; 10], 0.1).unwrap();
    assert_eq!((v.auc(), v.failure_rate()), (100.0, 0.0));
    let errors: Vec<f64> = (0..1000).map(|i| i as f64 * 0.2 / 1000.0).collect();
    let v = ced_view(&errors, 0.1).unwrap();
    assert!((v.failure_rate() - 50.0).abs() < 0.2);
    let f = v.fractions();
    assert!(f.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*v.thresholds().last().unwrap(), 0.1);
    assert_eq!(v.thresholds().len(), f.len());
}
