mod common;

use common::{loss_gradient_checks, FD_TOLERANCE};

#[test]
fn every_loss_matches_central_differences() {
    for seed in 11..=20 {
        let checks = loss_gradient_checks(seed);
        assert!(checks.len() >= 20);
        for (name, err) in checks {
            assert!(err <= FD_TOLERANCE, "{name}: relative error {err:e} (seed {seed})");
        }
    }
}
