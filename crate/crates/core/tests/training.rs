//! Long-running training studies: robustness of hardware-aware training
//! against a noise-naive baseline. Quick per-step properties live in the
//! module's unit tests.

use nlimsim::hwat::{hwat_benefit, train_toy, TrainConfig};

/// Nets trained with disturbance injection keep more accuracy under that
/// disturbance than nets trained clean, on paired seeds with paired
/// evaluation noise.
#[test]
fn disturbance_training_beats_the_naive_baseline() {
    let cfg = TrainConfig {
        noise_sigma: 0.1,
        ..TrainConfig::default()
    };
    let rep = hwat_benefit(&cfg, &[303, 505]).unwrap();
    assert!(
        rep.mean_hwat_noisy > rep.mean_naive_noisy,
        "hwat {:.4} vs naive {:.4}",
        rep.mean_hwat_noisy,
        rep.mean_naive_noisy
    );
    for p in &rep.pairs {
        assert!(
            p.hwat_noisy > p.naive_noisy,
            "seed {} regressed: {:.3} vs {:.3}",
            p.seed,
            p.hwat_noisy,
            p.naive_noisy
        );
    }
}

/// Where the disturbance is strong enough to cost real accuracy, the
/// noise-trained arm gives up at most half of what the naive arm loses
/// (mean over paired seeds).
#[test]
fn disturbance_training_halves_the_accuracy_loss() {
    let cfg = TrainConfig {
        noise_sigma: 0.3,
        ..TrainConfig::default()
    };
    let rep = hwat_benefit(&cfg, &[101, 303, 404]).unwrap();
    let n = rep.pairs.len() as f64;
    let hwat_loss: f64 = rep
        .pairs
        .iter()
        .map(|p| (p.hwat_clean - p.hwat_noisy).max(0.0))
        .sum::<f64>()
        / n;
    let naive_loss: f64 = rep
        .pairs
        .iter()
        .map(|p| (p.naive_clean - p.naive_noisy).max(0.0))
        .sum::<f64>()
        / n;
    assert!(
        hwat_loss <= 0.5 * naive_loss,
        "hwat loses {hwat_loss:.3}, naive loses {naive_loss:.3}"
    );
}

/// The robustness gap is not bought with clean accuracy: the noise-trained
/// arm still classifies well without disturbance.
#[test]
fn noise_training_keeps_clean_accuracy_usable() {
    let cfg = TrainConfig {
        noise_sigma: 0.1,
        seed: 404,
        ..TrainConfig::default()
    };
    let run = train_toy(&cfg).unwrap();
    assert!(
        run.final_clean_acc >= 0.90,
        "clean accuracy {} after noisy training",
        run.final_clean_acc
    );
}
