//! The restarted Bayesian change-point detector on Bernoulli streams.
//!
//! cargo run --release --example change_detector

use momab::change_detection::{
    change_trial, empirical_false_alarm_rate, ChangeDetector, DelayOutcome, Rbocd, RbocdConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> momab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut detector = Rbocd::new(RbocdConfig::new(0.01))?;
    for t in 1..=600 {
        let p = if t <= 300 { 0.8 } else { 0.3 };
        let x = if rng.random_bool(p) { 1.0 } else { 0.0 };
        if detector.update(x) {
            println!("alarm at sample {t} (change after sample 300)");
        }
    }

    for delta in [1e-3, 1e-2] {
        let report = empirical_false_alarm_rate(RbocdConfig::new(delta), 1000, 200, 1)?;
        println!(
            "delta {delta}: {:.3} false alarms per 1000 samples (bound {})",
            report.mean_alarms, report.bound
        );
    }

    for gap in [0.2, 0.4] {
        let mut delays = Vec::new();
        for _ in 0..100 {
            if let DelayOutcome::Detected(d) =
                change_trial(RbocdConfig::new(0.01), 0.3, 0.3 + gap, 300, 5000, &mut rng)?
            {
                delays.push(d as f64);
            }
        }
        let mean = delays.iter().sum::<f64>() / delays.len() as f64;
        println!(
            "gap {gap}: detected {}/100, mean delay {mean:.1}",
            delays.len()
        );
    }
    Ok(())
}
