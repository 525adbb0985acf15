//! Monte-Carlo check of the dominance-event concentration bounds.
//!
//! cargo run --release --example concentration_bounds

use momab::experiment::{verify_lemma1, verify_lemma2, Component, Lemma1Config, Lemma2Config};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> momab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let markov = Lemma1Config {
        components: vec![
            Component::Bernoulli { p: 0.3 },
            Component::Exponential { mean: 0.5 },
        ],
        threshold: vec![0.5, 1.0],
    };
    let r = verify_lemma1(&markov, 200_000, &mut rng)?;
    println!(
        "P(X dominates A) = {:.4} <= marginal {:.4} <= Markov {:.4}: {}",
        r.empirical, r.marginal_bound, r.markov_bound, r.holds
    );

    let config = Lemma2Config {
        mu: vec![0.5, 0.4],
        epsilon: vec![0.2, 0.15],
        radius: 0.05,
        n: 50,
    };
    let report = verify_lemma2(&config, 200_000, &mut rng)?;
    for c in &report.checks {
        println!(
            "inequality {}: empirical {:.5} (se {:.5}) vs bound {:.5} -> {}",
            c.inequality, c.empirical, c.stderr, c.bound, c.holds
        );
    }
    Ok(())
}
