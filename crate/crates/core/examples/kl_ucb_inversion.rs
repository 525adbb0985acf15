//! Divergences, their upper-confidence inversion and the admissibility check.
//!
//! cargo run --example kl_ucb_inversion

use momab::divergence::{kl_bernoulli, verify_semi_distance, Divergence};

fn main() -> momab::Result<()> {
    println!("kl(0.5, 0.75) = {:.7}", kl_bernoulli(0.5, 0.75));
    println!("kl(0.75, 0.5) = {:.7}", kl_bernoulli(0.75, 0.5));

    let (p_hat, pulls) = (0.3, 40.0);
    for t in [10usize, 100, 1000, 10_000] {
        let delta = (t as f64).ln() / pulls;
        let kl = Divergence::KlBernoulli.ucb(p_hat, delta)?;
        let quad = Divergence::Quadratic.ucb(p_hat, delta)?;
        println!("t = {t:>5}: kl index {kl:.4}, quadratic index {quad:.4}");
    }

    let mu_hat = [0.2, 0.7, 0.95];
    let nu = [0.3, 0.6, 0.9];
    println!(
        "max-over-objectives kl({mu_hat:?}, {nu:?}) = {:.4}",
        Divergence::KlBernoulli.max_over(&mu_hat, &nu)?
    );

    for d in Divergence::ALL {
        let violations = verify_semi_distance(&d, 0.01)?;
        println!(
            "{}: {} violations on a 0.01 grid",
            d.name(),
            violations.len()
        );
    }
    // a squared distance that is not dominated by kl near the diagonal
    let too_big = |p: f64, q: f64| 10.0 * (p - q) * (p - q);
    let violations = verify_semi_distance(&too_big, 0.01)?;
    println!(
        "10 (p - q)^2: {} violations, first {:?}",
        violations.len(),
        violations.first()
    );
    Ok(())
}
