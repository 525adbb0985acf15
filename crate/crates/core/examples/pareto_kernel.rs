//! Dominance, Pareto fronts and Pareto regret on a small mean matrix.
//!
//! cargo run --example pareto_kernel

use momab::pareto::cumulative_regret;
use momab::{dominates, pareto_front, pareto_regret, MeanMatrix};

fn main() -> momab::Result<()> {
    let means = MeanMatrix::new(vec![
        vec![0.9, 0.2],
        vec![0.2, 0.9],
        vec![0.6, 0.6],
        vec![0.3, 0.3],
        vec![0.55, 0.1],
    ])?;
    println!(
        "(0.6, 0.6) dominates (0.3, 0.3): {}",
        dominates(&[0.6, 0.6], &[0.3, 0.3])?
    );
    println!(
        "(0.9, 0.2) dominates (0.2, 0.9): {}",
        dominates(&[0.9, 0.2], &[0.2, 0.9])?
    );

    let front = pareto_front(means.rows());
    println!("front: {front:?}");
    for arm in 0..means.num_arms() {
        println!(
            "arm {arm} {:?}: regret {:.3}",
            means.row(arm),
            pareto_regret(arm, &means)
        );
    }

    let choices = [3, 4, 2, 0, 1, 2, 3, 2];
    let trace = cumulative_regret(&choices, |_| &means)?;
    println!("choices {choices:?}");
    println!("cumulative regret {:?}", trace.cumulative);
    Ok(())
}
