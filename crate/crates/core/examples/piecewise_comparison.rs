//! Restarted Pareto-klUCB against the sliding-window and discounted
//! baselines on the built-in piecewise-stationary bank. The baselines'
//! window and discount are grid-searched.
//!
//! cargo run --release --example piecewise_comparison [replications]

use momab::experiment::{run_experiment, EnvironmentConfig, ExperimentConfig, PolicySpec};

fn main() -> momab::Result<()> {
    let replications = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("replications must be an integer"))
        .unwrap_or(20);
    let mut config = ExperimentConfig::new(
        EnvironmentConfig::Synthetic,
        vec![
            PolicySpec::Oracle,
            PolicySpec::rbocd(),
            PolicySpec::sliding_window(None),
            PolicySpec::discounted(None),
            PolicySpec::ParetoUcb {
                divergence: Default::default(),
                exponent: 0.0,
            },
        ],
    );
    config.replications = replications;
    config.breakpoints_known = true;
    let result = run_experiment(&config)?;
    println!(
        "{} for {} rounds, {replications} replications",
        result.environment, result.horizon
    );
    for s in &result.summaries {
        let tuning = s
            .tuning
            .as_ref()
            .map(|t| format!(" ({} = {})", t.parameter, t.chosen))
            .unwrap_or_default();
        println!(
            "{:<28} final regret {:>7.2} +- {:.2}{tuning}",
            s.policy, s.final_mean, s.final_stderr
        );
    }
    Ok(())
}
