//! Power control for a joint communication and radar link: the oracle
//! front per target distance, then how often restarted Pareto-klUCB plays
//! it near the end of each segment.
//!
//! cargo run --release --example jcas_power_control [runs]

use momab::change_detection::RbocdConfig;
use momab::environments::{Environment, JcasEnvironment, JcasParams};
use momab::experiment::{run_replication, tail_optimal_fraction, PolicySpec, ResolvedPolicy};
use momab::policies::{PolicyConfig, WrapperConfig};

fn main() -> momab::Result<()> {
    let runs: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("runs must be an integer"))
        .unwrap_or(20);
    let params = JcasParams::default();
    let env = JcasEnvironment::new(params.clone())?;
    let oracle = env.oracle();
    for (s, front) in oracle.feasible_fronts.iter().enumerate() {
        let powers: Vec<f64> = front.iter().map(|&a| params.power_dbm(a)).collect();
        println!(
            "segment {s} ({} m): feasible front {front:?} at {powers:?} dBm",
            params.distances_m[s]
        );
    }

    let horizon = env.horizon();
    let delta = PolicySpec::default_delta(env.breakpoints().len(), horizon, true);
    let policy = ResolvedPolicy::RbocdParetoUcb {
        config: PolicyConfig::new(env.num_arms(), env.num_objectives()),
        detector: RbocdConfig::new(delta),
        wrapper: WrapperConfig::default(),
    };
    let mut fractions = vec![0.0; oracle.feasible_fronts.len()];
    let mut alarms = 0;
    for r in 0..runs {
        let trace = run_replication(&env, &policy, horizon, r as u64)?;
        alarms += trace.alarms.len();
        for (acc, f) in fractions
            .iter_mut()
            .zip(tail_optimal_fraction(&trace, &env, 0.25)?)
        {
            *acc += f / runs as f64;
        }
    }
    println!(
        "{} over {runs} runs, {:.2} restarts per run",
        policy.name(),
        alarms as f64 / runs as f64
    );
    for (s, f) in fractions.iter().enumerate() {
        println!("segment {s}: front play in last quarter {f:.3}");
    }
    Ok(())
}
