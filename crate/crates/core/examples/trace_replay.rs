//! Replays a recorded binary reward table as a two-segment environment.
//!
//! cargo run --release --example trace_replay

use std::fmt::Write as _;

use momab::environments::{Environment, TraceEnvironment};
use momab::experiment::{run_replication, ResolvedPolicy};
use momab::policies::PolicyConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> momab::Result<()> {
    // three items, click and long-view indicators; item 2 becomes popular
    // halfway through
    let horizon = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut table = String::from("t,arm,click,view\n");
    for t in 1..=horizon {
        let late = t > horizon / 2;
        let rates = [
            [0.6, 0.5],
            [0.4, 0.7],
            if late { [0.8, 0.8] } else { [0.2, 0.3] },
        ];
        for (arm, r) in rates.iter().enumerate() {
            let click = rng.random_bool(r[0]) as u8;
            let view = rng.random_bool(r[1]) as u8;
            writeln!(table, "{t},{arm},{click},{view}").unwrap();
        }
    }
    let path = std::env::temp_dir().join("momab_trace_replay.csv");
    std::fs::write(&path, table)?;

    let env = TraceEnvironment::from_csv(&path, Some(horizon / 2))?;
    for (s, m) in env.segment_means().iter().enumerate() {
        println!("segment {s}: front {:?}, means {:?}", m.front(), m.rows());
    }
    let policy = ResolvedPolicy::ParetoUcb {
        config: PolicyConfig::new(env.num_arms(), env.num_objectives()),
    };
    let trace = run_replication(&env, &policy, horizon, 0)?;
    println!(
        "stationary Pareto-klUCB regret on replay: {:.1}",
        trace.final_regret()
    );
    std::fs::remove_file(&path)?;
    Ok(())
}
