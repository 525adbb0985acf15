mod common;

use common::ScalarKlUcb;
use momab::change_detection::ChangeDetector;
use momab::environments::{Environment, PiecewiseBernoulli};
use momab::policies::{
    DiscountedParetoUcb, ParetoUcb, Policy, PolicyConfig, Restarted, SlidingWindowParetoUcb,
    WrapperConfig,
};
use momab::{pareto_front, MeanMatrix};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Runs the library policy and the scalar reference side by side on one
/// Bernoulli bank; returns the first round where they disagree.
fn first_divergence(means: &[f64], horizon: usize, seed: u64) -> Option<usize> {
    let rows = means.iter().map(|&m| vec![m]).collect();
    let env = PiecewiseBernoulli::stationary(MeanMatrix::new(rows).unwrap(), horizon).unwrap();
    let mut policy = ParetoUcb::new(PolicyConfig::new(means.len(), 1).with_seed(seed)).unwrap();
    let mut reference = ScalarKlUcb::new(means.len(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    for t in 1..=horizon {
        let a = policy.select();
        if a != reference.select() {
            return Some(t);
        }
        let r = env.sample(a, t, &mut rng).unwrap();
        policy.update(a, &r).unwrap();
        reference.update(a, r[0]);
    }
    None
}

#[test]
fn single_objective_matches_scalar_kl_ucb() {
    for (seed, means) in [
        (0, vec![0.9, 0.8, 0.5]),
        (1, vec![0.2, 0.2, 0.2, 0.2]),
        (2, vec![0.05, 0.1, 0.95, 0.94, 0.5]),
        (3, vec![1.0, 0.0]),
    ] {
        assert_eq!(
            first_divergence(&means, 3000, seed),
            None,
            "means {means:?}"
        );
    }
}

/// Alarms exactly once, on its `at`-th observation overall.
#[derive(Debug, Clone)]
struct AlarmAt {
    at: usize,
    seen: Arc<AtomicUsize>,
}

impl ChangeDetector for AlarmAt {
    fn update(&mut self, _x: f64) -> bool {
        self.seen.fetch_add(1, Ordering::Relaxed) + 1 == self.at
    }
    fn reset(&mut self) {}
}

#[test]
fn scripted_alarm_restarts_the_inner_policy() {
    let k = 4;
    let env = PiecewiseBernoulli::stationary(
        MeanMatrix::new(vec![
            vec![0.9, 0.1],
            vec![0.1, 0.9],
            vec![0.5, 0.5],
            vec![0.2, 0.2],
        ])
        .unwrap(),
        400,
    )
    .unwrap();
    // every detector shares the counter; two observations per round
    let detector = AlarmAt {
        at: 200,
        seen: Arc::new(AtomicUsize::new(0)),
    };
    let inner = ParetoUcb::new(PolicyConfig::new(k, 2).with_seed(9)).unwrap();
    let mut policy = Restarted::new(inner, detector, WrapperConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut alarm_round = None;
    for t in 1..=100 + k {
        let a = policy.select();
        let r = env.sample(a, t, &mut rng).unwrap();
        if policy.update(a, &r).unwrap() {
            alarm_round = Some(t);
        }
        if alarm_round.is_some_and(|at| t == at + k) {
            let pulls: Vec<u64> = policy.inner().arms().iter().map(|s| s.pulls()).collect();
            assert_eq!(pulls, vec![1; k]);
        }
    }
    assert_eq!(alarm_round, Some(100));
    assert_eq!(policy.alarms(), 1);
}

#[test]
fn every_policy_picks_from_its_candidate_front() {
    let env = PiecewiseBernoulli::synthetic();
    let config = PolicyConfig::new(env.num_arms(), env.num_objectives()).with_seed(4);
    let mut policies: Vec<Box<dyn Policy>> = vec![
        Box::new(ParetoUcb::new(config).unwrap()),
        Box::new(SlidingWindowParetoUcb::new(config, 100).unwrap()),
        Box::new(DiscountedParetoUcb::new(config, 0.99).unwrap()),
    ];
    for p in policies.iter_mut() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 1..=env.horizon() {
            let a = p.select();
            assert!(p.candidates().contains(&a));
            let r = env.sample(a, t, &mut rng).unwrap();
            p.update(a, &r).unwrap();
        }
    }
    let mut plain = ParetoUcb::new(config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for t in 1..=50 {
        let a = plain.select();
        if t > env.num_arms() {
            assert_eq!(
                plain.candidates(),
                pareto_front(plain.ucb_vectors()).as_slice()
            );
        }
        let r = env.sample(a, t, &mut rng).unwrap();
        plain.update(a, &r).unwrap();
    }
}
