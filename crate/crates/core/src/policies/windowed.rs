//! Windowing baselines: sliding-window and discounted Pareto UCB.
//!
//! Both reuse the Pareto generic UCB selection rule and only change which
//! statistics feed it.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_reward, ArmState, Chooser, Policy, PolicyConfig};
use crate::error::{Error, Result};

/// Pareto UCB over the last `window` rounds only; the exploration term uses
/// `ln f(min(t, window))`.
#[derive(Debug, Clone)]
pub struct SlidingWindowParetoUcb {
    config: PolicyConfig,
    window: usize,
    arms: Vec<ArmState>,
    history: VecDeque<(usize, Vec<f64>)>,
    t: usize,
    chooser: Chooser,
}

impl SlidingWindowParetoUcb {
    pub fn new(config: PolicyConfig, window: usize) -> Result<Self> {
        config.validate()?;
        if window < config.num_arms {
            return Err(Error::Config(format!(
                "window {window} shorter than the number of arms {}",
                config.num_arms
            )));
        }
        Ok(Self {
            arms: vec![ArmState::new(config.num_objectives); config.num_arms],
            history: VecDeque::with_capacity(window + 1),
            t: 1,
            chooser: Chooser::new(&config, ChaCha8Rng::seed_from_u64(config.seed)),
            window,
            config,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    pub fn ucb_vectors(&self) -> &[Vec<f64>] {
        self.chooser.ucbs()
    }
}

impl Policy for SlidingWindowParetoUcb {
    fn name(&self) -> String {
        format!(
            "sw-pareto-ucb[{}](W={})",
            self.config.divergence.name(),
            self.window
        )
    }

    fn num_arms(&self) -> usize {
        self.config.num_arms
    }

    fn num_objectives(&self) -> usize {
        self.config.num_objectives
    }

    fn select(&mut self) -> usize {
        self.chooser.select(self.t.min(self.window), &self.arms)
    }

    fn update(&mut self, arm: usize, reward: &[f64]) -> Result<bool> {
        check_reward(
            arm,
            self.config.num_arms,
            self.config.num_objectives,
            reward,
        )?;
        self.arms[arm].add(reward);
        self.history.push_back((arm, reward.to_vec()));
        if self.history.len() > self.window {
            let (old, r) = self.history.pop_front().expect("non-empty");
            let state = &mut self.arms[old];
            state.pulls -= 1;
            state.weight -= 1.0;
            if state.pulls == 0 {
                state.clear();
            } else {
                for (s, x) in state.sums.iter_mut().zip(&r) {
                    *s -= x;
                }
            }
        }
        self.t += 1;
        Ok(false)
    }

    fn restart(&mut self) {
        self.arms.iter_mut().for_each(ArmState::clear);
        self.history.clear();
        self.t = 1;
    }

    fn reset_arm(&mut self, arm: usize) {
        self.arms[arm].clear();
        self.history.retain(|(a, _)| *a != arm);
    }

    fn candidates(&self) -> &[usize] {
        self.chooser.candidates()
    }
}

/// Pareto UCB on discounted statistics `N~_i(t+1) = g N~_i(t) + 1{I_t = i}`
/// and matching discounted reward sums. The exploration term uses the
/// discounted round count `1 + sum_i N~_i`, which equals `t` when `g = 1`.
#[derive(Debug, Clone)]
pub struct DiscountedParetoUcb {
    config: PolicyConfig,
    discount: f64,
    arms: Vec<ArmState>,
    chooser: Chooser,
}

impl DiscountedParetoUcb {
    pub fn new(config: PolicyConfig, discount: f64) -> Result<Self> {
        config.validate()?;
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::Config(format!(
                "discount must be in (0, 1), got {discount}"
            )));
        }
        Ok(Self {
            arms: vec![ArmState::new(config.num_objectives); config.num_arms],
            chooser: Chooser::new(&config, ChaCha8Rng::seed_from_u64(config.seed)),
            discount,
            config,
        })
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    fn discounted_round(&self) -> usize {
        let n: f64 = self.arms.iter().map(|a| a.weight).sum();
        (1.0 + n).round() as usize
    }
}

impl Policy for DiscountedParetoUcb {
    fn name(&self) -> String {
        format!(
            "d-pareto-ucb[{}](gamma={})",
            self.config.divergence.name(),
            self.discount
        )
    }

    fn num_arms(&self) -> usize {
        self.config.num_arms
    }

    fn num_objectives(&self) -> usize {
        self.config.num_objectives
    }

    fn select(&mut self) -> usize {
        let t = self.discounted_round();
        self.chooser.select(t, &self.arms)
    }

    fn update(&mut self, arm: usize, reward: &[f64]) -> Result<bool> {
        check_reward(
            arm,
            self.config.num_arms,
            self.config.num_objectives,
            reward,
        )?;
        let g = self.discount;
        for state in &mut self.arms {
            state.weight *= g;
            state.sums.iter_mut().for_each(|s| *s *= g);
        }
        self.arms[arm].add(reward);
        Ok(false)
    }

    fn restart(&mut self) {
        self.arms.iter_mut().for_each(ArmState::clear);
    }

    fn reset_arm(&mut self, arm: usize) {
        self.arms[arm].clear();
    }

    fn candidates(&self) -> &[usize] {
        self.chooser.candidates()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::ParetoUcb;
    use rand::Rng;

    #[test]
    fn window_must_cover_arms() {
        assert!(SlidingWindowParetoUcb::new(PolicyConfig::new(4, 1), 3).is_err());
        assert!(DiscountedParetoUcb::new(PolicyConfig::new(4, 1), 1.0).is_err());
        assert!(DiscountedParetoUcb::new(PolicyConfig::new(4, 1), 0.0).is_err());
    }

    #[test]
    fn unbinding_window_matches_plain_policy() {
        let config = PolicyConfig::new(3, 2).with_seed(5);
        let mut plain = ParetoUcb::new(config).unwrap();
        let mut windowed = SlidingWindowParetoUcb::new(config, 1000).unwrap();
        let mut env = ChaCha8Rng::seed_from_u64(8);
        let means = [[0.7, 0.2], [0.3, 0.6], [0.4, 0.4]];
        for _ in 0..500 {
            let a = plain.select();
            let b = windowed.select();
            assert_eq!(a, b);
            let r: Vec<f64> = means[a]
                .iter()
                .map(|&m| env.random_bool(m) as u8 as f64)
                .collect();
            plain.update(a, &r).unwrap();
            windowed.update(b, &r).unwrap();
        }
    }

    #[test]
    fn window_forgets_old_segment() {
        let mut p = SlidingWindowParetoUcb::new(PolicyConfig::new(2, 1), 10).unwrap();
        for _ in 0..20 {
            p.update(0, &[1.0]).unwrap();
        }
        for _ in 0..10 {
            p.update(0, &[0.0]).unwrap();
        }
        assert_eq!(p.arms()[0].mean(), Some(vec![0.0]));
        assert_eq!(p.arms()[0].pulls(), 10);
        // arm 1 never appeared in the window
        assert_eq!(p.arms()[1].pulls(), 0);
    }

    #[test]
    fn discounted_statistics_match_direct_sums() {
        let g = 0.9;
        let mut p = DiscountedParetoUcb::new(PolicyConfig::new(3, 1).with_seed(2), g).unwrap();
        let mut env = ChaCha8Rng::seed_from_u64(1);
        let mut history = Vec::new();
        for _ in 0..200 {
            let arm = p.select();
            let r: f64 = env.random();
            p.update(arm, &[r]).unwrap();
            history.push((arm, r));
        }
        let t = history.len();
        for arm in 0..3 {
            let (mut count, mut sum) = (0.0, 0.0);
            for (s, &(a, r)) in history.iter().enumerate() {
                if a == arm {
                    let w = g.powi((t - 1 - s) as i32);
                    count += w;
                    sum += w * r;
                }
            }
            assert!((p.arms()[arm].effective_pulls() - count).abs() < 1e-9);
            assert!((p.arms()[arm].sums()[0] - sum).abs() < 1e-9);
        }
    }

    #[test]
    fn discounted_mean_of_constant_stream() {
        let mut p = DiscountedParetoUcb::new(PolicyConfig::new(2, 2), 0.95).unwrap();
        for _ in 0..300 {
            p.update(1, &[0.3, 0.8]).unwrap();
        }
        let mean = p.arms()[1].mean().unwrap();
        assert!((mean[0] - 0.3).abs() < 1e-12 && (mean[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn discount_near_one_matches_plain_policy() {
        let config = PolicyConfig::new(3, 2).with_seed(12);
        let mut plain = ParetoUcb::new(config).unwrap();
        let mut discounted = DiscountedParetoUcb::new(config, 1.0 - 1e-13).unwrap();
        let mut env = ChaCha8Rng::seed_from_u64(3);
        let means = [[0.7, 0.2], [0.3, 0.6], [0.4, 0.4]];
        for _ in 0..200 {
            let a = plain.select();
            let b = discounted.select();
            assert_eq!(a, b);
            // continuous rewards keep exact ties away
            let r: Vec<f64> = means[a]
                .iter()
                .map(|&m: &f64| (m + 0.2 * (env.random::<f64>() - 0.5)).clamp(0.0, 1.0))
                .collect();
            plain.update(a, &r).unwrap();
            discounted.update(b, &r).unwrap();
        }
    }
}
