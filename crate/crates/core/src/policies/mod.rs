//! Sequential multi-objective index policies.
//!
//! Every policy follows the same loop: [`Policy::select`] an arm, pull it,
//! then [`Policy::update`] with the observed reward vector. Selection draws
//! uniformly from the Pareto front of the current upper-confidence vectors,
//! after first pulling every arm with no statistics.

mod pareto_ucb;
mod restarted;
mod windowed;

pub use pareto_ucb::ParetoUcb;
pub use restarted::{RestartScope, Restarted, WrapperConfig};
pub use windowed::{DiscountedParetoUcb, SlidingWindowParetoUcb};

use rand::seq::IndexedRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::divergence::{ucb_vector, Divergence};
use crate::error::{check_dims, check_unit, Error, Result};
use crate::pareto::pareto_front_into;

pub trait Policy: Send {
    fn name(&self) -> String;

    fn num_arms(&self) -> usize;

    fn num_objectives(&self) -> usize;

    /// Arm to pull this round.
    fn select(&mut self) -> usize;

    /// Records the reward of `arm`. Returns `true` when the observation made
    /// the policy restart.
    fn update(&mut self, arm: usize, reward: &[f64]) -> Result<bool>;

    /// Forgets all arm statistics and rewinds the internal clock to 1.
    fn restart(&mut self);

    /// Forgets the statistics of a single arm.
    fn reset_arm(&mut self, arm: usize);

    /// The arm set the last selection was drawn from.
    fn candidates(&self) -> &[usize];
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn num_arms(&self) -> usize {
        (**self).num_arms()
    }
    fn num_objectives(&self) -> usize {
        (**self).num_objectives()
    }
    fn select(&mut self) -> usize {
        (**self).select()
    }
    fn update(&mut self, arm: usize, reward: &[f64]) -> Result<bool> {
        (**self).update(arm, reward)
    }
    fn restart(&mut self) {
        (**self).restart()
    }
    fn reset_arm(&mut self, arm: usize) {
        (**self).reset_arm(arm)
    }
    fn candidates(&self) -> &[usize] {
        (**self).candidates()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub num_arms: usize,
    pub num_objectives: usize,
    #[serde(default)]
    pub divergence: Divergence,
    /// `c` in `f(t) = t ln^c(t)`; zero gives `f(t) = t`.
    #[serde(default)]
    pub exponent: f64,
    #[serde(default)]
    pub seed: u64,
}

impl PolicyConfig {
    pub fn new(num_arms: usize, num_objectives: usize) -> Self {
        Self {
            num_arms,
            num_objectives,
            divergence: Divergence::KlBernoulli,
            exponent: 0.0,
            seed: 0,
        }
    }

    pub fn with_divergence(mut self, divergence: Divergence) -> Self {
        self.divergence = divergence;
        self
    }

    pub fn with_exponent(mut self, exponent: f64) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_arms == 0 {
            return Err(Error::Config("policy needs at least one arm".into()));
        }
        if self.num_objectives == 0 {
            return Err(Error::Config("policy needs at least one objective".into()));
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(Error::Config(format!(
                "exploration exponent must be >= 0, got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

/// `ln f(t)` with `f(t) = t ln^c(t)`, clamped at zero.
pub fn log_exploration(t: usize, exponent: f64) -> f64 {
    let lt = (t.max(1) as f64).ln();
    let value = if exponent == 0.0 {
        lt
    } else {
        lt + exponent * lt.ln()
    };
    if value.is_nan() {
        0.0
    } else {
        value.max(0.0)
    }
}

/// Confidence radius `ln f(t) / N`.
pub fn confidence_radius(t: usize, pulls: f64, exponent: f64) -> f64 {
    log_exploration(t, exponent) / pulls
}

/// Per-arm statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    /// Pulls counted by the current statistics scope.
    pub(crate) pulls: u64,
    /// Effective sample size: the pull count, or its discounted analogue.
    pub(crate) weight: f64,
    pub(crate) sums: Vec<f64>,
}

impl ArmState {
    fn new(num_objectives: usize) -> Self {
        Self {
            pulls: 0,
            weight: 0.0,
            sums: vec![0.0; num_objectives],
        }
    }

    fn clear(&mut self) {
        self.pulls = 0;
        self.weight = 0.0;
        self.sums.iter_mut().for_each(|s| *s = 0.0);
    }

    fn add(&mut self, reward: &[f64]) {
        self.pulls += 1;
        self.weight += 1.0;
        for (s, r) in self.sums.iter_mut().zip(reward) {
            *s += r;
        }
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn effective_pulls(&self) -> f64 {
        self.weight
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Empirical mean vector; `None` before the first pull.
    pub fn mean(&self) -> Option<Vec<f64>> {
        (self.pulls > 0 && self.weight > 0.0).then(|| {
            self.sums
                .iter()
                .map(|s| (s / self.weight).clamp(0.0, 1.0))
                .collect()
        })
    }
}

/// Upper-confidence computation and uniform front tie-breaking shared by
/// every index policy.
#[derive(Debug, Clone)]
pub(crate) struct Chooser {
    divergence: Divergence,
    exponent: f64,
    rng: ChaCha8Rng,
    ucbs: Vec<Vec<f64>>,
    candidates: Vec<usize>,
    mean: Vec<f64>,
}

impl Chooser {
    pub(crate) fn new(config: &PolicyConfig, rng: ChaCha8Rng) -> Self {
        Self {
            divergence: config.divergence,
            exponent: config.exponent,
            rng,
            ucbs: vec![vec![1.0; config.num_objectives]; config.num_arms],
            candidates: Vec::with_capacity(config.num_arms),
            mean: Vec::with_capacity(config.num_objectives),
        }
    }

    /// Picks among never-pulled arms when there are any; otherwise
    /// recomputes every upper-confidence vector for round `t` and draws
    /// uniformly from their Pareto front.
    pub(crate) fn select(&mut self, t: usize, arms: &[ArmState]) -> usize {
        self.candidates.clear();
        self.candidates.extend(
            arms.iter()
                .enumerate()
                .filter(|(_, a)| a.pulls == 0)
                .map(|(i, _)| i),
        );
        if self.candidates.is_empty() {
            let log_f = log_exploration(t, self.exponent);
            for (arm, ucb) in arms.iter().zip(self.ucbs.iter_mut()) {
                self.mean.clear();
                self.mean
                    .extend(arm.sums.iter().map(|s| (s / arm.weight).clamp(0.0, 1.0)));
                ucb_vector(self.divergence, &self.mean, log_f / arm.weight, ucb);
            }
            pareto_front_into(&self.ucbs, &mut self.candidates);
        } else {
            for &i in &self.candidates {
                self.ucbs[i].iter_mut().for_each(|u| *u = 1.0);
            }
        }
        *self
            .candidates
            .choose(&mut self.rng)
            .expect("candidate set is never empty")
    }

    pub(crate) fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub(crate) fn ucbs(&self) -> &[Vec<f64>] {
        &self.ucbs
    }

    pub(crate) fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }
}

pub(crate) fn check_reward(
    arm: usize,
    num_arms: usize,
    num_objectives: usize,
    reward: &[f64],
) -> Result<()> {
    if arm >= num_arms {
        return Err(Error::InvalidArgument(format!(
            "arm {arm} out of range for {num_arms} arms"
        )));
    }
    check_dims(num_objectives, reward.len())?;
    for &r in reward {
        check_unit("reward component", r)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exploration_function() {
        assert_eq!(log_exploration(1, 0.0), 0.0);
        assert_eq!(log_exploration(1, 1.0), 0.0);
        assert_eq!(log_exploration(2, 3.0), 0.0);
        assert!((log_exploration(100, 0.0) - 100f64.ln()).abs() < 1e-15);
        let expected = 100f64.ln() + 2.0 * 100f64.ln().ln();
        assert!((log_exploration(100, 2.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn radius_monotonicity() {
        for t in [5usize, 50, 500] {
            for n in 1..50 {
                let r = confidence_radius(t, n as f64, 1.0);
                assert!(r >= confidence_radius(t, n as f64 + 1.0, 1.0));
                assert!(r <= confidence_radius(t + 1, n as f64, 1.0));
            }
        }
    }

    #[test]
    fn arm_state_means() {
        let mut arm = ArmState::new(2);
        assert_eq!(arm.mean(), None);
        arm.add(&[1.0, 0.0]);
        assert_eq!(arm.mean(), Some(vec![1.0, 0.0]));
        arm.add(&[0.0, 1.0]);
        assert_eq!(arm.mean(), Some(vec![0.5, 0.5]));
        arm.clear();
        assert_eq!(arm.pulls(), 0);
    }

    #[test]
    fn config_validation() {
        assert!(PolicyConfig::new(0, 1).validate().is_err());
        assert!(PolicyConfig::new(2, 0).validate().is_err());
        assert!(PolicyConfig::new(2, 1)
            .with_exponent(-1.0)
            .validate()
            .is_err());
        assert!(PolicyConfig::new(2, 1).validate().is_ok());
    }
}
