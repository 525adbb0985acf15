use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_reward, ArmState, Chooser, Policy, PolicyConfig};
use crate::error::Result;

/// Pareto generic UCB.
///
/// For `t <= K` the policy pulls a not-yet-pulled arm at random. Afterwards
/// each arm's upper-confidence vector is
/// `U_i = sup { u : max_j d(mu_i^j, u^j) <= ln f(t) / N_i }`, and the pull is
/// drawn uniformly from the Pareto front of `{U_i}`.
#[derive(Debug, Clone)]
pub struct ParetoUcb {
    config: PolicyConfig,
    arms: Vec<ArmState>,
    t: usize,
    chooser: Chooser,
}

impl ParetoUcb {
    pub fn new(config: PolicyConfig) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::with_rng(config, rng)
    }

    /// Uses an explicit random source for all tie-breaks.
    pub fn with_rng(config: PolicyConfig, rng: ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            arms: vec![ArmState::new(config.num_objectives); config.num_arms],
            t: 1,
            chooser: Chooser::new(&config, rng),
            config,
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    /// Internal round counter (1 right after construction or restart).
    pub fn round(&self) -> usize {
        self.t
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    /// Upper-confidence vectors computed by the last selection.
    pub fn ucb_vectors(&self) -> &[Vec<f64>] {
        self.chooser.ucbs()
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        self.chooser.rng()
    }
}

impl Policy for ParetoUcb {
    fn name(&self) -> String {
        format!("pareto-ucb[{}]", self.config.divergence.name())
    }

    fn num_arms(&self) -> usize {
        self.config.num_arms
    }

    fn num_objectives(&self) -> usize {
        self.config.num_objectives
    }

    fn select(&mut self) -> usize {
        self.chooser.select(self.t, &self.arms)
    }

    fn update(&mut self, arm: usize, reward: &[f64]) -> Result<bool> {
        check_reward(
            arm,
            self.config.num_arms,
            self.config.num_objectives,
            reward,
        )?;
        self.arms[arm].add(reward);
        self.t += 1;
        Ok(false)
    }

    fn restart(&mut self) {
        self.arms.iter_mut().for_each(ArmState::clear);
        self.t = 1;
    }

    fn reset_arm(&mut self, arm: usize) {
        self.arms[arm].clear();
    }

    fn candidates(&self) -> &[usize] {
        self.chooser.candidates()
    }
}
