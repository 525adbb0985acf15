use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_reward, Policy};
use crate::change_detection::ChangeDetector;
use crate::error::{check_unit, Result};

/// What an alarm resets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartScope {
    /// The whole policy and every detector.
    #[default]
    Global,
    /// Only the alarmed arm's statistics and detectors.
    PerArm,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WrapperConfig {
    #[serde(default)]
    pub scope: RestartScope,
    /// Probability of pulling a uniformly random arm instead of the inner
    /// policy's choice.
    #[serde(default)]
    pub forced_exploration: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Wraps a policy with one change detector per (arm, objective).
///
/// Detectors only see the pulled arm's rewards. After the inner update, an
/// alarm on any objective restarts according to [`RestartScope`].
#[derive(Debug, Clone)]
pub struct Restarted<P, C> {
    inner: P,
    prototype: C,
    detectors: Vec<Vec<C>>,
    config: WrapperConfig,
    rng: ChaCha8Rng,
    forced: Vec<usize>,
    explored: bool,
    alarms: usize,
}

impl<P: Policy, C: ChangeDetector + Clone> Restarted<P, C> {
    pub fn new(inner: P, detector: C, config: WrapperConfig) -> Result<Self> {
        check_unit("forced exploration probability", config.forced_exploration)?;
        let mut prototype = detector;
        prototype.reset();
        let detectors = vec![vec![prototype.clone(); inner.num_objectives()]; inner.num_arms()];
        Ok(Self {
            forced: (0..inner.num_arms()).collect(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            inner,
            prototype,
            detectors,
            config,
            explored: false,
            alarms: 0,
        })
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn detector(&self, arm: usize, objective: usize) -> &C {
        &self.detectors[arm][objective]
    }

    /// Alarms raised since construction.
    pub fn alarms(&self) -> usize {
        self.alarms
    }

    fn reset_detectors(&mut self, arm: Option<usize>) {
        match arm {
            Some(a) => self.detectors[a].iter_mut().for_each(|d| d.reset()),
            None => self.detectors.iter_mut().flatten().for_each(|d| d.reset()),
        }
    }
}

impl<P: Policy, C: ChangeDetector + Clone> Policy for Restarted<P, C> {
    fn name(&self) -> String {
        let scope = match self.config.scope {
            RestartScope::Global => "",
            RestartScope::PerArm => "/per-arm",
        };
        format!("cd-{}{scope}", self.inner.name())
    }

    fn num_arms(&self) -> usize {
        self.inner.num_arms()
    }

    fn num_objectives(&self) -> usize {
        self.inner.num_objectives()
    }

    fn select(&mut self) -> usize {
        let p = self.config.forced_exploration;
        self.explored = p > 0.0 && self.rng.random_bool(p);
        if self.explored {
            self.rng.random_range(0..self.inner.num_arms())
        } else {
            self.inner.select()
        }
    }

    fn update(&mut self, arm: usize, reward: &[f64]) -> Result<bool> {
        check_reward(arm, self.num_arms(), self.num_objectives(), reward)?;
        self.inner.update(arm, reward)?;
        let mut alarm = false;
        for (detector, &x) in self.detectors[arm].iter_mut().zip(reward) {
            alarm |= detector.update(x);
        }
        if alarm {
            self.alarms += 1;
            match self.config.scope {
                RestartScope::Global => {
                    self.inner.restart();
                    self.reset_detectors(None);
                }
                RestartScope::PerArm => {
                    self.inner.reset_arm(arm);
                    self.reset_detectors(Some(arm));
                }
            }
        }
        Ok(alarm)
    }

    fn restart(&mut self) {
        self.inner.restart();
        self.reset_detectors(None);
    }

    fn reset_arm(&mut self, arm: usize) {
        self.inner.reset_arm(arm);
        self.reset_detectors(Some(arm));
    }

    fn candidates(&self) -> &[usize] {
        if self.explored {
            &self.forced
        } else {
            self.inner.candidates()
        }
    }
}

impl<P, C: ChangeDetector> Restarted<P, C> {
    /// A fresh detector with the wrapper's settings.
    pub fn prototype(&self) -> &C {
        &self.prototype
    }
}
