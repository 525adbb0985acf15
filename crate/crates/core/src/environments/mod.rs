//! Reward generators: piecewise-stationary Bernoulli banks, the JCAS
//! power-selection model and replay of recorded traces.
//!
//! Rounds are 1-based. A breakpoint is the first round of a new segment.

mod jcas;
mod marcum;
mod piecewise;
mod trace;

pub use jcas::{
    ConstraintMode, JcasEnvironment, JcasMetrics, JcasOracle, JcasParams, Normalization, RewardMode,
};
pub use marcum::marcum_q1;
pub use piecewise::{PiecewiseBernoulli, PiecewiseSpec};
pub use trace::TraceEnvironment;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::pareto::MeanMatrix;

pub trait Environment: Send + Sync {
    fn name(&self) -> String;

    fn num_arms(&self) -> usize;

    fn num_objectives(&self) -> usize;

    fn horizon(&self) -> usize;

    /// Segment starts after round 1, increasing.
    fn breakpoints(&self) -> &[usize];

    /// Ground-truth mean matrix of the segment containing round `t`.
    fn active_means(&self, t: usize) -> Result<&MeanMatrix>;

    /// Writes the reward of pulling `arm` at round `t` into `out`.
    fn sample_into(
        &self,
        arm: usize,
        t: usize,
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()>;

    fn sample(&self, arm: usize, t: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_objectives()];
        self.sample_into(arm, t, rng, &mut out)?;
        Ok(out)
    }

    /// Arms an oracle may play at round `t`.
    fn optimal_arms(&self, t: usize) -> Result<Vec<usize>> {
        Ok(self.active_means(t)?.front())
    }

    /// Index of the segment containing round `t`.
    fn segment_of(&self, t: usize) -> Result<usize> {
        check_round(t, self.horizon())?;
        Ok(self.breakpoints().partition_point(|&b| b <= t))
    }
}

pub(crate) fn check_round(t: usize, horizon: usize) -> Result<()> {
    if t == 0 || t > horizon {
        return Err(Error::InvalidArgument(format!(
            "round {t} outside 1..={horizon}"
        )));
    }
    Ok(())
}

pub(crate) fn check_arm(arm: usize, num_arms: usize) -> Result<()> {
    if arm >= num_arms {
        return Err(Error::InvalidArgument(format!(
            "arm {arm} out of range for {num_arms} arms"
        )));
    }
    Ok(())
}

/// Checks that breakpoints are strictly increasing and inside `2..horizon`.
pub(crate) fn check_breakpoints(breakpoints: &[usize], horizon: usize) -> Result<()> {
    let mut prev = 1;
    for &b in breakpoints {
        if b <= prev || b >= horizon {
            return Err(Error::Config(format!(
                "breakpoints must increase strictly within 2..{horizon}, got {breakpoints:?}"
            )));
        }
        prev = b;
    }
    Ok(())
}

/// Breakpoints that cut `1..=horizon` into `segments` equal parts.
pub fn even_breakpoints(horizon: usize, segments: usize) -> Vec<usize> {
    (1..segments).map(|s| s * horizon / segments + 1).collect()
}
