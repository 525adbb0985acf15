//! Seeded experiment runs, regret summaries and statistical verifiers.
//!
//! Replication `r` uses seed `base + r`. The environment draws from stream 1
//! of that seed and the policy from stream 0, so every policy in a
//! replication faces the same reward realizations.

mod config;
mod output;
mod verify;

pub use config::{EnvironmentConfig, ExperimentConfig, OutputFormat, PolicySpec};
pub use output::{emit_results, write_results};
pub use verify::{
    alarm_audit, lemma1_battery, lemma2_battery, log_regret_coefficient, random_lemma1_configs,
    random_lemma2_configs, verify_lemma1, verify_lemma2, verify_regret_shape, AlarmAudit,
    BoundCheck, BoundsReport, Component, Lemma1Config, Lemma1Report, Lemma2Config, Lemma2Report,
    RegretShapeConfig, RegretShapeReport,
};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::change_detection::{Rbocd, RbocdConfig};
use crate::environments::Environment;
use crate::error::{Error, Result};
use crate::pareto::{regret_against_front, RegretTrace};
use crate::policies::{
    DiscountedParetoUcb, ParetoUcb, Policy, PolicyConfig, Restarted, SlidingWindowParetoUcb,
    WrapperConfig,
};

pub const WINDOW_GRID: [usize; 5] = [50, 100, 200, 400, 800];
pub const DISCOUNT_GRID: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

/// A policy with every hyperparameter fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResolvedPolicy {
    Oracle,
    ParetoUcb {
        config: PolicyConfig,
    },
    RbocdParetoUcb {
        config: PolicyConfig,
        detector: RbocdConfig,
        wrapper: WrapperConfig,
    },
    SwParetoUcb {
        config: PolicyConfig,
        window: usize,
    },
    DParetoUcb {
        config: PolicyConfig,
        discount: f64,
    },
}

impl ResolvedPolicy {
    pub fn name(&self) -> String {
        match self {
            ResolvedPolicy::Oracle => "oracle".into(),
            _ => self
                .build(0)
                .map(|p| p.name())
                .unwrap_or_else(|e| format!("invalid({e})")),
        }
    }

    fn with_seed(&self, seed: u64) -> Self {
        let mut p = self.clone();
        match &mut p {
            ResolvedPolicy::Oracle => {}
            ResolvedPolicy::ParetoUcb { config }
            | ResolvedPolicy::SwParetoUcb { config, .. }
            | ResolvedPolicy::DParetoUcb { config, .. } => config.seed = seed,
            ResolvedPolicy::RbocdParetoUcb {
                config, wrapper, ..
            } => {
                config.seed = seed;
                wrapper.seed = seed ^ 0x9e37_79b9_7f4a_7c15;
            }
        }
        p
    }

    /// Builds a learning policy; the oracle has no standalone form.
    pub fn build(&self, seed: u64) -> Result<Box<dyn Policy>> {
        Ok(match self.with_seed(seed) {
            ResolvedPolicy::Oracle => {
                return Err(Error::InvalidArgument(
                    "the oracle needs an environment".into(),
                ))
            }
            ResolvedPolicy::ParetoUcb { config } => Box::new(ParetoUcb::new(config)?),
            ResolvedPolicy::RbocdParetoUcb {
                config,
                detector,
                wrapper,
            } => Box::new(Restarted::new(
                ParetoUcb::new(config)?,
                Rbocd::new(detector)?,
                wrapper,
            )?),
            ResolvedPolicy::SwParetoUcb { config, window } => {
                Box::new(SlidingWindowParetoUcb::new(config, window)?)
            }
            ResolvedPolicy::DParetoUcb { config, discount } => {
                Box::new(DiscountedParetoUcb::new(config, discount)?)
            }
        })
    }
}

enum Player {
    Oracle { rng: ChaCha8Rng, arms: Vec<usize> },
    Learner(Box<dyn Policy>),
}

/// Runs one policy for `horizon` rounds against one seeded reward stream.
pub fn run_replication(
    env: &dyn Environment,
    policy: &ResolvedPolicy,
    horizon: usize,
    seed: u64,
) -> Result<RegretTrace> {
    if horizon > env.horizon() {
        return Err(Error::Config(format!(
            "horizon {horizon} exceeds the environment's {}",
            env.horizon()
        )));
    }
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    env_rng.set_stream(1);
    let mut player = match policy {
        ResolvedPolicy::Oracle => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(0);
            Player::Oracle {
                rng,
                arms: Vec::new(),
            }
        }
        other => Player::Learner(other.build(seed)?),
    };

    let mut segment = usize::MAX;
    let mut front = Vec::new();
    let mut reward = vec![0.0; env.num_objectives()];
    let mut trace = RegretTrace::default();
    for t in 1..=horizon {
        let s = env.segment_of(t)?;
        if s != segment {
            segment = s;
            front = env.active_means(t)?.front();
            if let Player::Oracle { arms, .. } = &mut player {
                *arms = env.optimal_arms(t)?;
            }
        }
        let arm = match &mut player {
            Player::Oracle { rng, arms } => *arms.choose(rng).expect("optimal set is never empty"),
            Player::Learner(p) => {
                let arm = p.select();
                if !p.candidates().contains(&arm) {
                    return Err(Error::InvalidArgument(format!(
                        "{} chose arm {arm} outside its candidate set at round {t}",
                        p.name()
                    )));
                }
                arm
            }
        };
        env.sample_into(arm, t, &mut env_rng, &mut reward)?;
        let alarm = match &mut player {
            Player::Oracle { .. } => false,
            Player::Learner(p) => p.update(arm, &reward)?,
        };
        trace.push(arm, regret_against_front(arm, env.active_means(t)?, &front));
        if alarm {
            trace.alarms.push(t);
        }
    }
    Ok(trace)
}

/// Per-round statistics over replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub round: usize,
    pub mean_cum_regret: f64,
    pub stderr: f64,
    /// Mean number of alarms up to and including this round.
    pub alarms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tuning {
    pub parameter: &'static str,
    pub chosen: f64,
    /// `(value, mean final regret)` for every grid point.
    pub grid: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub policy: String,
    pub replications: usize,
    pub final_mean: f64,
    pub final_stderr: f64,
    pub mean_alarms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuning: Option<Tuning>,
    pub rows: Vec<SummaryRow>,
}

/// Aggregates replications in index order, so the result does not depend
/// on the order they were produced in.
pub fn summarize(policy: String, traces: &[(usize, RegretTrace)]) -> PolicySummary {
    let mut ordered: Vec<&(usize, RegretTrace)> = traces.iter().collect();
    ordered.sort_by_key(|(r, _)| *r);
    let n = ordered.len();
    let horizon = ordered.iter().map(|(_, t)| t.len()).min().unwrap_or(0);
    let mut rows = Vec::with_capacity(horizon);
    let mut alarm_cursor = vec![0usize; n];
    for round in 1..=horizon {
        let values = ordered.iter().map(|(_, t)| t.cumulative[round - 1]);
        let (mean, stderr) = mean_stderr(values, n);
        let mut alarms = 0usize;
        for (cursor, (_, t)) in alarm_cursor.iter_mut().zip(&ordered) {
            while *cursor < t.alarms.len() && t.alarms[*cursor] <= round {
                *cursor += 1;
            }
            alarms += *cursor;
        }
        rows.push(SummaryRow {
            round,
            mean_cum_regret: mean,
            stderr,
            alarms: if n == 0 {
                0.0
            } else {
                alarms as f64 / n as f64
            },
        });
    }
    let (final_mean, final_stderr) = rows
        .last()
        .map_or((0.0, 0.0), |r| (r.mean_cum_regret, r.stderr));
    PolicySummary {
        policy,
        replications: n,
        final_mean,
        final_stderr,
        mean_alarms: rows.last().map_or(0.0, |r| r.alarms),
        tuning: None,
        rows,
    }
}

pub(crate) fn mean_stderr(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub environment: String,
    pub horizon: usize,
    pub summaries: Vec<PolicySummary>,
}

/// Runs `replications` seeded replications of one resolved policy.
pub fn run_policy(
    env: &dyn Environment,
    policy: &ResolvedPolicy,
    horizon: usize,
    replications: usize,
    base_seed: u64,
) -> Result<Vec<(usize, RegretTrace)>> {
    (0..replications)
        .map(|r| {
            Ok((
                r,
                run_replication(env, policy, horizon, base_seed.wrapping_add(r as u64))?,
            ))
        })
        .collect()
}

/// Per segment, the fraction of rounds in its final `tail` share that chose
/// an arm from [`Environment::optimal_arms`].
pub fn tail_optimal_fraction(
    trace: &RegretTrace,
    env: &dyn Environment,
    tail: f64,
) -> Result<Vec<f64>> {
    if !(tail > 0.0 && tail <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail must be in (0, 1], got {tail}"
        )));
    }
    let horizon = trace.len();
    let mut starts = vec![1];
    starts.extend(env.breakpoints().iter().copied().filter(|&b| b <= horizon));
    let mut ends: Vec<usize> = starts[1..].iter().map(|b| b - 1).collect();
    ends.push(horizon);
    starts
        .iter()
        .zip(&ends)
        .map(|(&start, &end)| {
            let len = end + 1 - start;
            let first = end + 1 - ((len as f64 * tail).ceil() as usize).clamp(1, len);
            let optimal = env.optimal_arms(end)?;
            let hits = (first..=end)
                .filter(|&t| optimal.contains(&trace.choices[t - 1]))
                .count();
            Ok(hits as f64 / (end + 1 - first) as f64)
        })
        .collect()
}

/// Resolves every policy (including grid searches) and runs all
/// replications.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let env = config.environment.build()?;
    let env = env.as_ref();
    let horizon = config.horizon.unwrap_or(env.horizon());
    if horizon == 0 || horizon > env.horizon() {
        return Err(Error::Config(format!(
            "horizon must be in 1..={}, got {horizon}",
            env.horizon()
        )));
    }
    // resolve everything before running anything
    let plans: Vec<Plan> = config
        .policies
        .iter()
        .map(|spec| spec.plan(env, horizon, config.breakpoints_known))
        .collect::<Result<_>>()?;

    let mut summaries = Vec::with_capacity(plans.len());
    for plan in plans {
        let summary = match plan {
            Plan::Fixed(policy) => {
                let traces = run_policy(env, &policy, horizon, config.replications, config.seed)?;
                summarize(policy.name(), &traces)
            }
            Plan::Grid {
                candidates,
                parameter,
            } => {
                let mut best: Option<(f64, PolicySummary)> = None;
                let mut grid = Vec::with_capacity(candidates.len());
                for (value, policy) in candidates {
                    let traces =
                        run_policy(env, &policy, horizon, config.replications, config.seed)?;
                    let summary = summarize(policy.name(), &traces);
                    grid.push((value, summary.final_mean));
                    if best
                        .as_ref()
                        .is_none_or(|(_, b)| summary.final_mean < b.final_mean)
                    {
                        best = Some((value, summary));
                    }
                }
                let (chosen, mut summary) =
                    best.ok_or_else(|| Error::Config(format!("empty {parameter} grid")))?;
                summary.tuning = Some(Tuning {
                    parameter,
                    chosen,
                    grid,
                });
                summary
            }
        };
        summaries.push(summary);
    }
    Ok(ExperimentResult {
        environment: env.name(),
        horizon,
        summaries,
    })
}

pub(crate) enum Plan {
    Fixed(ResolvedPolicy),
    Grid {
        parameter: &'static str,
        candidates: Vec<(f64, ResolvedPolicy)>,
    },
}
