//! Restarted Bayesian online change-point detection for bounded streams.
//!
//! The detector tracks, since its last restart at `r`, one forecaster per
//! candidate start `s`. Forecaster `s` carries the weight
//!
//! ```text
//! w_s(t) = Lp(x_r..x_{s-1}) * Lp(x_s..x_t)
//! ```
//!
//! where `Lp` is the Laplace (uniform-prior Beta-Bernoulli) marginal
//! likelihood, accumulated online as a product of rule-of-succession
//! predictions. The forecaster started at `r` has weight `Lp(x_r..x_t)`.
//! A restart is declared as soon as some split forecaster outweighs the
//! initial one by the confidence threshold
//!
//! ```text
//! ln w_s(t) - ln w_r(t) > ln(m (m + 1) / delta) + ln(n + 1)
//! ```
//!
//! with `m = s - r` observations before the split and `n = t - r + 1` in
//! the run. Under a stationary Bernoulli stream `Lp(a) Lp(b) / p_theta(ab)`
//! is a unit-mean non-negative martingale in `t` for every fixed split, and
//! `Lp(ab) >= p_theta(ab) / (n + 1)`, so Ville's inequality with a union
//! bound over splits gives a false-alarm probability of at most `delta`
//! per run. After a change of gap `Delta`, the log ratio grows linearly at a
//! KL rate of order `2 Delta^2`, giving a delay of order
//! `ln(1 / delta) / (2 Delta^2)`.
//!
//! Candidates are pruned to the `max_candidates` heaviest forecasters. The
//! initial forecaster is never pruned, and pruning can only remove alarms,
//! so the false-alarm guarantee is unaffected.
//!
//! Fractional observations `x` in `[0, 1]` enter through the Bernoulli
//! likelihood `p^x (1 - p)^(1 - x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

pub const DEFAULT_MAX_CANDIDATES: usize = 200;

/// A sequential detector fed one bounded observation at a time.
pub trait ChangeDetector: Send {
    /// Consumes `x` and returns `true` when a change is declared. The
    /// detector restarts itself on an alarm.
    fn update(&mut self, x: f64) -> bool;

    /// Forgets everything observed so far.
    fn reset(&mut self);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbocdConfig {
    /// False-alarm confidence in `(0, 1)`.
    pub delta: f64,
    /// Number of split forecasters kept besides the initial one.
    #[serde(default = "default_max_candidates")]
    pub max_candidates: usize,
}

fn default_max_candidates() -> usize {
    DEFAULT_MAX_CANDIDATES
}

impl RbocdConfig {
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Forecaster {
    /// Observations in the run before this forecaster's start.
    offset: u64,
    n: u64,
    successes: f64,
    log_weight: f64,
}

impl Forecaster {
    #[inline]
    fn observe(&mut self, x: f64) {
        self.log_weight += log_predictive(self.n, self.successes, x);
        self.n += 1;
        self.successes += x;
    }
}

/// Log rule-of-succession probability of `x` after `n` observations summing
/// to `successes`.
#[inline]
fn log_predictive(n: u64, successes: f64, x: f64) -> f64 {
    let denom = n as f64 + 2.0;
    let p1 = (successes + 1.0) / denom;
    if x == 1.0 {
        p1.ln()
    } else if x == 0.0 {
        (1.0 - p1).ln()
    } else {
        x * p1.ln() + (1.0 - x) * (1.0 - p1).ln()
    }
}

/// Restarted Bayesian online change-point detector.
#[derive(Debug, Clone)]
pub struct Rbocd {
    config: RbocdConfig,
    log_inv_delta: f64,
    run: Forecaster,
    splits: Vec<Forecaster>,
}

impl Rbocd {
    pub fn new(config: RbocdConfig) -> Result<Self> {
        if !(config.delta > 0.0 && config.delta < 1.0) {
            return Err(Error::OutOfRange {
                what: "detector delta",
                value: config.delta,
            });
        }
        Ok(Self {
            config,
            log_inv_delta: -config.delta.ln(),
            run: Forecaster {
                offset: 0,
                n: 0,
                successes: 0.0,
                log_weight: 0.0,
            },
            splits: Vec::with_capacity(config.max_candidates + 1),
        })
    }

    pub fn with_delta(delta: f64) -> Result<Self> {
        Self::new(RbocdConfig::new(delta))
    }

    pub fn config(&self) -> RbocdConfig {
        self.config
    }

    pub fn delta(&self) -> f64 {
        self.config.delta
    }

    /// Observations since the last restart.
    pub fn run_length(&self) -> u64 {
        self.run.n
    }

    /// Candidate starts currently tracked, the run start included.
    pub fn tracked_starts(&self) -> usize {
        if self.run.n == 0 {
            0
        } else {
            1 + self.splits.len()
        }
    }

    fn threshold(&self, offset: u64, run_len: u64) -> f64 {
        let m = offset as f64;
        (m * (m + 1.0)).ln() + self.log_inv_delta + (run_len as f64 + 1.0).ln()
    }

    /// Largest split statistic `ln w_s - ln w_r - threshold` over tracked
    /// candidates; positive values trigger a restart.
    pub fn max_margin(&self) -> Option<f64> {
        self.splits
            .iter()
            .map(|f| f.log_weight - self.run.log_weight - self.threshold(f.offset, self.run.n))
            .reduce(f64::max)
    }

    /// Normalized forecaster weights as `(observations before start, weight)`,
    /// run start first.
    pub fn weights(&self) -> Vec<(u64, f64)> {
        if self.run.n == 0 {
            return Vec::new();
        }
        let all: Vec<(u64, f64)> = std::iter::once((0, self.run.log_weight))
            .chain(self.splits.iter().map(|f| (f.offset, f.log_weight)))
            .collect();
        let peak = all
            .iter()
            .map(|&(_, w)| w)
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = all.iter().map(|&(_, w)| (w - peak).exp()).sum();
        all.into_iter()
            .map(|(s, w)| (s, (w - peak).exp() / total))
            .collect()
    }

    /// Checked variant of [`ChangeDetector::update`].
    pub fn observe(&mut self, x: f64) -> Result<bool> {
        check_unit("observation", x)?;
        Ok(self.update(x))
    }

    fn prune(&mut self) {
        while self.splits.len() > self.config.max_candidates {
            let lightest = self
                .splits
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.log_weight.total_cmp(&b.1.log_weight))
                .map(|(i, _)| i)
                .expect("non-empty");
            self.splits.swap_remove(lightest);
        }
    }
}

impl ChangeDetector for Rbocd {
    fn update(&mut self, x: f64) -> bool {
        if self.run.n > 0 {
            self.splits.push(Forecaster {
                offset: self.run.n,
                n: 0,
                successes: 0.0,
                log_weight: self.run.log_weight,
            });
        }
        self.run.observe(x);
        let mut alarm = false;
        let run_len = self.run.n;
        let base = self.run.log_weight;
        for f in &mut self.splits {
            f.observe(x);
        }
        for f in &self.splits {
            if f.log_weight - base > self.threshold(f.offset, run_len) {
                alarm = true;
                break;
            }
        }
        if alarm {
            self.reset();
        } else {
            self.prune();
        }
        alarm
    }

    fn reset(&mut self) {
        self.run = Forecaster {
            offset: 0,
            n: 0,
            successes: 0.0,
            log_weight: 0.0,
        };
        self.splits.clear();
    }
}

/// Empirical false-alarm behaviour on stationary Bernoulli(0.5) streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalseAlarmReport {
    pub delta: f64,
    pub horizon: usize,
    pub trials: usize,
    /// Fraction of streams with at least one alarm.
    pub rate: f64,
    pub rate_stderr: f64,
    /// Mean number of alarms per stream.
    pub mean_alarms: f64,
    pub mean_alarms_stderr: f64,
    /// `delta * horizon`.
    pub bound: f64,
}

impl FalseAlarmReport {
    /// Mean alarm count within `bound + 3 SE`.
    pub fn within_bound(&self) -> bool {
        self.mean_alarms <= self.bound + 3.0 * self.mean_alarms_stderr
    }
}

pub fn empirical_false_alarm_rate(
    config: RbocdConfig,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<FalseAlarmReport> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    let mut detector = Rbocd::new(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        detector.reset();
        let mut alarms = 0usize;
        for _ in 0..horizon {
            let x = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            if detector.update(x) {
                alarms += 1;
            }
        }
        counts.push(alarms as f64);
    }
    let n = trials as f64;
    let mean_alarms = counts.iter().sum::<f64>() / n;
    let var = counts
        .iter()
        .map(|c| (c - mean_alarms).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let rate = counts.iter().filter(|&&c| c > 0.0).count() as f64 / n;
    Ok(FalseAlarmReport {
        delta: config.delta,
        horizon,
        trials,
        rate,
        rate_stderr: (rate * (1.0 - rate) / n).sqrt(),
        mean_alarms,
        mean_alarms_stderr: (var / n).sqrt(),
        bound: config.delta * horizon as f64,
    })
}

/// Outcome of one abrupt-change trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayOutcome {
    /// Alarm before the change, at this 1-based sample index.
    FalseAlarm(usize),
    /// Alarm this many samples after the change (1 = first post-change sample).
    Detected(usize),
    Missed,
}

/// Feeds `pre_len` Bernoulli(`pre_mean`) samples then up to `max_post`
/// Bernoulli(`post_mean`) samples to a fresh detector.
pub fn change_trial<R: Rng + ?Sized>(
    config: RbocdConfig,
    pre_mean: f64,
    post_mean: f64,
    pre_len: usize,
    max_post: usize,
    rng: &mut R,
) -> Result<DelayOutcome> {
    check_unit("pre-change mean", pre_mean)?;
    check_unit("post-change mean", post_mean)?;
    let mut detector = Rbocd::new(config)?;
    for i in 0..pre_len {
        let x = if rng.random_bool(pre_mean) { 1.0 } else { 0.0 };
        if detector.update(x) {
            return Ok(DelayOutcome::FalseAlarm(i + 1));
        }
    }
    for k in 0..max_post {
        let x = if rng.random_bool(post_mean) { 1.0 } else { 0.0 };
        if detector.update(x) {
            return Ok(DelayOutcome::Detected(k + 1));
        }
    }
    Ok(DelayOutcome::Missed)
}
