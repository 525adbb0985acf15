//! Monte-Carlo checks of the multi-dimensional concentration inequalities,
//! the logarithmic regret shape and the restart count.
//!
//! Events use the dominance relation of [`crate::pareto::dominates`]:
//!
//! | id | event | bound |
//! |----|-------|-------|
//! | joint | `X` dominates `A` | `min_j P{X^j >= A^j} <= min_j E[X^j] / A^j` |
//! | 1 | `mu_hat` dominates `mu + eps` | `exp(-n D(mu + eps, mu))` |
//! | 2 | `mu - eps` dominates `mu_hat` | `exp(-n D(mu - eps, mu))` |
//! | 3 | `D(mu_hat, mu) >= rho` and `mu` dominates `mu_hat` | `exp(-n rho)` |
//! | 4 | `D(mu_hat, mu) >= rho` and `mu_hat` dominates `mu` | `exp(-n rho)` |
//! | 5 | `mu` dominates `U(rho)` | `exp(-n rho)` |
//!
//! `D` is the coordinate-wise maximum Bernoulli KL divergence, `mu_hat` the
//! mean of `n` Bernoulli draws per coordinate and `U(rho)` the
//! coordinate-wise KL upper confidence bound of `mu_hat` at radius `rho`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp};
use serde::Serialize;

use super::{mean_stderr, run_replication, ResolvedPolicy};
use crate::divergence::Divergence;
use crate::environments::{Environment, PiecewiseBernoulli};
use crate::error::{check_dims, Error, Result};
use crate::pareto::{dominates_unchecked, MeanMatrix};
use crate::policies::PolicyConfig;

const SE_SLACK: f64 = 3.0;

fn binomial_se(p: f64, samples: usize) -> f64 {
    (p * (1.0 - p) / samples as f64).sqrt()
}

/// One coordinate distribution for the joint-tail check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    Bernoulli { p: f64 },
    Uniform { lower: f64, upper: f64 },
    Exponential { mean: f64 },
}

impl Component {
    pub fn mean(&self) -> f64 {
        match *self {
            Component::Bernoulli { p } => p,
            Component::Uniform { lower, upper } => 0.5 * (lower + upper),
            Component::Exponential { mean } => mean,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Component::Bernoulli { p } => (0.0..=1.0).contains(&p),
            Component::Uniform { lower, upper } => {
                lower >= 0.0 && upper > lower && upper.is_finite()
            }
            Component::Exponential { mean } => mean > 0.0 && mean.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid non-negative distribution {self:?}"
            )))
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Component::Bernoulli { p } => rng.random_bool(p) as u8 as f64,
            Component::Uniform { lower, upper } => rng.random_range(lower..upper),
            Component::Exponential { mean } => Exp::new(1.0 / mean).expect("positive").sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Config {
    pub components: Vec<Component>,
    pub threshold: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub config: Lemma1Config,
    pub samples: usize,
    pub empirical: f64,
    pub stderr: f64,
    /// Empirical `min_j P{X^j >= A^j}`.
    pub marginal_bound: f64,
    /// `min_j E[X^j] / A^j` from the exact means.
    pub markov_bound: f64,
    pub holds: bool,
}

pub fn verify_lemma1<R: Rng + ?Sized>(
    config: &Lemma1Config,
    samples: usize,
    rng: &mut R,
) -> Result<Lemma1Report> {
    if samples < 100_000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1e5 samples, got {samples}"
        )));
    }
    let d = config.components.len();
    if d == 0 {
        return Err(Error::InvalidArgument(
            "need at least one coordinate".into(),
        ));
    }
    check_dims(d, config.threshold.len())?;
    for c in &config.components {
        c.validate()?;
    }
    if config
        .threshold
        .iter()
        .any(|&a| !(a > 0.0 && a.is_finite()))
    {
        return Err(Error::InvalidArgument("thresholds must be positive".into()));
    }
    let mut x = vec![0.0; d];
    let mut joint = 0usize;
    let mut marginal = vec![0usize; d];
    for _ in 0..samples {
        for (xj, c) in x.iter_mut().zip(&config.components) {
            *xj = c.sample(rng);
        }
        joint += dominates_unchecked(&x, &config.threshold) as usize;
        for ((m, xj), a) in marginal.iter_mut().zip(&x).zip(&config.threshold) {
            *m += (xj >= a) as usize;
        }
    }
    let empirical = joint as f64 / samples as f64;
    let stderr = binomial_se(empirical, samples);
    let marginal_bound = marginal
        .iter()
        .map(|&m| m as f64 / samples as f64)
        .fold(f64::INFINITY, f64::min);
    let markov_bound = config
        .components
        .iter()
        .zip(&config.threshold)
        .map(|(c, a)| c.mean() / a)
        .fold(f64::INFINITY, f64::min);
    let slack = SE_SLACK * stderr;
    Ok(Lemma1Report {
        config: config.clone(),
        samples,
        empirical,
        stderr,
        marginal_bound,
        markov_bound,
        holds: empirical <= marginal_bound + slack && empirical <= markov_bound + slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma2Config {
    pub mu: Vec<f64>,
    pub epsilon: Vec<f64>,
    /// Scalar radius `rho` of inequalities 3 to 5.
    pub radius: f64,
    pub n: usize,
}

impl Lemma2Config {
    pub fn validate(&self) -> Result<()> {
        if self.mu.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one coordinate".into(),
            ));
        }
        check_dims(self.mu.len(), self.epsilon.len())?;
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "radius must be >= 0, got {}",
                self.radius
            )));
        }
        for (&m, &e) in self.mu.iter().zip(&self.epsilon) {
            let ok = (0.0..=1.0).contains(&m) && e >= 0.0 && m - e >= 0.0 && m + e <= 1.0;
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "mu = {m}, epsilon = {e} leaves [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// The exponential bounds of inequalities 1 to 5, in order.
    pub fn bounds(&self) -> [f64; 5] {
        let kl = Divergence::KlBernoulli;
        let plus: Vec<f64> = self
            .mu
            .iter()
            .zip(&self.epsilon)
            .map(|(m, e)| m + e)
            .collect();
        let minus: Vec<f64> = self
            .mu
            .iter()
            .zip(&self.epsilon)
            .map(|(m, e)| m - e)
            .collect();
        let n = self.n as f64;
        let radius_bound = (-n * self.radius).exp();
        [
            (-n * kl.max_over_unchecked(&plus, &self.mu)).exp(),
            (-n * kl.max_over_unchecked(&minus, &self.mu)).exp(),
            radius_bound,
            radius_bound,
            radius_bound,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub inequality: u8,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma2Report {
    pub config: Lemma2Config,
    pub samples: usize,
    pub checks: Vec<BoundCheck>,
    pub holds: bool,
}

/// Estimates the probabilities of the five events by simulating the
/// per-coordinate success counts of `n` Bernoulli draws.
pub fn verify_lemma2<R: Rng + ?Sized>(
    config: &Lemma2Config,
    samples: usize,
    rng: &mut R,
) -> Result<Lemma2Report> {
    config.validate()?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let d = config.mu.len();
    let n = config.n;
    let kl = Divergence::KlBernoulli;
    let plus: Vec<f64> = config
        .mu
        .iter()
        .zip(&config.epsilon)
        .map(|(m, e)| m + e)
        .collect();
    let minus: Vec<f64> = config
        .mu
        .iter()
        .zip(&config.epsilon)
        .map(|(m, e)| m - e)
        .collect();
    // per-coordinate lookups indexed by the success count
    let means: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let kl_table: Vec<Vec<f64>> = config
        .mu
        .iter()
        .map(|&m| means.iter().map(|&p| kl.d(p, m)).collect())
        .collect();
    let ucb_table: Vec<f64> = means
        .iter()
        .map(|&p| kl.ucb_unchecked(p, config.radius))
        .collect();
    let draws: Vec<Binomial> = config
        .mu
        .iter()
        .map(|&m| Binomial::new(n as u64, m).map_err(|e| Error::InvalidArgument(e.to_string())))
        .collect::<Result<_>>()?;

    let mut counts = [0usize; 5];
    let mut k = vec![0usize; d];
    let mut hat = vec![0.0; d];
    let mut upper = vec![0.0; d];
    for _ in 0..samples {
        for j in 0..d {
            k[j] = draws[j].sample(rng) as usize;
            hat[j] = means[k[j]];
            upper[j] = ucb_table[k[j]];
        }
        let divergence = (0..d).map(|j| kl_table[j][k[j]]).fold(0.0, f64::max);
        let far = divergence >= config.radius;
        counts[0] += dominates_unchecked(&hat, &plus) as usize;
        counts[1] += dominates_unchecked(&minus, &hat) as usize;
        counts[2] += (far && dominates_unchecked(&config.mu, &hat)) as usize;
        counts[3] += (far && dominates_unchecked(&hat, &config.mu)) as usize;
        counts[4] += dominates_unchecked(&config.mu, &upper) as usize;
    }
    let checks: Vec<BoundCheck> = counts
        .iter()
        .zip(config.bounds())
        .zip(1u8..)
        .map(|((&c, bound), inequality)| {
            let empirical = c as f64 / samples as f64;
            let stderr = binomial_se(empirical, samples);
            BoundCheck {
                inequality,
                empirical,
                stderr,
                bound,
                holds: empirical <= bound + SE_SLACK * stderr,
            }
        })
        .collect();
    Ok(Lemma2Report {
        config: config.clone(),
        samples,
        holds: checks.iter().all(|c| c.holds),
        checks,
    })
}

/// Random joint-tail instances; the first is two Bernoulli(0.3) coordinates
/// against `A = (0.5, 0.5)`.
pub fn random_lemma1_configs(count: usize, seed: u64) -> Vec<Lemma1Config> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configs = vec![Lemma1Config {
        components: vec![Component::Bernoulli { p: 0.3 }; 2],
        threshold: vec![0.5, 0.5],
    }];
    while configs.len() < count {
        let d = rng.random_range(1..=4);
        let mut components = Vec::with_capacity(d);
        let mut threshold = Vec::with_capacity(d);
        for _ in 0..d {
            let c = match rng.random_range(0..3) {
                0 => Component::Bernoulli {
                    p: rng.random_range(0.05..0.95),
                },
                1 => {
                    let lower = rng.random_range(0.0..0.5);
                    Component::Uniform {
                        lower,
                        upper: lower + rng.random_range(0.1..1.0),
                    }
                }
                _ => Component::Exponential {
                    mean: rng.random_range(0.1..2.0),
                },
            };
            threshold.push(c.mean() * rng.random_range(0.3..3.0));
            components.push(c);
        }
        configs.push(Lemma1Config {
            components,
            threshold,
        });
    }
    configs.truncate(count);
    configs
}

/// Random sample-mean instances. The first is the scalar case `mu = 0.5`,
/// `eps = 0.2`, `n = 50`; the second has three heterogeneous coordinates.
pub fn random_lemma2_configs(count: usize, seed: u64) -> Vec<Lemma2Config> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configs = vec![
        Lemma2Config {
            mu: vec![0.5],
            epsilon: vec![0.2],
            radius: 0.05,
            n: 50,
        },
        Lemma2Config {
            mu: vec![0.2, 0.5, 0.8],
            epsilon: vec![0.1, 0.15, 0.1],
            radius: 0.05,
            n: 40,
        },
    ];
    while configs.len() < count {
        let d = rng.random_range(1..=4);
        let mu: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..0.95)).collect();
        let epsilon = mu
            .iter()
            .map(|&m: &f64| m.min(1.0 - m) * rng.random_range(0.05..0.9))
            .collect();
        let n = [1, 2, 5, 10, 20, 50, 100, 200][rng.random_range(0..8)];
        configs.push(Lemma2Config {
            mu,
            epsilon,
            radius: rng.random_range(0.005..0.3),
            n,
        });
    }
    configs.truncate(count);
    configs
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lemma1: Vec<Lemma1Report>,
    pub lemma2: Vec<Lemma2Report>,
    pub passed: bool,
}

pub fn lemma1_battery(count: usize, samples: usize, seed: u64) -> Result<Vec<Lemma1Report>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_lemma1_configs(count, seed)
        .iter()
        .map(|c| verify_lemma1(c, samples, &mut rng))
        .collect()
}

pub fn lemma2_battery(count: usize, samples: usize, seed: u64) -> Result<Vec<Lemma2Report>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    random_lemma2_configs(count, seed)
        .iter()
        .map(|c| verify_lemma2(c, samples, &mut rng))
        .collect()
}

impl BoundsReport {
    pub fn run(configs: usize, samples: usize, seed: u64) -> Result<Self> {
        let lemma1 = lemma1_battery(configs, samples, seed)?;
        let lemma2 = lemma2_battery(configs, samples, seed)?;
        let passed = lemma1.iter().all(|r| r.holds) && lemma2.iter().all(|r| r.holds);
        Ok(Self {
            lemma1,
            lemma2,
            passed,
        })
    }
}

/// `sum_i Delta_i / min_{i*} D(mu_i, mu_{i*})` over dominated arms `i`,
/// with `i*` ranging over the Pareto front.
pub fn log_regret_coefficient(means: &MeanMatrix, divergence: Divergence) -> f64 {
    let front = means.front();
    (0..means.num_arms())
        .filter(|i| !front.contains(i))
        .map(|i| {
            let gap = crate::pareto::regret_against_front(i, means, &front);
            let closest = front
                .iter()
                .map(|&s| divergence.max_over_unchecked(means.row(i), means.row(s)))
                .fold(f64::INFINITY, f64::min);
            gap / closest
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretShapeConfig {
    pub means: MeanMatrix,
    pub policy: PolicyConfig,
    pub horizons: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    /// Allowed ratio between the measured slope and the coefficient.
    pub slope_factor: f64,
}

impl RegretShapeConfig {
    /// Three arms, two objectives: two front arms and one arm dominated by
    /// the same margin in both objectives.
    pub fn default_instance() -> Self {
        let means =
            MeanMatrix::new(vec![vec![0.8, 0.8], vec![0.9, 0.3], vec![0.5, 0.5]]).expect("valid");
        Self {
            policy: PolicyConfig::new(3, 2),
            means,
            horizons: vec![2_000, 10_000, 50_000],
            runs: 100,
            seed: 0,
            slope_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretShapeReport {
    pub horizons: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean `R(T) / ln T` per horizon.
    pub ratios: Vec<f64>,
    /// Mean and standard error of the paired change in `R(T) / ln T`
    /// between consecutive horizons.
    pub ratio_changes: Vec<(f64, f64)>,
    pub coefficient: f64,
    /// Mean secant slope of `R` against `ln T` over the last two horizons.
    pub final_slope: f64,
    pub final_slope_stderr: f64,
    pub slope_limit: f64,
    pub non_increasing: bool,
    pub slope_ok: bool,
    pub passed: bool,
}

pub fn verify_regret_shape(config: &RegretShapeConfig) -> Result<RegretShapeReport> {
    if config.horizons.len() < 2 || config.horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "need at least two increasing horizons".into(),
        ));
    }
    if config.horizons[0] < 2 {
        return Err(Error::InvalidArgument("horizons must be at least 2".into()));
    }
    if config.runs < 2 {
        return Err(Error::InvalidArgument("need at least two runs".into()));
    }
    if config.policy.num_arms != config.means.num_arms()
        || config.policy.num_objectives != config.means.num_objectives()
    {
        return Err(Error::InvalidArgument(
            "policy and instance shapes differ".into(),
        ));
    }
    let last = *config.horizons.last().expect("non-empty");
    let env = PiecewiseBernoulli::stationary(config.means.clone(), last)?;
    let policy = ResolvedPolicy::ParetoUcb {
        config: config.policy,
    };
    // regret[h][r]
    let mut regret = vec![Vec::with_capacity(config.runs); config.horizons.len()];
    for r in 0..config.runs {
        let trace = run_replication(&env, &policy, last, config.seed.wrapping_add(r as u64))?;
        for (h, &t) in config.horizons.iter().enumerate() {
            regret[h].push(trace.cumulative[t - 1]);
        }
    }
    let runs = config.runs;
    let logs: Vec<f64> = config.horizons.iter().map(|&t| (t as f64).ln()).collect();
    let (mean_regret, stderr): (Vec<f64>, Vec<f64>) = regret
        .iter()
        .map(|v| mean_stderr(v.iter().copied(), runs))
        .unzip();
    let ratios: Vec<f64> = mean_regret.iter().zip(&logs).map(|(m, l)| m / l).collect();
    let ratio_changes: Vec<(f64, f64)> = (1..config.horizons.len())
        .map(|h| {
            let diffs = (0..runs).map(|r| regret[h][r] / logs[h] - regret[h - 1][r] / logs[h - 1]);
            mean_stderr(diffs, runs)
        })
        .collect();
    let non_increasing = ratio_changes.iter().all(|&(m, se)| m <= SE_SLACK * se);
    let h = config.horizons.len() - 1;
    let slopes = (0..runs).map(|r| (regret[h][r] - regret[h - 1][r]) / (logs[h] - logs[h - 1]));
    let (final_slope, final_slope_stderr) = mean_stderr(slopes, runs);
    let coefficient = log_regret_coefficient(&config.means, config.policy.divergence);
    let slope_limit = config.slope_factor * coefficient;
    let slope_ok = final_slope <= slope_limit + SE_SLACK * final_slope_stderr;
    Ok(RegretShapeReport {
        horizons: config.horizons.clone(),
        mean_regret,
        stderr,
        ratios,
        ratio_changes,
        coefficient,
        final_slope,
        final_slope_stderr,
        slope_limit,
        non_increasing,
        slope_ok,
        passed: non_increasing && slope_ok,
    })
}

/// Restart count of a change-detecting policy against `breakpoints + delta T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlarmAudit {
    pub policy: String,
    pub breakpoints: usize,
    pub delta: f64,
    pub horizon: usize,
    pub runs: usize,
    pub mean_alarms: f64,
    pub stderr: f64,
    pub bound: f64,
    pub mean_final_regret: f64,
    pub within: bool,
}

pub fn alarm_audit(
    env: &dyn Environment,
    policy: &ResolvedPolicy,
    horizon: usize,
    runs: usize,
    seed: u64,
) -> Result<AlarmAudit> {
    let ResolvedPolicy::RbocdParetoUcb { detector, .. } = policy else {
        return Err(Error::InvalidArgument(
            "alarm audit needs a change-detecting policy".into(),
        ));
    };
    if runs < 2 {
        return Err(Error::InvalidArgument("need at least two runs".into()));
    }
    let mut alarms = Vec::with_capacity(runs);
    let mut finals = Vec::with_capacity(runs);
    for r in 0..runs {
        let trace = run_replication(env, policy, horizon, seed.wrapping_add(r as u64))?;
        alarms.push(trace.alarms.len() as f64);
        finals.push(trace.final_regret());
    }
    let (mean_alarms, stderr) = mean_stderr(alarms.iter().copied(), runs);
    let breakpoints = env.breakpoints().iter().filter(|&&b| b <= horizon).count();
    let bound = breakpoints as f64 + detector.delta * horizon as f64;
    Ok(AlarmAudit {
        policy: policy.name(),
        breakpoints,
        delta: detector.delta,
        horizon,
        runs,
        mean_alarms,
        stderr,
        bound,
        mean_final_regret: mean_stderr(finals.iter().copied(), runs).0,
        within: mean_alarms <= bound + SE_SLACK * stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_bound() {
        let c = Lemma2Config {
            mu: vec![0.5],
            epsilon: vec![0.2],
            radius: 0.05,
            n: 50,
        };
        let b = c.bounds();
        assert!((b[0] - 0.0163399).abs() < 1e-6, "{}", b[0]);
        let zero = Lemma2Config {
            mu: vec![0.3, 0.6],
            epsilon: vec![0.0, 0.0],
            radius: 0.0,
            n: 10,
        };
        assert!(zero.bounds().iter().all(|&b| b == 1.0));
    }

    #[test]
    fn sample_mean_config_validation() {
        let bad = Lemma2Config {
            mu: vec![0.9],
            epsilon: vec![0.2],
            radius: 0.1,
            n: 5,
        };
        assert!(bad.validate().is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(verify_lemma2(&bad, 10, &mut rng).is_err());
    }

    #[test]
    fn joint_tail_degenerate_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let below = Lemma1Config {
            components: vec![Component::Uniform {
                lower: 0.5,
                upper: 1.0,
            }],
            threshold: vec![0.25],
        };
        let r = verify_lemma1(&below, 100_000, &mut rng).unwrap();
        assert_eq!(r.empirical, 1.0);
        assert!(r.markov_bound >= 1.0 && r.holds);
        assert!(verify_lemma1(&below, 10, &mut rng).is_err());
    }

    #[test]
    fn coefficient_of_default_instance() {
        let c = RegretShapeConfig::default_instance();
        let coef = log_regret_coefficient(&c.means, Divergence::KlBernoulli);
        let expected = 0.3 / crate::divergence::kl_bernoulli(0.5, 0.8);
        assert!((coef - expected).abs() < 1e-12);
        let flat = MeanMatrix::new(vec![vec![0.4, 0.4]; 3]).unwrap();
        assert_eq!(log_regret_coefficient(&flat, Divergence::KlBernoulli), 0.0);
    }

    #[test]
    fn batteries_are_reproducible() {
        assert_eq!(random_lemma2_configs(60, 3), random_lemma2_configs(60, 3));
        for c in random_lemma2_configs(200, 9) {
            c.validate().unwrap();
        }
        assert_eq!(random_lemma1_configs(5, 1)[0].threshold, vec![0.5, 0.5]);
    }
}
