//! Energy-efficient power selection for joint communications and sensing.
//!
//! Each arm is a transmit power level. A round draws independent Rayleigh
//! fading for the communication and radar links, evaluates the data
//! information rate (DIR), the detection probability (PD) and the consumed
//! power, and rewards the two energy efficiencies DIR/P_tot and PD/P_tot.

use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::{check_arm, check_breakpoints, check_round, even_breakpoints, marcum_q1, Environment};
use crate::error::{Error, Result};
use crate::pareto::{pareto_front, MeanMatrix};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// How the minimum-DIR and minimum-PD constraints enter the reward.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Both objectives are zero when either constraint fails.
    #[default]
    Zero,
    /// Only the objective whose constraint fails is zeroed.
    DropObjective,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// A Bernoulli draw with the normalized efficiency as its mean.
    #[default]
    Bernoulli,
    /// The normalized efficiency itself.
    Bounded,
}

/// Which oracle efficiency an objective is divided by before clipping to
/// `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// The best mean efficiency over all segments and power levels.
    #[default]
    Global,
    /// The best mean efficiency over the power grid in the current segment.
    PerSegment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JcasParams {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub pathloss_exponent: f64,
    /// Mean power gain of the Rayleigh fading, in dB.
    pub fading_variance_db: f64,
    /// Circuit power `omega`, watts.
    pub circuit_power_w: f64,
    pub noise_psd_dbm_per_hz: f64,
    /// Bandwidth-proportional power cost `nu`, joules.
    pub nu_j: f64,
    /// Rate-proportional power cost `eta`, joules per bit.
    pub eta_j_per_bit: f64,
    /// Radar detection threshold; the false-alarm probability is `exp(-lambda)`.
    pub lambda: f64,
    pub p_min_dbm: f64,
    pub p_max_dbm: f64,
    pub num_levels: usize,
    pub dir_min: f64,
    pub pd_min: f64,
    /// Target distance of each segment, meters.
    pub distances_m: Vec<f64>,
    pub horizon: usize,
    /// Segment starts; evenly spaced when absent.
    pub breakpoints: Option<Vec<usize>>,
    pub constraint_mode: ConstraintMode,
    pub reward_mode: RewardMode,
    pub normalization: Normalization,
    /// Monte-Carlo draws per (segment, arm) for the oracle means.
    pub oracle_draws: usize,
    pub oracle_seed: u64,
    /// Minimum feasibility probability for an arm to count as feasible.
    pub feasibility_threshold: f64,
}

impl Default for JcasParams {
    fn default() -> Self {
        Self {
            carrier_hz: 60e9,
            bandwidth_hz: 2.6e9,
            pathloss_exponent: 2.0,
            fading_variance_db: 15.0,
            circuit_power_w: 2.0,
            noise_psd_dbm_per_hz: -174.0,
            nu_j: 1e-14,
            eta_j_per_bit: 1e-15,
            lambda: 5.0,
            p_min_dbm: 20.0,
            p_max_dbm: 40.0,
            num_levels: 9,
            dir_min: 1.0,
            pd_min: 0.9,
            distances_m: vec![10.0, 40.0, 80.0, 60.0, 100.0],
            horizon: 5000,
            breakpoints: None,
            constraint_mode: ConstraintMode::Zero,
            reward_mode: RewardMode::Bernoulli,
            normalization: Normalization::Global,
            oracle_draws: 100_000,
            oracle_seed: 0x6a63_6173,
            feasibility_threshold: 0.5,
        }
    }
}

/// DIR (bits/s/Hz), PD and total power (W) for one channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JcasMetrics {
    pub dir: f64,
    pub pd: f64,
    pub total_power_w: f64,
}

impl JcasMetrics {
    pub fn ee_dir(&self) -> f64 {
        self.dir / self.total_power_w
    }

    pub fn ee_pd(&self) -> f64 {
        self.pd / self.total_power_w
    }
}

impl JcasParams {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let params: Self = serde_json::from_str(&text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("pathloss_exponent", self.pathloss_exponent),
            ("lambda", self.lambda),
            ("dir_min", self.dir_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let finite = [
            ("fading_variance_db", self.fading_variance_db),
            ("noise_psd_dbm_per_hz", self.noise_psd_dbm_per_hz),
            ("p_min_dbm", self.p_min_dbm),
            ("p_max_dbm", self.p_max_dbm),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        let non_negative = [
            ("circuit_power_w", self.circuit_power_w),
            ("nu_j", self.nu_j),
            ("eta_j_per_bit", self.eta_j_per_bit),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.p_min_dbm >= self.p_max_dbm {
            return Err(Error::Config("p_min_dbm must be below p_max_dbm".into()));
        }
        if self.num_levels < 2 {
            return Err(Error::Config("need at least two power levels".into()));
        }
        if !(self.pd_min > 0.0 && self.pd_min < 1.0) {
            return Err(Error::Config(format!(
                "pd_min must be in (0, 1), got {}",
                self.pd_min
            )));
        }
        if !(0.0..=1.0).contains(&self.feasibility_threshold) {
            return Err(Error::Config(
                "feasibility_threshold must be in [0, 1]".into(),
            ));
        }
        if self.distances_m.is_empty()
            || self
                .distances_m
                .iter()
                .any(|&l| !(l > 0.0 && l.is_finite()))
        {
            return Err(Error::Config(
                "distances must be positive and non-empty".into(),
            ));
        }
        if self.horizon < self.distances_m.len() {
            return Err(Error::Config(
                "horizon shorter than the number of segments".into(),
            ));
        }
        if self.oracle_draws == 0 {
            return Err(Error::Config("oracle_draws must be positive".into()));
        }
        let breakpoints = self.segment_starts();
        check_breakpoints(&breakpoints, self.horizon)?;
        if breakpoints.len() + 1 != self.distances_m.len() {
            return Err(Error::Config(format!(
                "{} distances need {} breakpoints, got {}",
                self.distances_m.len(),
                self.distances_m.len() - 1,
                breakpoints.len()
            )));
        }
        Ok(())
    }

    pub fn segment_starts(&self) -> Vec<usize> {
        self.breakpoints
            .clone()
            .unwrap_or_else(|| even_breakpoints(self.horizon, self.distances_m.len()))
    }

    /// `P_min + k/(K-1) (P_max - P_min)` in dBm.
    pub fn power_dbm(&self, arm: usize) -> f64 {
        let step = (self.p_max_dbm - self.p_min_dbm) / (self.num_levels - 1) as f64;
        self.p_min_dbm + arm as f64 * step
    }

    pub fn power_levels_dbm(&self) -> Vec<f64> {
        (0..self.num_levels).map(|k| self.power_dbm(k)).collect()
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_per_hz) * self.bandwidth_hz
    }

    /// Free-space reference loss times the distance power law.
    pub fn pathloss(&self, distance_m: f64) -> f64 {
        let wavelength_term = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * self.carrier_hz);
        wavelength_term * wavelength_term * distance_m.powf(-self.pathloss_exponent)
    }

    pub fn mean_fading_gain(&self) -> f64 {
        10f64.powf(self.fading_variance_db / 10.0)
    }

    /// Independent faded channel gains `(G_c, G_r)` at a distance.
    pub fn draw_gains<R: Rng + ?Sized>(&self, distance_m: f64, rng: &mut R) -> (f64, f64) {
        let fading = Exp::new(1.0 / self.mean_fading_gain()).expect("positive rate");
        let pl = self.pathloss(distance_m);
        (pl * fading.sample(rng), pl * fading.sample(rng))
    }

    pub fn metrics(&self, power_dbm: f64, gain_comm: f64, gain_radar: f64) -> JcasMetrics {
        let p = dbm_to_watts(power_dbm);
        let noise = self.noise_power_w();
        let dir = (1.0 + p * gain_comm / noise).log2();
        let pd = marcum_q1(
            (2.0 * p * gain_radar / noise).sqrt(),
            (2.0 * self.lambda).sqrt(),
        );
        let total_power_w = self.circuit_power_w
            + p
            + self.nu_j * self.bandwidth_hz
            + self.eta_j_per_bit * self.bandwidth_hz * dir;
        JcasMetrics {
            dir,
            pd,
            total_power_w,
        }
    }

    pub fn is_feasible(&self, m: &JcasMetrics) -> bool {
        m.dir >= self.dir_min && m.pd >= self.pd_min
    }

    /// Raw (unnormalized) efficiencies after constraint handling.
    pub fn objectives(&self, m: &JcasMetrics) -> [f64; 2] {
        let dir_ok = m.dir >= self.dir_min;
        let pd_ok = m.pd >= self.pd_min;
        match self.constraint_mode {
            ConstraintMode::Zero if dir_ok && pd_ok => [m.ee_dir(), m.ee_pd()],
            ConstraintMode::Zero => [0.0, 0.0],
            ConstraintMode::DropObjective => [
                if dir_ok { m.ee_dir() } else { 0.0 },
                if pd_ok { m.ee_pd() } else { 0.0 },
            ],
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Monte-Carlo ground truth for every (segment, arm).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JcasOracle {
    /// Per-segment, per-objective divisor of the raw efficiencies.
    pub scales: Vec<[f64; 2]>,
    /// Raw mean efficiencies, `[segment][arm]`.
    pub raw_means: Vec<Vec<[f64; 2]>>,
    /// Probability that both constraints hold, `[segment][arm]`.
    pub feasibility: Vec<Vec<f64>>,
    /// Means of the normalized, clipped rewards.
    pub means: Vec<MeanMatrix>,
    /// Pareto front restricted to feasible arms, per segment.
    pub feasible_fronts: Vec<Vec<usize>>,
}

impl JcasOracle {
    pub fn compute(params: &JcasParams) -> Result<Self> {
        params.validate()?;
        let k = params.num_levels;
        let segments = params.distances_m.len();
        let draws = params.oracle_draws;
        let stream = |s: usize, arm: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.oracle_seed);
            rng.set_stream((s * k + arm) as u64);
            rng
        };

        let mut raw_means = vec![vec![[0.0; 2]; k]; segments];
        let mut feasibility = vec![vec![0.0; k]; segments];
        for (s, &distance) in params.distances_m.iter().enumerate() {
            for arm in 0..k {
                let mut rng = stream(s, arm);
                let p = params.power_dbm(arm);
                let (mut sum, mut feasible) = ([0.0; 2], 0usize);
                for _ in 0..draws {
                    let (gc, gr) = params.draw_gains(distance, &mut rng);
                    let m = params.metrics(p, gc, gr);
                    let o = params.objectives(&m);
                    sum[0] += o[0];
                    sum[1] += o[1];
                    feasible += params.is_feasible(&m) as usize;
                }
                raw_means[s][arm] = [sum[0] / draws as f64, sum[1] / draws as f64];
                feasibility[s][arm] = feasible as f64 / draws as f64;
            }
        }

        let best = |rows: &[[f64; 2]]| {
            rows.iter()
                .fold([0.0f64; 2], |acc, r| [acc[0].max(r[0]), acc[1].max(r[1])])
        };
        let global = best(&raw_means.concat());
        if global.iter().any(|&s| s <= 0.0) {
            return Err(Error::Config(
                "no power level ever satisfies the constraints; rewards would be identically zero"
                    .into(),
            ));
        }
        // a segment where nothing is ever feasible keeps all-zero rewards
        let scales: Vec<[f64; 2]> = match params.normalization {
            Normalization::Global => vec![global; segments],
            Normalization::PerSegment => raw_means
                .iter()
                .map(|rows| best(rows).map(|s| if s > 0.0 { s } else { 1.0 }))
                .collect(),
        };

        let mut means = Vec::with_capacity(segments);
        for (s, &distance) in params.distances_m.iter().enumerate() {
            let mut rows = Vec::with_capacity(k);
            for arm in 0..k {
                let mut rng = stream(s, arm);
                let p = params.power_dbm(arm);
                let mut sum = [0.0; 2];
                for _ in 0..draws {
                    let (gc, gr) = params.draw_gains(distance, &mut rng);
                    let o = params.objectives(&params.metrics(p, gc, gr));
                    sum[0] += normalize(o[0], scales[s][0]);
                    sum[1] += normalize(o[1], scales[s][1]);
                }
                rows.push(vec![sum[0] / draws as f64, sum[1] / draws as f64]);
            }
            means.push(MeanMatrix::new(rows)?);
        }

        let feasible_fronts = means
            .iter()
            .zip(&feasibility)
            .map(|(m, feas)| {
                let arms: Vec<usize> = (0..k)
                    .filter(|&i| feas[i] >= params.feasibility_threshold)
                    .collect();
                let rows: Vec<&[f64]> = arms.iter().map(|&i| m.row(i)).collect();
                pareto_front(&rows).into_iter().map(|j| arms[j]).collect()
            })
            .collect();

        Ok(Self {
            scales,
            raw_means,
            feasibility,
            means,
            feasible_fronts,
        })
    }
}

fn normalize(value: f64, scale: f64) -> f64 {
    (value / scale).clamp(0.0, 1.0)
}

/// The JCAS power-selection bandit.
#[derive(Debug, Clone)]
pub struct JcasEnvironment {
    params: JcasParams,
    oracle: JcasOracle,
    breakpoints: Vec<usize>,
}

impl JcasEnvironment {
    /// Validates the parameters and runs the Monte-Carlo oracle.
    pub fn new(params: JcasParams) -> Result<Self> {
        let oracle = JcasOracle::compute(&params)?;
        Ok(Self {
            breakpoints: params.segment_starts(),
            params,
            oracle,
        })
    }

    pub fn params(&self) -> &JcasParams {
        &self.params
    }

    pub fn oracle(&self) -> &JcasOracle {
        &self.oracle
    }
}

impl Environment for JcasEnvironment {
    fn name(&self) -> String {
        format!(
            "jcas(K={},segments={})",
            self.params.num_levels,
            self.params.distances_m.len()
        )
    }

    fn num_arms(&self) -> usize {
        self.params.num_levels
    }

    fn num_objectives(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    fn active_means(&self, t: usize) -> Result<&MeanMatrix> {
        Ok(&self.oracle.means[self.segment_of(t)?])
    }

    fn sample_into(
        &self,
        arm: usize,
        t: usize,
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        check_round(t, self.params.horizon)?;
        check_arm(arm, self.params.num_levels)?;
        let segment = self.segment_of(t)?;
        let distance = self.params.distances_m[segment];
        let (gc, gr) = self.params.draw_gains(distance, rng);
        let o = self
            .params
            .objectives(&self.params.metrics(self.params.power_dbm(arm), gc, gr));
        for ((slot, value), scale) in out.iter_mut().zip(o).zip(self.oracle.scales[segment]) {
            let v = normalize(value, scale);
            *slot = match self.params.reward_mode {
                RewardMode::Bounded => v,
                RewardMode::Bernoulli => {
                    if rng.random_bool(v) {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
        Ok(())
    }

    /// The feasible Pareto front, or the full front when no arm is feasible.
    fn optimal_arms(&self, t: usize) -> Result<Vec<usize>> {
        let s = self.segment_of(t)?;
        let front = &self.oracle.feasible_fronts[s];
        Ok(if front.is_empty() {
            self.oracle.means[s].front()
        } else {
            front.clone()
        })
    }
}
