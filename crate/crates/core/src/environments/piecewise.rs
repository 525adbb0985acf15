use std::path::Path;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{check_arm, check_breakpoints, check_round, Environment};
use crate::error::{Error, Result};
use crate::pareto::MeanMatrix;

/// File format of a piecewise-stationary Bernoulli bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSpec {
    #[serde(rename = "K")]
    pub num_arms: usize,
    #[serde(rename = "D")]
    pub num_objectives: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub breakpoints: Vec<usize>,
    pub segment_means: Vec<MeanMatrix>,
}

/// Independent Bernoulli objectives whose means are constant between
/// breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseSpec", into = "PiecewiseSpec")]
pub struct PiecewiseBernoulli {
    spec: PiecewiseSpec,
}

impl TryFrom<PiecewiseSpec> for PiecewiseBernoulli {
    type Error = Error;

    fn try_from(spec: PiecewiseSpec) -> Result<Self> {
        Self::new(spec)
    }
}

impl From<PiecewiseBernoulli> for PiecewiseSpec {
    fn from(env: PiecewiseBernoulli) -> Self {
        env.spec
    }
}

impl PiecewiseBernoulli {
    pub fn new(spec: PiecewiseSpec) -> Result<Self> {
        if spec.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        check_breakpoints(&spec.breakpoints, spec.horizon)?;
        if spec.segment_means.len() != spec.breakpoints.len() + 1 {
            return Err(Error::Config(format!(
                "{} breakpoints need {} segment mean matrices, got {}",
                spec.breakpoints.len(),
                spec.breakpoints.len() + 1,
                spec.segment_means.len()
            )));
        }
        for (s, m) in spec.segment_means.iter().enumerate() {
            if m.num_arms() != spec.num_arms || m.num_objectives() != spec.num_objectives {
                return Err(Error::Config(format!(
                    "segment {s} is {}x{}, expected {}x{}",
                    m.num_arms(),
                    m.num_objectives(),
                    spec.num_arms,
                    spec.num_objectives
                )));
            }
        }
        Ok(Self { spec })
    }

    /// A single stationary segment.
    pub fn stationary(means: MeanMatrix, horizon: usize) -> Result<Self> {
        Self::new(PiecewiseSpec {
            num_arms: means.num_arms(),
            num_objectives: means.num_objectives(),
            horizon,
            breakpoints: Vec::new(),
            segment_means: vec![means],
        })
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Built-in bank with 4 arms, 3 objectives, 4 breakpoints and 1500
    /// rounds. Every change moves at least one front arm.
    pub fn synthetic() -> Self {
        let seg1 = [
            [0.9, 0.8, 0.7],
            [0.3, 0.4, 0.2],
            [0.2, 0.3, 0.4],
            [0.4, 0.2, 0.3],
        ];
        let mut seg2 = seg1;
        seg2[0] = [0.1, 0.2, 0.2];
        seg2[1] = [0.8, 0.9, 0.7];
        let mut seg3 = seg2;
        seg3[1] = [0.2, 0.1, 0.3];
        seg3[2] = [0.7, 0.8, 0.9];
        seg3[3] = [0.9, 0.6, 0.5];
        let mut seg4 = seg3;
        seg4[2] = [0.2, 0.2, 0.1];
        seg4[0] = [0.6, 0.9, 0.8];
        let mut seg5 = seg4;
        seg5[3] = [0.1, 0.3, 0.2];
        seg5[1] = [0.8, 0.7, 0.9];
        let segment_means = [seg1, seg2, seg3, seg4, seg5]
            .iter()
            .map(|s| MeanMatrix::new(s.iter().map(|r| r.to_vec()).collect()).expect("valid means"))
            .collect();
        Self::new(PiecewiseSpec {
            num_arms: 4,
            num_objectives: 3,
            horizon: 1500,
            breakpoints: vec![301, 601, 901, 1201],
            segment_means,
        })
        .expect("valid synthetic spec")
    }

    pub fn spec(&self) -> &PiecewiseSpec {
        &self.spec
    }

    pub fn segment_means(&self) -> &[MeanMatrix] {
        &self.spec.segment_means
    }

    /// Same bank truncated or extended (last segment) to a new horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.horizon = horizon;
        Self::new(spec)
    }
}

impl Environment for PiecewiseBernoulli {
    fn name(&self) -> String {
        format!(
            "piecewise-bernoulli(K={},D={},breakpoints={})",
            self.spec.num_arms,
            self.spec.num_objectives,
            self.spec.breakpoints.len()
        )
    }

    fn num_arms(&self) -> usize {
        self.spec.num_arms
    }

    fn num_objectives(&self) -> usize {
        self.spec.num_objectives
    }

    fn horizon(&self) -> usize {
        self.spec.horizon
    }

    fn breakpoints(&self) -> &[usize] {
        &self.spec.breakpoints
    }

    fn active_means(&self, t: usize) -> Result<&MeanMatrix> {
        let s = self.segment_of(t)?;
        Ok(&self.spec.segment_means[s])
    }

    fn sample_into(
        &self,
        arm: usize,
        t: usize,
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        check_round(t, self.spec.horizon)?;
        check_arm(arm, self.spec.num_arms)?;
        let means = self.active_means(t)?.row(arm);
        for (o, &m) in out.iter_mut().zip(means) {
            *o = if rng.random_bool(m) { 1.0 } else { 0.0 };
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_segments() -> PiecewiseBernoulli {
        let a = MeanMatrix::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let b = MeanMatrix::new(vec![vec![0.37, 0.37], vec![0.5, 0.5]]).unwrap();
        PiecewiseBernoulli::new(PiecewiseSpec {
            num_arms: 2,
            num_objectives: 2,
            horizon: 20_000,
            breakpoints: vec![11],
            segment_means: vec![a, b],
        })
        .unwrap()
    }

    #[test]
    fn degenerate_means_are_deterministic() {
        let env = two_segments();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in 1..=10 {
            assert_eq!(env.sample(0, t, &mut rng).unwrap(), vec![1.0, 1.0]);
            assert_eq!(env.sample(1, t, &mut rng).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn empirical_mean_matches() {
        let env = two_segments();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let mut sum = [0.0; 2];
        for t in 11..11 + n {
            let r = env.sample(0, t, &mut rng).unwrap();
            sum[0] += r[0];
            sum[1] += r[1];
        }
        for s in sum {
            assert!((s / n as f64 - 0.37).abs() < 0.02);
        }
    }

    #[test]
    fn breakpoint_starts_new_segment() {
        let env = two_segments();
        assert_eq!(env.segment_of(1).unwrap(), 0);
        assert_eq!(env.segment_of(10).unwrap(), 0);
        assert_eq!(env.segment_of(11).unwrap(), 1);
        assert_eq!(env.active_means(11).unwrap().row(0), &[0.37, 0.37]);
        assert!(env.active_means(0).is_err());
        assert!(env.active_means(20_001).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(env.sample(2, 1, &mut rng).is_err());
    }

    #[test]
    fn synthetic_lookup_table() {
        let env = PiecewiseBernoulli::synthetic();
        let table: [(usize, usize, [f64; 3]); 8] = [
            (1, 0, [0.9, 0.8, 0.7]),
            (300, 1, [0.3, 0.4, 0.2]),
            (301, 0, [0.1, 0.2, 0.2]),
            (301, 1, [0.8, 0.9, 0.7]),
            (601, 3, [0.9, 0.6, 0.5]),
            (901, 0, [0.6, 0.9, 0.8]),
            (1201, 1, [0.8, 0.7, 0.9]),
            (1500, 3, [0.1, 0.3, 0.2]),
        ];
        for (t, arm, row) in table {
            assert_eq!(
                env.active_means(t).unwrap().row(arm),
                &row,
                "t={t} arm={arm}"
            );
        }
        let fronts: Vec<Vec<usize>> = env.segment_means().iter().map(|m| m.front()).collect();
        assert_eq!(
            fronts,
            vec![vec![0], vec![1], vec![2, 3], vec![0, 3], vec![0, 1]]
        );
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let env = PiecewiseBernoulli::synthetic();
        let text = serde_json::to_string(&env).unwrap();
        assert!(text.contains("\"K\":4") && text.contains("\"segment_means\""));
        let back: PiecewiseBernoulli = serde_json::from_str(&text).unwrap();
        assert_eq!(back, env);
        let bad = r#"{"K":2,"D":1,"T":10,"breakpoints":[5],"segment_means":[[[0.1],[0.2]]]}"#;
        assert!(serde_json::from_str::<PiecewiseBernoulli>(bad).is_err());
        let bad = r#"{"K":2,"D":1,"T":10,"segment_means":[[[0.1],[1.2]]]}"#;
        assert!(serde_json::from_str::<PiecewiseBernoulli>(bad).is_err());
        let bad = r#"{"K":3,"D":1,"T":10,"segment_means":[[[0.1],[0.2]]]}"#;
        assert!(serde_json::from_str::<PiecewiseBernoulli>(bad).is_err());
    }
}
