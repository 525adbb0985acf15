use std::io::Read;
use std::path::{Path, PathBuf};

use rand::RngCore;

use super::{check_arm, check_round, Environment};
use crate::error::{Error, Result};
use crate::pareto::MeanMatrix;

/// Replays a recorded table of binary rewards, one row per (round, arm).
///
/// The CSV header is `t,arm,obj0,obj1,...`. Every arm must have exactly one
/// row for each round `1..=T`. Ground-truth means are the per-segment
/// averages of the table, with segments of a fixed length when given.
#[derive(Debug, Clone)]
pub struct TraceEnvironment {
    source: PathBuf,
    num_arms: usize,
    num_objectives: usize,
    horizon: usize,
    rewards: Vec<f64>,
    breakpoints: Vec<usize>,
    segment_means: Vec<MeanMatrix>,
}

impl TraceEnvironment {
    pub fn from_csv(path: impl AsRef<Path>, segment_length: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::from_reader(file, path, segment_length)
    }

    /// `source` only labels error messages.
    pub fn from_reader<R: Read>(
        reader: R,
        source: &Path,
        segment_length: Option<usize>,
    ) -> Result<Self> {
        let input_error = |line: u64, message: String| Error::Input {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers = csv.headers()?.clone();
        let num_objectives = headers.len().saturating_sub(2);
        if headers.get(0) != Some("t") || headers.get(1) != Some("arm") || num_objectives == 0 {
            return Err(input_error(
                1,
                "header must be t,arm,obj0[,obj1,...]".into(),
            ));
        }

        let mut rows: Vec<(usize, usize, Vec<f64>, u64)> = Vec::new();
        for record in csv.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != num_objectives + 2 {
                return Err(input_error(
                    line,
                    format!(
                        "expected {} fields, found {}",
                        num_objectives + 2,
                        record.len()
                    ),
                ));
            }
            let parse_index = |i: usize, what: &str| -> Result<usize> {
                record[i].trim().parse::<usize>().map_err(|_| {
                    input_error(
                        line,
                        format!("{what} {:?} is not a non-negative integer", &record[i]),
                    )
                })
            };
            let t = parse_index(0, "round")?;
            if t == 0 {
                return Err(input_error(line, "rounds start at 1".into()));
            }
            let arm = parse_index(1, "arm")?;
            let mut reward = Vec::with_capacity(num_objectives);
            for field in record.iter().skip(2) {
                match field.trim() {
                    "0" => reward.push(0.0),
                    "1" => reward.push(1.0),
                    other => {
                        return Err(input_error(line, format!("reward {other:?} is not 0 or 1")))
                    }
                }
            }
            rows.push((t, arm, reward, line));
        }
        if rows.is_empty() {
            return Err(input_error(1, "trace has no rows".into()));
        }

        let horizon = rows.iter().map(|r| r.0).max().unwrap_or(0);
        let num_arms = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
        let mut rewards = vec![0.0; horizon * num_arms * num_objectives];
        let mut seen = vec![false; horizon * num_arms];
        for (t, arm, reward, line) in rows {
            let cell = (t - 1) * num_arms + arm;
            if std::mem::replace(&mut seen[cell], true) {
                return Err(input_error(
                    line,
                    format!("duplicate row for round {t}, arm {arm}"),
                ));
            }
            rewards[cell * num_objectives..(cell + 1) * num_objectives].copy_from_slice(&reward);
        }
        if let Some(cell) = seen.iter().position(|&s| !s) {
            return Err(input_error(
                0,
                format!(
                    "missing row for round {}, arm {}",
                    cell / num_arms + 1,
                    cell % num_arms
                ),
            ));
        }

        let segment_length = match segment_length {
            Some(0) => return Err(Error::Config("segment length must be positive".into())),
            Some(len) => len.min(horizon),
            None => horizon,
        };
        let breakpoints: Vec<usize> = (1..)
            .map(|s| s * segment_length + 1)
            .take_while(|&b| b <= horizon)
            .collect();

        let mut env = Self {
            source: source.to_path_buf(),
            num_arms,
            num_objectives,
            horizon,
            rewards,
            breakpoints,
            segment_means: Vec::new(),
        };
        env.segment_means = env.compute_segment_means()?;
        Ok(env)
    }

    fn compute_segment_means(&self) -> Result<Vec<MeanMatrix>> {
        let mut starts = vec![1];
        starts.extend(&self.breakpoints);
        let mut ends: Vec<usize> = self.breakpoints.iter().map(|b| b - 1).collect();
        ends.push(self.horizon);
        starts
            .iter()
            .zip(&ends)
            .map(|(&start, &end)| {
                let len = (end + 1 - start) as f64;
                let rows = (0..self.num_arms)
                    .map(|arm| {
                        (0..self.num_objectives)
                            .map(|j| {
                                (start..=end).map(|t| self.reward(t, arm)[j]).sum::<f64>() / len
                            })
                            .collect()
                    })
                    .collect();
                MeanMatrix::new(rows)
            })
            .collect()
    }

    fn reward(&self, t: usize, arm: usize) -> &[f64] {
        let cell = (t - 1) * self.num_arms + arm;
        &self.rewards[cell * self.num_objectives..(cell + 1) * self.num_objectives]
    }

    /// Recorded reward of `arm` at round `t`.
    pub fn lookup(&self, arm: usize, t: usize) -> Result<&[f64]> {
        check_round(t, self.horizon)?;
        check_arm(arm, self.num_arms).map_err(|e| Error::Input {
            path: self.source.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        Ok(self.reward(t, arm))
    }

    pub fn segment_means(&self) -> &[MeanMatrix] {
        &self.segment_means
    }
}

impl Environment for TraceEnvironment {
    fn name(&self) -> String {
        format!("trace({})", self.source.display())
    }

    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn num_objectives(&self) -> usize {
        self.num_objectives
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    fn active_means(&self, t: usize) -> Result<&MeanMatrix> {
        Ok(&self.segment_means[self.segment_of(t)?])
    }

    fn sample_into(
        &self,
        arm: usize,
        t: usize,
        _rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        out.copy_from_slice(self.lookup(arm, t)?);
        Ok(())
    }
}
