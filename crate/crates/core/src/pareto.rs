//! Pareto dominance, front extraction and Pareto regret.
//!
//! Throughout the crate, `dominates(a, b)` means `a` is componentwise
//! at least `b` with at least one strict component. A vector that is not
//! dominated by any other is Pareto-optimal. Equal vectors never dominate
//! each other, so duplicated optimal arms all belong to the front.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, check_unit, Error, Result};

/// A vector of per-objective rewards, each component in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "reward vector needs at least one objective".into(),
            ));
        }
        for &v in &values {
            check_unit("reward component", v)?;
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for RewardVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RewardVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<RewardVector> for Vec<f64> {
    fn from(v: RewardVector) -> Self {
        v.0
    }
}

/// Per-arm, per-objective means (`K` rows of `D` entries in `[0, 1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct MeanMatrix {
    rows: Vec<Vec<f64>>,
}

impl MeanMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidArgument(
                "mean matrix needs at least one arm".into(),
            ));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidArgument(
                "mean matrix needs at least one objective".into(),
            ));
        }
        for row in &rows {
            check_dims(d, row.len())?;
            for &m in row {
                check_unit("mean", m)?;
            }
        }
        Ok(Self { rows })
    }

    pub fn num_arms(&self) -> usize {
        self.rows.len()
    }

    pub fn num_objectives(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, arm: usize) -> &[f64] {
        &self.rows[arm]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Indices of the Pareto-optimal arms.
    pub fn front(&self) -> Vec<usize> {
        pareto_front(&self.rows)
    }
}

impl TryFrom<Vec<Vec<f64>>> for MeanMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<MeanMatrix> for Vec<Vec<f64>> {
    fn from(m: MeanMatrix) -> Self {
        m.rows
    }
}

/// `a` Pareto-dominates `b`.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_dims(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Indices `i` such that no row dominates row `i`. Never empty for a
/// non-empty input.
pub fn pareto_front<R: AsRef<[f64]>>(rows: &[R]) -> Vec<usize> {
    let mut front = Vec::new();
    pareto_front_into(rows, &mut front);
    front
}

pub(crate) fn pareto_front_into<R: AsRef<[f64]>>(rows: &[R], front: &mut Vec<usize>) {
    front.clear();
    for (i, candidate) in rows.iter().enumerate() {
        let candidate = candidate.as_ref();
        let dominated = rows
            .iter()
            .enumerate()
            .any(|(l, other)| l != i && dominates_unchecked(other.as_ref(), candidate));
        if !dominated {
            front.push(i);
        }
    }
}

/// Pareto regret of pulling `arm`: the smallest uniform lift `ε ≥ 0` after
/// which no Pareto-optimal mean dominates `μ_arm + ε·1`.
///
/// Closed form: `max_{i* ∈ front} max(0, min_j (μ_{i*}^j − μ_arm^j))`.
pub fn pareto_regret(arm: usize, means: &MeanMatrix) -> f64 {
    let front = means.front();
    regret_against_front(arm, means, &front)
}

pub(crate) fn regret_against_front(arm: usize, means: &MeanMatrix, front: &[usize]) -> f64 {
    let mu = means.row(arm);
    front
        .iter()
        .map(|&star| {
            means
                .row(star)
                .iter()
                .zip(mu)
                .map(|(s, m)| s - m)
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Per-round record of one policy run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub choices: Vec<usize>,
    pub instantaneous: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Rounds (1-based) at which the policy restarted on a detector alarm.
    pub alarms: Vec<usize>,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub(crate) fn push(&mut self, arm: usize, regret: f64) {
        let prev = self.final_regret();
        self.choices.push(arm);
        self.instantaneous.push(regret);
        self.cumulative.push(prev + regret);
    }
}

/// Cumulative Pareto regret of a choice sequence. `mean_at(t)` supplies the
/// true means at 1-based round `t`.
pub fn cumulative_regret<'a, F>(choices: &[usize], mut mean_at: F) -> Result<RegretTrace>
where
    F: FnMut(usize) -> &'a MeanMatrix,
{
    let mut trace = RegretTrace::default();
    let mut cached: Option<(&MeanMatrix, Vec<usize>)> = None;
    for (s, &arm) in choices.iter().enumerate() {
        let means = mean_at(s + 1);
        if arm >= means.num_arms() {
            return Err(Error::InvalidArgument(format!(
                "arm {arm} out of range at round {}",
                s + 1
            )));
        }
        let stale = !matches!(&cached, Some((m, _)) if std::ptr::eq(*m, means));
        if stale {
            cached = Some((means, means.front()));
        }
        let front = cached.as_ref().map(|(_, f)| f.as_slice()).unwrap_or(&[]);
        let regret = regret_against_front(arm, means, front);
        trace.push(arm, regret);
    }
    Ok(trace)
}
