//! Divergences on Bernoulli means and the upper-confidence inversion.
//!
//! A divergence `d` is admissible for the index policy when it is a strong
//! semi-distance dominated by the Bernoulli KL divergence:
//!
//! 1. `0 <= d(p, q) <= kl(p, q)`
//! 2. `d(p, q) == 0` iff `p == q`
//! 3. `d(p, q) >= d(p', q)` for `p <= p' <= q`
//! 4. `d(p, q) <= d(p, q')` for `p <= q <= q'`
//!
//! [`verify_semi_distance`] checks those four conditions on a grid.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, check_unit, Error, Result};

/// Largest `f64` strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
const MAX_BISECTIONS: usize = 100;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    /// Bernoulli Kullback-Leibler divergence.
    #[default]
    #[serde(alias = "kl")]
    KlBernoulli,
    /// `2 (p - q)^2`, the Pinsker lower bound of the KL divergence.
    Quadratic,
}

/// Bernoulli KL divergence `kl(p, q)` with `0 ln 0 = 0`; `+inf` when `q`
/// sits on a boundary that `p` does not.
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    fn term(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    }
    (term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0)
}

pub fn quadratic(p: f64, q: f64) -> f64 {
    2.0 * (p - q) * (p - q)
}

impl Divergence {
    pub const ALL: [Divergence; 2] = [Divergence::KlBernoulli, Divergence::Quadratic];

    pub fn name(self) -> &'static str {
        match self {
            Divergence::KlBernoulli => "kl",
            Divergence::Quadratic => "quadratic",
        }
    }

    /// Scalar divergence between two means in `[0, 1]`.
    #[inline]
    pub fn d(self, p: f64, q: f64) -> f64 {
        match self {
            Divergence::KlBernoulli => kl_bernoulli(p, q),
            Divergence::Quadratic => quadratic(p, q),
        }
    }

    /// `max_j d(mu_j, nu_j)`.
    pub fn max_over(self, mu: &[f64], nu: &[f64]) -> Result<f64> {
        check_dims(mu.len(), nu.len())?;
        Ok(self.max_over_unchecked(mu, nu))
    }

    #[inline]
    pub(crate) fn max_over_unchecked(self, mu: &[f64], nu: &[f64]) -> f64 {
        mu.iter()
            .zip(nu)
            .map(|(&m, &n)| self.d(m, n))
            .fold(0.0, f64::max)
    }

    /// Largest `u` in `[p_hat, 1]` with `d(p_hat, u) <= delta`.
    ///
    /// Because the vector divergence is a max over objectives, the
    /// supremum of the feasible set of vectors is attained by applying
    /// this componentwise.
    pub fn ucb(self, p_hat: f64, delta: f64) -> Result<f64> {
        check_unit("empirical mean", p_hat)?;
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::OutOfRange {
                what: "confidence radius",
                value: delta,
            });
        }
        Ok(self.ucb_unchecked(p_hat, delta))
    }

    #[inline]
    pub(crate) fn ucb_unchecked(self, p_hat: f64, delta: f64) -> f64 {
        if delta <= 0.0 {
            return p_hat;
        }
        match self {
            Divergence::Quadratic => {
                let mut u = (p_hat + (delta / 2.0).sqrt()).min(1.0);
                // rounding can overshoot the radius by a few ulps
                while u > p_hat && quadratic(p_hat, u) > delta {
                    u = u.next_down();
                }
                u
            }
            Divergence::KlBernoulli => kl_upper(p_hat, delta),
        }
    }
}

/// Bisection on the increasing map `u -> kl(p, u)` over `[p, 1]`.
///
/// Returns the largest representable feasible point: the bracket is
/// halved until its ends are adjacent floats (or 100 halvings). Since
/// `kl(p, 1)` is infinite for `p < 1`, the largest feasible value is then
/// the float just below one.
fn kl_upper(p: f64, delta: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if kl_bernoulli(p, BELOW_ONE) <= delta {
        return BELOW_ONE;
    }
    let mut lo = p;
    // Pinsker: kl(p, u) >= 2 (u - p)^2, so nothing above this is feasible.
    let mut hi = (p + (delta / 2.0).sqrt()).min(BELOW_ONE);
    if kl_bernoulli(p, hi) <= delta {
        return hi;
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_bernoulli(p, mid) <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Anything that can be checked against the admissibility conditions.
pub trait SemiDistance {
    fn distance(&self, p: f64, q: f64) -> f64;
}

impl SemiDistance for Divergence {
    fn distance(&self, p: f64, q: f64) -> f64 {
        self.d(p, q)
    }
}

impl<F: Fn(f64, f64) -> f64> SemiDistance for F {
    fn distance(&self, p: f64, q: f64) -> f64 {
        self(p, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// `0 <= d <= kl`
    KlDominated = 1,
    /// `d = 0` exactly on the diagonal
    Identity = 2,
    /// non-increasing in `p` on `[0, q]`
    MonotoneInFirst = 3,
    /// non-decreasing in `q` on `[p, 1]`
    MonotoneInSecond = 4,
}

impl Condition {
    pub fn id(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub p: f64,
    pub q: f64,
}

/// Exhaustively checks the four admissibility conditions on a `(p, q)` grid.
/// Returns every violating point; an empty report means the check passed.
///
/// Monotonicity is checked between grid neighbours, which covers all grid
/// pairs by transitivity.
pub fn verify_semi_distance<S: SemiDistance + ?Sized>(
    d: &S,
    grid_step: f64,
) -> Result<Vec<Violation>> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::OutOfRange {
            what: "grid step",
            value: grid_step,
        });
    }
    let n = (1.0 / grid_step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let table: Vec<Vec<f64>> = grid
        .iter()
        .map(|&p| grid.iter().map(|&q| d.distance(p, q)).collect())
        .collect();

    let mut report = Vec::new();
    let mut flag = |condition, i: usize, j: usize| {
        report.push(Violation {
            condition,
            p: grid[i],
            q: grid[j],
        })
    };
    for i in 0..=n {
        for j in 0..=n {
            let v = table[i][j];
            let kl = kl_bernoulli(grid[i], grid[j]);
            let bounded = v >= 0.0 && v <= kl + 1e-12 * kl.max(1.0);
            if !bounded {
                flag(Condition::KlDominated, i, j);
            }
            if (i == j) != (v == 0.0) {
                flag(Condition::Identity, i, j);
            }
            // p <= p' <= q with p' the next grid point
            if i < j && !(table[i][j] >= table[i + 1][j]) {
                flag(Condition::MonotoneInFirst, i, j);
            }
            // p <= q <= q' with q' the next grid point
            if i <= j && j < n && !(table[i][j] <= table[i][j + 1]) {
                flag(Condition::MonotoneInSecond, i, j);
            }
        }
    }
    Ok(report)
}

/// Componentwise upper-confidence vector for one arm.
pub(crate) fn ucb_vector(kind: Divergence, mean: &[f64], delta: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(mean.iter().map(|&m| kind.ucb_unchecked(m, delta)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_values() {
        assert_eq!(kl_bernoulli(0.3, 0.3), 0.0);
        assert_abs_diff_eq!(quadratic(0.2, 0.7), 0.5, epsilon = 1e-15);
        // 0.5 ln(2/3) + 0.5 ln 2
        assert_abs_diff_eq!(
            kl_bernoulli(0.5, 0.75),
            0.143_841_036_225_890_4,
            epsilon = 1e-12
        );
        assert_eq!(kl_bernoulli(0.0, 0.0), 0.0);
        assert_eq!(kl_bernoulli(1.0, 1.0), 0.0);
        assert_eq!(kl_bernoulli(0.5, 1.0), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.5, 0.0), f64::INFINITY);
        assert_abs_diff_eq!(
            kl_bernoulli(0.0, 0.5),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn vector_max() {
        let kl = Divergence::KlBernoulli;
        assert_eq!(kl.max_over(&[0.4, 0.1], &[0.4, 0.1]).unwrap(), 0.0);
        assert_eq!(kl.max_over(&[0.3], &[0.6]).unwrap(), kl.d(0.3, 0.6));
        assert_abs_diff_eq!(
            kl.max_over(&[0.5, 0.2], &[0.75, 0.2]).unwrap(),
            0.143_841_036_225_890_4,
            epsilon = 1e-12
        );
        assert!(kl.max_over(&[0.1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn inversion_examples() {
        for kind in Divergence::ALL {
            assert_eq!(kind.ucb(0.37, 0.0).unwrap(), 0.37);
            assert_eq!(kind.ucb(1.0, 0.3).unwrap(), 1.0);
        }
        assert_abs_diff_eq!(
            Divergence::Quadratic.ucb(0.5, 0.08).unwrap(),
            0.7,
            epsilon = 1e-15
        );
        let u = Divergence::KlBernoulli
            .ucb(0.5, kl_bernoulli(0.5, 0.75))
            .unwrap();
        assert_abs_diff_eq!(u, 0.75, epsilon = 1e-6);
        // p = 0 has the closed form 1 - exp(-delta)
        let u = Divergence::KlBernoulli.ucb(0.0, 2.0).unwrap();
        assert_abs_diff_eq!(u, 1.0 - (-2.0f64).exp(), epsilon = 1e-12);
        assert!(Divergence::KlBernoulli.ucb(0.5, -1.0).is_err());
        assert!(Divergence::KlBernoulli.ucb(0.5, f64::NAN).is_err());
        assert!(Divergence::KlBernoulli.ucb(1.5, 0.1).is_err());
        assert_eq!(
            Divergence::KlBernoulli.ucb(0.2, f64::INFINITY).unwrap(),
            BELOW_ONE
        );
        assert_eq!(Divergence::KlBernoulli.ucb(1.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn kl_inversion_is_tight_on_a_grid() {
        for i in 0..=40 {
            let p = i as f64 / 40.0;
            for delta in [1e-6, 1e-3, 0.05, 0.3, 1.0] {
                let u = Divergence::KlBernoulli.ucb(p, delta).unwrap();
                assert!(u >= p && u <= 1.0);
                let d = kl_bernoulli(p, u);
                assert!(d <= delta, "p={p} delta={delta} u={u} d={d}");
                if u < 1.0 {
                    let next = f64::from_bits(u.to_bits() + 1);
                    assert!(
                        kl_bernoulli(p, next) > delta,
                        "u not maximal for p={p} delta={delta}"
                    );
                }
            }
        }
    }

    #[test]
    fn admissible_kinds_pass_the_grid_check() {
        for kind in Divergence::ALL {
            assert!(
                verify_semi_distance(&kind, 0.01).unwrap().is_empty(),
                "{kind:?}"
            );
        }
    }

    #[test]
    fn broken_divergence_is_reported() {
        let broken = |p: f64, q: f64| 3.0 * (p - q).abs();
        let report = verify_semi_distance(&broken, 0.01).unwrap();
        assert!(!report.is_empty());
        assert!(report.iter().any(|v| v.condition == Condition::KlDominated));
        // near the diagonal 3|p - q| exceeds kl ~ 2 (p - q)^2
        assert!(report.iter().any(|v| v.condition == Condition::KlDominated
            && (v.p - 0.5).abs() < 1e-9
            && (v.q - 0.51).abs() < 1e-9));
    }

    #[test]
    fn grid_step_is_validated() {
        assert!(verify_semi_distance(&Divergence::KlBernoulli, 0.0).is_err());
        assert!(verify_semi_distance(&Divergence::KlBernoulli, 0.5).is_err());
    }

    #[test]
    fn serde_names() {
        assert_eq!(
            serde_json::to_string(&Divergence::KlBernoulli).unwrap(),
            "\"kl_bernoulli\""
        );
        assert_eq!(
            serde_json::from_str::<Divergence>("\"kl\"").unwrap(),
            Divergence::KlBernoulli
        );
        assert_eq!(
            serde_json::from_str::<Divergence>("\"quadratic\"").unwrap(),
            Divergence::Quadratic
        );
    }
}
