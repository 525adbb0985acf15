//! Independent reference implementations shared by the integration tests
//! and the acceptance runner.
#![allow(dead_code)]

use momab::divergence::Divergence;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `a` is at least `b` everywhere and strictly larger somewhere.
pub fn naive_dominates(a: &[f64], b: &[f64]) -> bool {
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

/// All-pairs front, in index order.
pub fn brute_front(rows: &[Vec<f64>]) -> Vec<usize> {
    (0..rows.len())
        .filter(|&i| !rows.iter().any(|r| naive_dominates(r, &rows[i])))
        .collect()
}

/// Smallest grid `eps` for which `mu_arm + eps` is dominated by no arm.
pub fn grid_regret(arm: usize, rows: &[Vec<f64>], step: f64) -> f64 {
    let steps = (1.0 / step).ceil() as usize + 1;
    for k in 0..=steps {
        let eps = k as f64 * step;
        let shifted: Vec<f64> = rows[arm].iter().map(|m| m + eps).collect();
        if !rows.iter().any(|r| naive_dominates(r, &shifted)) {
            return eps;
        }
    }
    f64::INFINITY
}

/// Cumulative regret by direct summation over rounds, recomputing the
/// front every round.
pub fn naive_cumulative(choices: &[usize], rows_at: impl Fn(usize) -> Vec<Vec<f64>>) -> Vec<f64> {
    let mut total = 0.0;
    choices
        .iter()
        .enumerate()
        .map(|(s, &arm)| {
            let rows = rows_at(s + 1);
            let front = brute_front(&rows);
            let gap = front
                .iter()
                .map(|&f| {
                    rows[f]
                        .iter()
                        .zip(&rows[arm])
                        .map(|(a, b)| a - b)
                        .fold(f64::INFINITY, f64::min)
                        .max(0.0)
                })
                .fold(0.0, f64::max);
            total += gap;
            total
        })
        .collect()
}

/// Textbook scalar klUCB: pull every arm once (uniformly among the unpulled
/// ones), then the arm maximizing `sup {q : N kl(mean, q) <= ln t}`, ties
/// broken uniformly. Shares only the index inversion with the library.
pub struct ScalarKlUcb {
    counts: Vec<f64>,
    sums: Vec<f64>,
    t: usize,
    rng: ChaCha8Rng,
}

impl ScalarKlUcb {
    pub fn new(arms: usize, seed: u64) -> Self {
        Self {
            counts: vec![0.0; arms],
            sums: vec![0.0; arms],
            t: 1,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn select(&mut self) -> usize {
        let unpulled: Vec<usize> = (0..self.counts.len())
            .filter(|&i| self.counts[i] == 0.0)
            .collect();
        if !unpulled.is_empty() {
            return *unpulled.choose(&mut self.rng).unwrap();
        }
        let log_t = (self.t as f64).ln();
        let index: Vec<f64> = (0..self.counts.len())
            .map(|i| {
                let mean = (self.sums[i] / self.counts[i]).clamp(0.0, 1.0);
                Divergence::KlBernoulli
                    .ucb(mean, log_t / self.counts[i])
                    .unwrap()
            })
            .collect();
        let best = index.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..index.len()).filter(|&i| index[i] == best).collect();
        *ties.choose(&mut self.rng).unwrap()
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1.0;
        self.sums[arm] += reward;
        self.t += 1;
    }
}

/// `ln C(n, k)` via log-gamma-free summation.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

pub fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if p == 0.0 {
        return (k == 0) as u8 as f64;
    }
    if p == 1.0 {
        return (k == n) as u8 as f64;
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// `I_0(x) e^{-x}` from the power series, summed in log space.
fn scaled_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let half_ln = (x / 2.0).ln();
    let mut ln_terms = Vec::new();
    let mut ln_fact = 0.0;
    for k in 0..10_000usize {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let t = 2.0 * k as f64 * half_ln - 2.0 * ln_fact;
        ln_terms.push(t);
        if k as f64 > x && t < ln_terms[0] - 60.0 {
            break;
        }
    }
    let m = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = ln_terms.iter().map(|t| (t - m).exp()).sum();
    (m + s.ln() - x).exp()
}

/// `Q1(a, b) = int_b^inf x exp(-(x^2 + a^2)/2) I_0(a x) dx` by composite
/// Simpson quadrature on `[b, a + b + 40]`.
pub fn marcum_by_quadrature(a: f64, b: f64) -> f64 {
    let upper = a.max(b) + 40.0;
    let n = 20_000;
    let h = (upper - b) / n as f64;
    let f = |x: f64| x * (-(x - a) * (x - a) / 2.0).exp() * scaled_i0(a * x);
    let mut sum = f(b) + f(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(b + i as f64 * h);
    }
    sum * h / 3.0
}
