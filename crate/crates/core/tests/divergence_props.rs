use momab::divergence::{kl_bernoulli, quadratic, Divergence};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0]
}

proptest! {
    #[test]
    fn divergences_are_nonnegative_and_kl_dominated(p in unit(), q in unit()) {
        let kl = kl_bernoulli(p, q);
        let quad = quadratic(p, q);
        prop_assert!(kl >= 0.0 && quad >= 0.0);
        prop_assert!(quad <= kl + 1e-12);
        prop_assert_eq!(kl == 0.0, p == q);
    }

    #[test]
    fn ucb_is_feasible_and_monotone(p in unit(), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for d in Divergence::ALL {
            let u_lo = d.ucb(p, lo).unwrap();
            let u_hi = d.ucb(p, hi).unwrap();
            prop_assert!(u_lo >= p && u_hi <= 1.0);
            prop_assert!(u_lo <= u_hi);
            prop_assert!(d.d(p, u_hi) <= hi);
        }
    }

    #[test]
    fn kl_ucb_is_the_supremum(p in 0.0f64..0.999, delta in 1e-6f64..2.0) {
        let u = Divergence::KlBernoulli.ucb(p, delta).unwrap();
        // nothing noticeably larger is feasible
        let beyond = (u + 1e-9).min(1.0);
        if beyond > u {
            prop_assert!(kl_bernoulli(p, beyond) > delta || beyond == 1.0 && p == 1.0);
        }
    }

    #[test]
    fn quadratic_ucb_closed_form(p in unit(), delta in 0.0f64..3.0) {
        let u = Divergence::Quadratic.ucb(p, delta).unwrap();
        prop_assert!((u - (p + (delta / 2.0).sqrt()).min(1.0)).abs() < 1e-15);
        prop_assert!(quadratic(p, u) <= delta);
    }

    #[test]
    fn max_over_is_componentwise_max(
        pairs in proptest::collection::vec((unit(), unit()), 1..6)
    ) {
        let (mu, nu): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        for d in Divergence::ALL {
            let expected = pairs.iter().map(|&(p, q)| d.d(p, q)).fold(0.0, f64::max);
            prop_assert_eq!(d.max_over(&mu, &nu).unwrap(), expected);
        }
    }

    /// The componentwise index is the largest vector inside the
    /// max-divergence ball: each coordinate is feasible on its own, and
    /// raising any coordinate leaves the ball.
    #[test]
    fn componentwise_ucb_is_the_vector_supremum(
        mu in proptest::collection::vec(0.0f64..0.99, 1..5),
        delta in 1e-4f64..1.0,
    ) {
        let kl = Divergence::KlBernoulli;
        let u: Vec<f64> = mu.iter().map(|&m| kl.ucb(m, delta).unwrap()).collect();
        prop_assert!(kl.max_over(&mu, &u).unwrap() <= delta);
        for j in 0..u.len() {
            let mut v = u.clone();
            v[j] = (v[j] + 1e-7).min(1.0);
            if v[j] > u[j] {
                prop_assert!(kl.max_over(&mu, &v).unwrap() > delta);
            }
        }
    }
}

#[test]
fn ucb_rejects_invalid_input() {
    assert!(Divergence::KlBernoulli.ucb(0.5, -1.0).is_err());
    assert!(Divergence::KlBernoulli.ucb(1.5, 0.1).is_err());
    assert!(Divergence::Quadratic.ucb(f64::NAN, 0.1).is_err());
    assert_eq!(Divergence::KlBernoulli.ucb(0.4, 0.0).unwrap(), 0.4);
}
