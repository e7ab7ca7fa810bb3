use fracscale::fractional::{caputo_analytic, l1_weights, CaputoHistory, FractionalOrder};
use fracscale::problems::{by_name, Overrides};
use proptest::prelude::*;

fn order(a: f64) -> FractionalOrder<f64> {
    FractionalOrder::new(a).unwrap()
}

/// Runs the L1 scheme with the exact Caputo derivative of `u` as the right-hand side.
fn l1_replay(alpha: f64, dt: f64, n: usize, u: impl Fn(f64) -> f64, caputo: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut h = CaputoHistory::new(order(alpha), dt, u(0.0), n + 1).unwrap();
    for i in 1..=n {
        let next = h.advance(caputo(i as f64 * dt)).unwrap();
        h.push(next);
    }
    h.values().to_vec()
}

#[test]
fn weights_telescope_and_decrease_on_the_alpha_grid() {
    let n = 10_000;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let w = l1_weights(order(alpha), n);
        let sum: f64 = w.as_slice().iter().sum();
        let expect = ((n + 1) as f64).powf(1.0 - alpha);
        assert!((sum - expect).abs() <= 1e-10 * expect, "alpha {alpha}: {sum} vs {expect}");
        assert_eq!(w[0], 1.0);
        for j in 1..n {
            assert!(w[j] > 0.0 && w[j] < w[j - 1], "alpha {alpha} j {j}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_telescope(alpha in 0.05f64..0.95, n in 1usize..5000) {
        let w = l1_weights(order(alpha), n);
        let sum: f64 = w.as_slice().iter().sum();
        let expect = ((n + 1) as f64).powf(1.0 - alpha);
        prop_assert!((sum - expect).abs() <= 1e-11 * expect.max(1.0));
        prop_assert!(w.as_slice().windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn linear_functions_are_reproduced(alpha in 0.05f64..0.95, a in -5.0f64..5.0, b in -5.0f64..5.0, k in 2u32..9, n in 1usize..400) {
        let dt = 1.0 / f64::from(1 << k);
        let al = order(alpha);
        let got = l1_replay(alpha, dt, n, |t| a + b * t, |t| b * caputo_analytic(1, al, t).unwrap());
        for (i, u) in got.iter().enumerate() {
            let t = (i + 1) as f64 * dt;
            let exact = a + b * t;
            prop_assert!((u - exact).abs() <= 1e-12 * exact.abs().max(1.0), "step {}: {} vs {}", i + 1, u, exact);
        }
    }

    #[test]
    fn quadratic_error_shrinks_at_two_minus_alpha(alpha in 0.1f64..0.9) {
        let al = order(alpha);
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let got = l1_replay(alpha, dt, n, |t| t * t, |t| caputo_analytic(2, al, t).unwrap());
            got.iter().enumerate().map(|(i, u)| (u - ((i + 1) as f64 * dt).powi(2)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(256), err(512));
        let ratio = e1 / e2;
        let expect = 2f64.powf(2.0 - alpha);
        prop_assert!((ratio / expect - 1.0).abs() <= 0.10, "ratio {} expected {}", ratio, expect);
    }

    #[test]
    fn exact_pairs_satisfy_both_equations_early(frac in proptest::collection::vec(0.0f64..1.0, 1..64), which in 0usize..3) {
        let name = ["example1", "example2", "example3"][which];
        let p = by_name::<f64>(name, &Overrides::default()).unwrap();
        let times: Vec<f64> = frac.iter().map(|s| s * p.horizon.min(100.0)).collect();
        let (fast, slow) = p.residual_check(&times).unwrap();
        prop_assert!(fast <= 1e-9 && slow <= 1e-9, "{}: fast {} slow {}", name, fast, slow);
    }

    #[test]
    fn exact_pairs_satisfy_both_equations(frac in proptest::collection::vec(0.0f64..1.0, 1..64), which in 0usize..3) {
        let name = ["example1", "example2", "example3"][which];
        let p = by_name::<f64>(name, &Overrides::default()).unwrap();
        for s in frac {
            let t = s * p.horizon;
            let (fast, slow) = p.residual_check(&[t]).unwrap();
            // cancellation between terms of size ~t^2 leaves roundoff at late times
            let scale = p.f(t).abs().max(p.exact_v(t).unwrap().abs()).max(1.0);
            prop_assert!(fast <= 1e-9 * scale && slow <= 1e-9, "{} t={}: fast {} slow {}", name, t, fast, slow);
        }
    }
}
