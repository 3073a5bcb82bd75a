use super::*;
use crate::quadrature::Rule;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

#[test]
fn small_degree_values() {
    let ws = HermiteWorkspace::new(30);
    assert_eq!(ws.eval(0, 7.3), 1.0);
    assert_eq!(ws.eval(2, 0.0), -1.0);
    assert_eq!(ws.eval(3, 2.0), 2.0);
    assert_eq!(hermite(3, 2.0), 2.0);
    assert_eq!(ws.exact_row(4).unwrap(), &[1, -6, 3]);
    assert_eq!(ws.exact_row(6).unwrap(), &[1, -15, 45, -15]);
}

#[test]
fn even_degrees_at_origin() {
    for n in 0..10usize {
        let expected = (-2f64).powi(-(n as i32)) * factorial(2 * n) / factorial(n);
        assert_eq!(hermite(2 * n, 0.0), expected, "n = {n}");
        assert_eq!(hermite(2 * n + 1, 0.0), 0.0);
    }
}

#[test]
fn recurrence_matches_explicit_sum() {
    let ws = HermiteWorkspace::new(30);
    for k in 0..=30 {
        for i in 0..64 {
            let x = -10.0 + 20.0 * i as f64 / 63.0;
            let scale = ws.explicit_abs(k, x).max(1.0);
            let gap = (hermite(k, x) - ws.explicit(k, x)).abs() / scale;
            assert!(gap < 1e-10, "k={k} x={x} gap={gap:e}");
        }
    }
}

#[test]
fn orthogonality_under_gauss_hermite() {
    let rule = Rule::gauss_hermite(64);
    for j in 0..=10 {
        for k in 0..=10 {
            let v = rule.apply(|x| hermite(j, x) * hermite(k, x));
            let expected = if j == k { factorial(k) } else { 0.0 };
            assert!((v - expected).abs() <= 1e-8 * factorial(k).max(factorial(j)), "j={j} k={k} v={v}");
        }
    }
}

#[test]
fn generating_series_examples() {
    assert_eq!(generating_series_residual(0.0, 1.5, 4, 0), 0.0);
    assert!(generating_series_residual(1.0, 0.5, 0, 60) < 1e-12);
    assert!(generating_series_residual(0.7, -1.2, 3, 60) < 1e-12);
}

#[test]
fn generating_residual_decreases_past_threshold() {
    // Single steps stall near zeros of H_n; the maximum over blocks of four
    // consecutive truncations decreases strictly until rounding takes over.
    for k in [0, 1, 3] {
        for &t in &[-3.0, -1.0, 0.5, 1.5, 3.0] {
            for &x in &[-3.0, -1.0, 0.0, 2.0, 3.0] {
                let k0 = (2.0 * (f64::abs(t) + f64::abs(x)).powi(2)).ceil() as usize;
                let block = |start: usize| {
                    (start..start + 4).map(|kk| generating_series_residual(t, x, k, kk)).fold(0.0, f64::max)
                };
                let floor = 1e-13 * generating_series_scale(t, x, k, k0 + 40);
                for start in (k0..k0 + 36).step_by(4) {
                    let (e0, e1) = (block(start), block(start + 4));
                    if e1 < floor {
                        break;
                    }
                    assert!(e1 < e0, "t={t} x={x} k={k} K={start}: {e1:e} !< {e0:e}");
                }
            }
        }
    }
}

#[test]
fn umbral_examples() {
    assert_eq!(umbral_residual(Umbral::Mix, 5, 1.0, 0.3, 9.0).unwrap(), 0.0);
    assert_eq!(umbral_residual(Umbral::Shift, 6, 0.0, 0.0, 1.1).unwrap(), 0.0);
    assert!(umbral_residual(Umbral::Scale, 8, 0.6, -0.4, 0.0).unwrap() < 1e-10);
    assert!(umbral_residual(Umbral::Mix, 3, 1.5, 0.0, 0.0).is_err());
}

#[test]
fn mehler_examples() {
    let (b, ok) = mehler_bound(0, 0.0, 0.5).unwrap();
    assert!((b - 0.75f64.powf(-0.25)).abs() < 1e-15);
    assert!((b - 1.0746).abs() < 1e-4);
    assert!(ok);
    assert!(mehler_bound(12, 3.0, 0.9).unwrap().1);
    assert!(mehler_bound(20, -5.0, 0.99).unwrap().1);
    assert!(mehler_bound(3, 1.0, 1.0).is_err());
    assert!(mehler_bound(3, 1.0, 0.0).is_err());
}

#[test]
fn wick_examples() {
    let t = WickTriple::power(0, 1.0).unwrap();
    assert_eq!(wick_power_exp(0.0, t, WickMethod::Closed), c(1.0, 0.0));

    let sigma = 1.3;
    let t = WickTriple::real(1, 1.0, sigma).unwrap();
    let v = wick_power_exp(sigma * sigma, t, WickMethod::Closed);
    assert!(v.norm() < 1e-15);

    let t = WickTriple::real(3, 0.8, 1.1).unwrap();
    let closed = wick_power_exp(1.2, t, WickMethod::Closed);
    let series = wick_power_exp(1.2, t, WickMethod::Series);
    assert!(rel_gap(closed, series) < 1e-9);

    assert!(WickTriple::real(2, 0.5, 0.0).is_err());
    assert!(WickTriple::real(2, 0.5, -1.0).is_err());
}

#[test]
fn wick_power_reduces_to_scaled_hermite() {
    for k in 0..8 {
        let t = WickTriple::power(k, 1.7).unwrap();
        let v = wick_power_exp(0.9, t, WickMethod::Closed);
        let expected = 1.7f64.powi(k as i32) * hermite(k, 0.9 / 1.7);
        assert!((v.re - expected).abs() < 1e-12 * expected.abs().max(1.0));
        assert_eq!(v.im, 0.0);
    }
}

#[test]
fn wick_exponential_has_unit_mean_and_derivatives_vanish() {
    // E[:Z^k e^{gZ}:] = d^k/dg^k 1.
    let rule = Rule::gauss_hermite(64);
    let sigma = 0.9;
    for k in 0..5 {
        let t = WickTriple::real(k, 0.7, sigma).unwrap();
        let m = rule.apply(|x| wick_power_exp(sigma * x, t, WickMethod::Closed).re);
        let expected = if k == 0 { 1.0 } else { 0.0 };
        assert!((m - expected).abs() < 1e-10, "k={k} m={m}");
    }
}

#[test]
fn gauss_expect_examples() {
    assert_eq!(gauss_expect_hermite(1, 0.5, 0.0, None).unwrap(), 0.0);
    assert_eq!(gauss_expect_hermite(2, 0.0, 1.0, None).unwrap(), 0.0);
    assert!(gauss_expect_hermite(2, 1.0, 0.0, None).is_err());
    let pair = HermitePair { sigma2: -1.2, m2: 0.0, rho: 0.0 };
    assert!(gauss_expect_hermite(2, 0.1, 0.0, Some(pair)).is_err());
}

fn quad_one(rule: &Rule, k: usize, sigma: f64, m: f64) -> f64 {
    rule.apply(|x| hermite(k, sigma * x + m))
}

fn quad_two(rule: &Rule, k: usize, s1: f64, m1: f64, p: HermitePair) -> f64 {
    let q = (1.0 - p.rho * p.rho).sqrt();
    rule.apply(|x1| {
        let inner = rule.apply(|z| hermite(k, p.sigma2 * (p.rho * x1 + q * z) + p.m2));
        hermite(k, s1 * x1 + m1) * inner
    })
}

#[test]
fn gauss_expect_matches_quadrature() {
    let rule = Rule::gauss_hermite(64);
    let pair = HermitePair { sigma2: 0.3, m2: -0.1, rho: 0.7 };
    let closed = gauss_expect_hermite(3, 0.4, 0.2, Some(pair)).unwrap();
    let oracle = quad_two(&rule, 3, 0.4, 0.2, pair);
    assert!((closed - oracle).abs() < 1e-8, "{closed} vs {oracle}");

    for k in 0..=8 {
        for &(s, m) in &[(0.3, -2.0), (-0.7, 1.5), (0.95, 3.0)] {
            let closed = gauss_expect_hermite(k, s, m, None).unwrap();
            assert!((closed - quad_one(&rule, k, s, m)).abs() < 1e-8);
        }
    }
}

#[test]
fn odd_degrees_vanish_when_centred() {
    for k in (1..15).step_by(2) {
        for &s in &[0.0, 0.3, -0.8] {
            assert_eq!(gauss_expect_hermite(k, s, 0.0, None).unwrap(), 0.0);
        }
    }
}

#[test]
fn pair_moment_examples() {
    let z = c(0.0, 0.0);
    assert_eq!(wick_pair_moment(0, 0, z, z, 0.8, 1e-16).unwrap(), c(1.0, 0.0));
    let v = wick_pair_moment(2, 2, z, z, 0.5, 1e-16).unwrap();
    assert!((v - c(0.5, 0.0)).norm() < 1e-15);
    assert!(wick_pair_moment(1, 1, z, z, 0.5, 0.0).is_err());
}

#[test]
fn pair_moment_matches_two_dimensional_quadrature() {
    // Var X = Var Y = 2, Cov = 1.
    let rule = Rule::gauss_hermite(64);
    let (var, cov, g) = (2.0f64, 1.0f64, 0.5);
    let sigma = var.sqrt();
    let rho = cov / var;
    let q = (1.0 - rho * rho).sqrt();
    let t = WickTriple::real(1, g, sigma).unwrap();
    let oracle = rule.apply(|x1| {
        let a = wick_power_exp(sigma * x1, t, WickMethod::Closed).re;
        a * rule.apply(|z| wick_power_exp(sigma * (rho * x1 + q * z), t, WickMethod::Closed).re)
    });
    let v = wick_pair_moment(1, 1, c(g, 0.0), c(g, 0.0), cov, 1e-17).unwrap();
    assert!((v.re - oracle).abs() < 1e-8, "{} vs {oracle}", v.re);

    // Mixed degrees against the same oracle.
    let t2 = WickTriple::real(2, g, sigma).unwrap();
    let oracle = rule.apply(|x1| {
        let a = wick_power_exp(sigma * x1, t, WickMethod::Closed).re;
        a * rule.apply(|z| wick_power_exp(sigma * (rho * x1 + q * z), t2, WickMethod::Closed).re)
    });
    let v = wick_pair_moment(1, 2, c(g, 0.0), c(g, 0.0), cov, 1e-17).unwrap();
    assert!((v.re - oracle).abs() < 1e-8, "{} vs {oracle}", v.re);
}

#[test]
fn pair_moment_special_cases() {
    for k in 0..8 {
        let v = wick_pair_moment(k, k, c(0.0, 0.0), c(0.0, 0.0), 0.7, 1e-17).unwrap();
        assert!((v.re - factorial(k) * 0.7f64.powi(k as i32)).abs() < 1e-12 * factorial(k));
    }
}

proptest! {
    #[test]
    fn pair_moment_of_exponentials(g1re in -2.0..2.0f64, g1im in -2.0..2.0f64, g2re in -2.0..2.0f64,
                                   g2im in -2.0..2.0f64, cov in 0.0..3.0f64) {
        let (g1, g2) = (c(g1re, g1im), c(g2re, g2im));
        let v = wick_pair_moment(0, 0, g1, g2, cov, 1e-17).unwrap();
        let x = g1 * g2 * cov;
        let expected = x.exp();
        // The alternating part of the series costs exp(|x| - Re x) in conditioning.
        let cond = (x.norm() - x.re).exp();
        prop_assert!((v - expected).norm() <= 1e-12 * cond * expected.norm());
    }

    #[test]
    fn pair_moment_of_real_exponentials(g1 in -2.0..2.0f64, g2 in -2.0..2.0f64, cov in 0.0..4.0f64) {
        let v = wick_pair_moment(0, 0, c(g1, 0.0), c(g2, 0.0), cov, 1e-17).unwrap();
        let expected = (g1 * g2 * cov).exp();
        if g1 * g2 >= 0.0 {
            prop_assert!((v.re - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn mehler_bound_always_holds(k in 0usize..=20, x in -6.0..6.0f64, rho in 0.001..0.999f64) {
        prop_assert!(mehler_bound(k, x, rho).unwrap().1);
    }

    #[test]
    fn umbral_identities_hold(k in 0usize..=20, rho in -1.0..1.0f64, u in -3.0..3.0f64, v in -3.0..3.0f64) {
        for which in [Umbral::Mix, Umbral::Shift, Umbral::Scale] {
            let r = umbral_residual_scaled(which, k, rho, u, v).unwrap();
            prop_assert!(r < 1e-10, "{which:?} k={k}: {r:e}");
        }
    }

    #[test]
    fn wick_methods_agree(k in 0usize..=10, sigma in 0.2..3.0f64, gr in 0.0..4.0f64, phase in 0.0..core::f64::consts::TAU,
                          zs in -6.0..6.0f64) {
        let gamma = Complex64::from_polar(gr / sigma, phase);
        let t = WickTriple::new(k, gamma, sigma).unwrap();
        let z = zs * sigma;
        let a = wick_power_exp(z, t, WickMethod::Closed);
        let b = wick_power_exp(z, t, WickMethod::Series);
        let d = wick_power_exp(z, t, WickMethod::Derivative);
        prop_assert!(rel_gap(a, b) < 1e-9, "closed/series {a} {b}");
        prop_assert!(rel_gap(a, d) < 1e-9, "closed/derivative {a} {d}");
    }
}
