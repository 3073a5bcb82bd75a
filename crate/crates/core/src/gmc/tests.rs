use super::*;
use crate::field::Regularization;
use crate::rng;
use crate::testutil::sampler;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bump(grid: GridSpec) -> TestFunction {
    TestFunction::smoothed_indicator(grid, 0.25, 0.75, 0.1).unwrap()
}

#[test]
fn test_function_shapes() {
    let g = GridSpec::new(1, 256).unwrap();
    let f = bump(g);
    assert_eq!(f.sup_norm(), 1.0);
    assert_eq!(f.values()[g.nearest(&[0.1, 0.0])], 0.0);
    assert_eq!(f.values()[g.nearest(&[0.5, 0.0])], 1.0);
    assert!(f.integral() > 0.35 && f.integral() < 0.5);
    assert_eq!(TestFunction::constant(g, 2.0).integral(), 2.0);
    let mut v = vec![0.0; 256];
    v[10] = 1.0;
    assert!(TestFunction::from_values(g, v, 0.25, 0.75).is_err());
    assert!(TestFunction::smoothed_indicator(g, 0.4, 0.5, 0.1).is_err());
}

#[test]
fn zero_field_gives_plain_integral() {
    let g = GridSpec::new(2, 64).unwrap();
    let f = bump(g);
    let x = vec![0.0; g.points()];
    let x = GridField::new(g, &x).unwrap();
    // :e^{0 X}: = 1 for any sigma.
    let v = estimate_i(&f, x, 0, c(0.0, 0.0), 1.3).unwrap();
    assert!((v.re - f.integral()).abs() < 1e-15 && v.im == 0.0);
    assert!(estimate_i(&f, x, 0, c(0.5, 0.0), 0.0).is_err());
}

#[test]
fn grid_mismatch_is_rejected() {
    let f = bump(GridSpec::new(1, 128).unwrap());
    let x = vec![0.0; 64];
    let x = GridField::new(GridSpec::new(1, 64).unwrap(), &x).unwrap();
    assert!(matches!(estimate_i(&f, x, 0, c(1.0, 0.0), 1.0), Err(Error::GridMismatch { .. })));
    assert!(GridField::new(GridSpec::new(1, 64).unwrap(), &[0.0; 10]).is_err());
}

#[test]
fn series_at_zero_shift_is_the_base_estimate() {
    let s = sampler(1, 0.5, 1.0, 256, 4.0);
    let f = bump(s.grid());
    let reg = Regularization::Truncated(4.0);
    let sigma = s.variance(&s.view(reg).unwrap()).unwrap().sqrt();
    let x = s.sample(3).field(reg).unwrap();
    let x = GridField::new(s.grid(), &x).unwrap();
    let (v, _) = series_eval(&f, x, 0.7, c(0.7, 0.0), sigma, 1e-14).unwrap();
    assert_eq!(v, estimate_i(&f, x, 0, c(0.7, 0.0), sigma).unwrap());
}

#[test]
fn series_matches_direct_inside_the_eye() {
    let s = sampler(2, 0.5, 1.0, 64, 3.0);
    let f = bump(s.grid());
    let reg = Regularization::Truncated(3.0);
    let sigma = s.variance(&s.view(reg).unwrap()).unwrap().sqrt();
    let x = s.sample(8).field(reg).unwrap();
    let x = GridField::new(s.grid(), &x).unwrap();
    for gp in [c(0.5, 0.8), c(-0.3, 1.1), c(1.2, 0.3)] {
        let (v, k) = series_eval(&f, x, 0.5, gp, sigma, 1e-15).unwrap();
        let d = direct_complex(&f, x, gp, sigma).unwrap();
        assert!((v - d).norm() <= 1e-10 * d.norm().max(1.0), "{gp}: {v} vs {d} after {k}");
    }
}

#[test]
fn abs_coefficients_match_closed_form() {
    let s = sampler(1, 0.0, 1.0, 128, 2.0);
    let f = bump(s.grid());
    let x = s.sample(2).field(Regularization::Truncated(2.0)).unwrap();
    let x = GridField::new(s.grid(), &x).unwrap();
    let sigma = 2.0f64.sqrt();
    let a = abs_coefficients(&f, x, 0.8, sigma, 6).unwrap();
    for (k, v) in a.iter().enumerate() {
        let e = estimate_i(&f, x, k, c(0.8, 0.0), sigma).unwrap().norm();
        assert!((v - e).abs() <= 1e-11 * e.max(1.0), "k={k}: {v} vs {e}");
    }
}

#[test]
fn oracle_with_white_covariance() {
    // Independent sites: only the diagonal carries covariance.
    let g = GridSpec::new(1, 64).unwrap();
    let f = TestFunction::constant(g, 1.0);
    let mut cov = vec![0.0; 64];
    cov[0] = 1.0;
    let gamma = c(0.5, 0.0);
    let second = moment_oracle(MomentMode::Second { k: 0 }, &f, gamma, &cov).unwrap();
    let expect = 1.0 + ((0.25f64).exp() - 1.0) / 64.0;
    assert!((second.re - expect).abs() < 1e-13, "{second}");
    let l2 = moment_oracle(MomentMode::ComplexL2 { gamma_prime: c(0.3, 0.4) }, &f, gamma, &cov).unwrap();
    assert!((l2.re - (1.0 + ((0.25f64).exp() - 1.0) / 64.0)).abs() < 1e-13);
    let mean = moment_oracle(MomentMode::Mean { k: 2 }, &f, gamma, &cov).unwrap();
    assert_eq!(mean, c(0.0, 0.0));
    assert!(moment_oracle(MomentMode::Second { k: 0 }, &f, gamma, &cov[..10]).is_err());
}

#[test]
fn oracles_match_monte_carlo() {
    let s = sampler(1, 0.5, 1.0, 128, 3.0);
    let f = bump(s.grid());
    let reg = Regularization::Truncated(3.0);
    let view = s.view(reg).unwrap();
    let cov = s.covariance(&view).unwrap();
    let sigma = s.variance(&view).unwrap().sqrt();
    let gamma = c(0.6, 0.0);
    let n = 3000;
    let mut m0 = Vec::new();
    let mut m1 = Vec::new();
    let mut sq1 = Vec::new();
    for i in 0..n {
        let x = s.sample(rng::split(21, i)).field(reg).unwrap();
        let x = GridField::new(s.grid(), &x).unwrap();
        m0.push(estimate_i(&f, x, 0, gamma, sigma).unwrap().re);
        let i1 = estimate_i(&f, x, 1, gamma, sigma).unwrap().re;
        m1.push(i1);
        sq1.push(i1 * i1);
    }
    let ms = MeanSe::of(&m0);
    assert!(ms.within(f.integral(), 4.0), "{ms:?}");
    assert!(MeanSe::of(&m1).within(0.0, 4.0));
    let oracle = moment_oracle(MomentMode::Second { k: 1 }, &f, gamma, &cov).unwrap();
    let ms = MeanSe::of(&sq1);
    assert!(ms.within(oracle.re, 4.0), "{ms:?} vs {oracle}");
}

#[test]
fn eye_examples() {
    for d in [1usize, 2] {
        let r = (d as f64).sqrt();
        assert!(eye_contains(c(0.0, 0.9 * r), d));
        assert!(!eye_contains(c((2.0 * d as f64).sqrt(), 0.0), d));
        assert!(eye_contains(c(0.0, 0.0), d));
    }
    let p = c(0.8 * 2.0, 0.3 * 2f64.sqrt());
    assert!(!eye_contains(p, 2));
    assert!(!eye_contains_scan(p, 2, 10_000));
}

#[test]
fn eye_is_the_disc_union() {
    // (|Im| < sqrt d and |Re| + |Im| < sqrt(2d)) would also admit this point.
    let p = c(0.3, 0.98);
    assert!(!eye_contains(p, 1));
    assert!(!eye_contains_scan(p, 1, 10_000));
    let mut mismatches = 0;
    for d in [1usize, 2] {
        let (w, h) = ((2.0 * d as f64).sqrt(), (d as f64).sqrt());
        for i in 0..200 {
            for j in 0..200 {
                let z = c(-1.1 * w + 2.2 * w * (i as f64 + 0.5) / 200.0, -1.1 * h + 2.2 * h * (j as f64 + 0.5) / 200.0);
                if eye_contains(z, d) != eye_contains_scan(z, d, 10_000) {
                    mismatches += 1;
                }
            }
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn disc_radius_domain() {
    assert!((disc_radius(0.0, 2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!(disc_radius(2.0, 2).is_err());
    assert!(disc_radius(f64::NAN, 1).is_err());
    assert!(disc_radius(1.0, 1).unwrap() > 0.0);
}

#[test]
fn growth_rows_normalise() {
    assert_eq!(growth_normalizer(0, 0.5, 1, 0.1), 1.0);
    let n3 = growth_normalizer(3, 0.0, 2, 0.0);
    assert!((n3 - 6.0 * (2f64.sqrt() / 2.0).powi(3)).abs() < 1e-14);
    let samples = vec![vec![vec![1.0, 2.0]]; 4];
    let rows = growth_rows(&[0.1], &samples, 0.0, 1, 0.2).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].mean_abs, 2.0);
    assert!((rows[1].normalized - 2.0 / growth_normalizer(1, 0.0, 1, 0.2)).abs() < 1e-15);
    assert!(growth_rows(&[0.1], &samples, 0.0, 1, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eye_is_symmetric_and_contains_interval(re in -2.0..2.0f64, im in -1.5..1.5f64, d in 1usize..=2) {
        let z = c(re, im);
        let inside = eye_contains(z, d);
        prop_assert_eq!(inside, eye_contains(z.conj(), d));
        prop_assert_eq!(inside, eye_contains(-z, d));
        if re.abs() < (2.0 * d as f64).sqrt() {
            prop_assert!(eye_contains(c(re, 0.0), d));
        }
    }

    #[test]
    fn eye_discs_lie_inside(g in -1.99..1.99f64, theta in 0.0..core::f64::consts::TAU, frac in 0.0..0.999f64) {
        let r = disc_radius(g, 2).unwrap();
        let z = c(g, 0.0) + Complex64::from_polar(frac * r, theta);
        prop_assert!(eye_contains(z, 2));
    }
}
