use approx::assert_abs_diff_eq;
use mvgamma::quad::{integrate, Tolerance};
use mvgamma::specfun::*;
use num_complex::Complex64;
use proptest::prelude::*;

// Reference values below were computed once with 40-digit arithmetic
// (mpmath) and frozen.

#[test]
fn gamma_pdf_basic_values() {
    assert_abs_diff_eq!(gamma_pdf(1.0, 1.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
    assert_eq!(gamma_pdf(0.0, 2.0).unwrap(), 0.0);
    assert!(gamma_pdf(0.0f64, 0.5).unwrap().is_infinite());
    assert!(gamma_pdf(-1.0, 2.0).is_err());
    assert!(gamma_pdf(1.0, 0.0).is_err());
}

#[test]
fn gamma_pdf_is_derivative_of_cdf() {
    let h = 1e-5;
    let fd = (gamma_cdf(2.5 + h, 0.5).unwrap() - gamma_cdf(2.5 - h, 0.5).unwrap()) / (2.0 * h);
    assert_abs_diff_eq!(gamma_pdf(2.5, 0.5).unwrap(), fd, epsilon = 1e-7);
}

#[test]
fn gamma_cdf_values() {
    assert_abs_diff_eq!(gamma_cdf(1.0, 1.0).unwrap(), 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
    assert_abs_diff_eq!(gamma_cdf(1.0, 0.5).unwrap(), 0.842_700_792_949_714_9, epsilon = 1e-14);
    assert_abs_diff_eq!(gamma_cdf(3.0, 2.7).unwrap(), 0.647_589_384_352_280_6, epsilon = 1e-14);
    assert_eq!(gamma_cdf(0.0, 2.0).unwrap(), 0.0);
    assert!(gamma_cdf(-0.1, 2.0).is_err());
}

#[test]
fn gamma_cdf_matches_quadrature_of_density() {
    let tol = Tolerance::abs(1e-13);
    let q = integrate(|x: f64| gamma_pdf(x, 2.7).unwrap(), 0.0, 3.0, &tol);
    assert_abs_diff_eq!(gamma_cdf(3.0, 2.7).unwrap(), q.value, epsilon = 1e-10);
}

#[test]
fn ln_gamma_and_erf_reference_values() {
    assert_abs_diff_eq!(ln_gamma(0.3f64), 1.095_797_994_818_075_6, epsilon = 1e-13);
    assert_abs_diff_eq!(ln_gamma(7.5f64), 7.534_364_236_758_733, epsilon = 1e-13);
    assert_abs_diff_eq!(ln_gamma(123.4f64), 469.336_097_442_190_6, epsilon = 1e-11);
    assert_abs_diff_eq!(erf(0.1f64), 0.112_462_916_018_284_9, epsilon = 1e-15);
    assert_abs_diff_eq!(erf(1.7f64), 0.983_790_458_590_774_6, epsilon = 1e-15);
    assert_abs_diff_eq!(erf(3.3f64), 0.999_996_942_290_203_6, epsilon = 1e-15);
    assert_abs_diff_eq!(erfc(4.5f64) / 1.966_160_441_542_887_5e-10, 1.0, epsilon = 1e-13);
    assert_abs_diff_eq!(erf(-1.7f64), -0.983_790_458_590_774_6, epsilon = 1e-15);
}

#[test]
fn nc_cdf_reduces_to_central_at_zero_noncentrality() {
    let p = NonCentralParams::real(1.5, 2.0, 0.0).unwrap();
    let v = nc_gamma_cdf(&p, 1e-14).unwrap();
    assert_abs_diff_eq!(v.value.re, gamma_cdf(2.0, 1.5).unwrap(), epsilon = 1e-15);
}

#[test]
fn nc_cdf_reference_values() {
    let cases = [
        (1.5, 2.0, 0.7, 0.552_837_076_804_670_6),
        (0.5, 1.0, 1.0, 0.497_661_132_509_476_4),
        (3.0, 4.0, 2.5, 0.338_826_764_616_341_5),
        (0.75, 5.0, 12.0, 0.035_896_045_083_946_69),
        (2.2, 30.0, 25.0, 0.671_697_385_194_209_6),
        (0.5, 0.3, 40.0, 1.546_102_342_661_006e-16),
    ];
    for (a, x, y, want) in cases {
        let p = NonCentralParams::real(a, x, y).unwrap();
        let v = nc_gamma_cdf(&p, 1e-15).unwrap();
        assert!(v.converged, "{a} {x} {y}");
        assert_abs_diff_eq!(v.value.re, want, epsilon = 1e-13);
        assert_eq!(v.value.im, 0.0);
    }
}

#[test]
fn nc_cdf_complex_noncentrality_reference_values() {
    let cases = [
        (1.0, 2.0, Complex64::new(1.5, 2.0), Complex64::new(0.354_402_812_401_026_7, -0.420_463_689_374_955_3)),
        (2.5, 3.0, Complex64::new(-1.0, 3.0), Complex64::new(0.820_927_272_536_340_8, -1.052_637_561_648_579_4)),
    ];
    for (a, x, y, want) in cases {
        let p = NonCentralParams::new(a, x, y).unwrap();
        let v = nc_gamma_cdf(&p, 1e-12).unwrap();
        assert!(v.converged);
        assert_abs_diff_eq!((v.value - want).norm(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn nc_cdf_rejects_bad_domain() {
    assert!(NonCentralParams::real(0.0, 1.0, 1.0).is_err());
    assert!(NonCentralParams::real(1.0, -1.0, 1.0).is_err());
}

#[test]
fn half_integer_closed_form_example() {
    // α = 1/2, x = 1, y = 1: ½(erf 2 + erf 0).
    let v = nc_gamma_cdf_half_integer(0, 1.0, 1.0).unwrap();
    assert_abs_diff_eq!(v, 0.5 * erf(2.0), epsilon = 1e-15);
    assert_abs_diff_eq!(v, 0.497_661_132_509_476_4, epsilon = 1e-14);
}

#[test]
fn integer_closed_forms_example() {
    let tol = Tolerance::abs(1e-13);
    let p = NonCentralParams::real(3.0, 4.0, 2.5).unwrap();
    let series = nc_gamma_cdf(&p, 1e-15).unwrap().value.re;
    let finite = nc_gamma_cdf_integer_finite(3, 4.0, 2.5, &tol).unwrap();
    let trig = nc_gamma_cdf_integer_trig(3, 4.0, 2.5, &tol).unwrap();
    assert_abs_diff_eq!(series, finite, epsilon = 1e-10);
    assert_abs_diff_eq!(series, trig, epsilon = 1e-10);
}

#[test]
fn step_function_values() {
    assert_eq!(step_g0(-0.5), 0.0);
    assert_eq!(step_g0(0.0), 0.5);
    assert_eq!(step_g0(0.5), 1.0);
}

#[test]
fn nc_pdf_examples() {
    let p = NonCentralParams::real(1.0, 1.0, 0.0).unwrap();
    assert_abs_diff_eq!(nc_gamma_pdf(&p).unwrap().re, (-1.0f64).exp(), epsilon = 1e-15);
    let p = NonCentralParams::real(2.0, 0.5, 2.0).unwrap();
    assert_abs_diff_eq!(nc_gamma_pdf(&p).unwrap().re, 0.065_283_712_012_013_93, epsilon = 1e-15);
    // Derivative check at x = 1, y = 1, α = 1/2.
    let h = 1e-5;
    let cdf = |x: f64| nc_gamma_cdf(&NonCentralParams::real(0.5, x, 1.0).unwrap(), 1e-15).unwrap().value.re;
    let fd = (cdf(1.0 + h) - cdf(1.0 - h)) / (2.0 * h);
    let p = NonCentralParams::real(0.5, 1.0, 1.0).unwrap();
    assert_abs_diff_eq!(nc_gamma_pdf(&p).unwrap().re, fd, epsilon = 1e-7);
}

#[test]
fn hyp0f1_examples() {
    let one = hyp0f1(2.0, Complex64::new(0.0, 0.0), 1e-15).unwrap();
    assert_eq!(one.value.re, 1.0);
    let c = hyp0f1(0.5, Complex64::new(1.0, 0.0), 1e-15).unwrap();
    assert_abs_diff_eq!(c.value.re, 2.0f64.cosh(), epsilon = 1e-14);
    // I_0(3) from its own power series Σ (9/4)^k / (k!)².
    let mut i0 = 0.0;
    let mut t = 1.0;
    for k in 0..60 {
        if k > 0 {
            t *= 2.25 / (k as f64 * k as f64);
        }
        i0 += t;
    }
    let v = hyp0f1(1.0, Complex64::new(2.25, 0.0), 1e-15).unwrap();
    assert_abs_diff_eq!(v.value.re, i0, epsilon = 1e-12);
    let z = hyp0f1(2.0, Complex64::new(-3.0, 4.0), 1e-15).unwrap();
    assert_abs_diff_eq!(z.value.re, -0.448_201_848_148_021_75, epsilon = 1e-14);
    assert_abs_diff_eq!(z.value.im, 0.389_051_145_491_491_3, epsilon = 1e-14);
    let big = hyp0f1(1.5, Complex64::new(100.0, 0.0), 1e-15).unwrap();
    assert_abs_diff_eq!(big.value.re / 12_129_129.885_244_757, 1.0, epsilon = 1e-13);
    assert_abs_diff_eq!(ln_hyp0f1(0.5, 1e6), 1_999.306_852_819_440_1, epsilon = 1e-10);
    assert_abs_diff_eq!(ln_hyp0f1(1.5, 100.0), 12_129_129.885_244_757f64.ln(), epsilon = 1e-13);
}

#[test]
fn hyp0f1_log_supermodularity_identity() {
    // F = 0F1/Γ: F(α)F(α+1) + z(F(α+2)F(α) - F(α+1)²) > 0.
    for &alpha in &[0.5, 1.0, 3.0] {
        for i in 1..=100 {
            let z = 0.5 * i as f64;
            let f = |a: f64| (ln_hyp0f1(a, z) - ln_gamma(a)).exp();
            let (f0, f1, f2) = (f(alpha), f(alpha + 1.0), f(alpha + 2.0));
            let v = f0 * f1 + z * (f2 * f0 - f1 * f1);
            assert!(v > 0.0, "alpha {alpha} z {z}: {v}");
        }
    }
}

#[test]
fn laguerre_examples() {
    assert_eq!(laguerre_gen(0, 3.0, 7.0), 1.0);
    assert_abs_diff_eq!(laguerre_gen(1, 1.0, 2.0), -1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(laguerre_gen(2, 1.0, 2.0), -1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(laguerre_gen(5, 0.5, 3.3), -0.334_764, epsilon = 1e-13);
    assert_abs_diff_eq!(laguerre_gen(40, 2.0, 10.0), 38.255_983_994_683_87, epsilon = 1e-10);
    // Rescaled evaluation far into the overflow range.
    let (m, s) = laguerre_scaled(600, 1.0f64, 5000.0);
    assert!(m.is_finite() && s > 0.0);
}

#[test]
fn laguerre_orthogonality_under_quadrature() {
    let tol = Tolerance::abs(1e-13);
    for &alpha in &[0.5, 1.0, 2.5] {
        for m in 0..5 {
            for k in 0..5 {
                let v = mvgamma::quad::integrate_gamma_weighted_with(
                    |y| laguerre_gen(m, alpha, y) * laguerre_gen(k, alpha, y),
                    alpha,
                    mvgamma::quad::GammaTail { bound: 1e3, degree: 8 },
                    &tol,
                )
                .unwrap();
                let want = if m == k { laguerre_norm(k, alpha) } else { 0.0 };
                assert_abs_diff_eq!(v.value, want, epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn poisson_kernel_examples() {
    assert_abs_diff_eq!(poisson_kernel(1.3, 0.4, 2.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
    let v = poisson_kernel(1.0, 2.0, 1.5, 0.5).unwrap();
    assert_abs_diff_eq!(v, 0.967_002_286_881_647, epsilon = 1e-13);
    let mut partial = 0.0;
    for k in 0..80 {
        partial += laguerre_norm(k, 1.5f64).recip() * 0.25f64.powi(k as i32)
            * laguerre_gen(k, 1.5, 1.0)
            * laguerre_gen(k, 1.5, 2.0);
    }
    assert_abs_diff_eq!(v, partial, epsilon = 1e-8);
    assert_eq!(
        poisson_kernel(0.7, 3.1, 0.8, 0.6).unwrap(),
        poisson_kernel(3.1, 0.7, 0.8, 0.6).unwrap()
    );
    assert!(poisson_kernel(1.0, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn poisson_kernel_matches_laguerre_sum_up_to_point_nine() {
    for &(y1, y2, alpha, theta) in &[(0.3, 2.2, 0.5, 0.9), (4.0, 1.5, 2.0, 0.8), (0.1, 0.2, 1.0, -0.9)] {
        let v = poisson_kernel(y1, y2, alpha, theta).unwrap();
        let mut partial = 0.0;
        for k in 0..600 {
            let (m1, s1) = laguerre_scaled(k, alpha, y1);
            let (m2, s2) = laguerre_scaled(k, alpha, y2);
            let ln_w = 2.0 * k as f64 * (theta as f64).abs().ln() - laguerre_norm(k, alpha as f64).ln();
            partial += m1 * m2 * (s1 + s2 + ln_w).exp();
        }
        assert_abs_diff_eq!(v, partial, epsilon = 1e-8);
    }
}

#[test]
fn f32_instantiation() {
    let v: f32 = gamma_cdf(1.0f32, 1.0f32).unwrap();
    assert!((v - 0.632_120_6).abs() < 1e-6);
    let t = NcGammaTable::new(1.5f32, 2.0).unwrap();
    let s = t.cdf(0.7, 1e-6);
    assert!((s.value - 0.552_837_1).abs() < 1e-5);
    assert!((erf(1.0f32) - 0.842_700_8).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn nc_cdf_in_unit_interval_and_monotone_in_x(a in 0.2f64..5.0, x in 0.01f64..20.0, y in 0.0f64..30.0, dx in 0.0f64..3.0) {
        let t = NcGammaTable::new(a, x).unwrap();
        let t2 = NcGammaTable::new(a, x + dx).unwrap();
        let v = t.cdf(y, 1e-14);
        let v2 = t2.cdf(y, 1e-14);
        prop_assert!(v.converged);
        prop_assert!((0.0..=1.0).contains(&v.value));
        prop_assert!(v2.value >= v.value - 1e-14);
    }

    #[test]
    fn nc_cdf_decreases_in_noncentrality(a in 0.2f64..5.0, x in 0.01f64..20.0, y in 0.0f64..30.0, dy in 0.0f64..3.0) {
        let t = NcGammaTable::new(a, x).unwrap();
        prop_assert!(t.cdf(y + dy, 1e-14).value <= t.cdf(y, 1e-14).value + 1e-14);
    }

    #[test]
    fn shape_recurrence_holds(a in 0.2f64..5.0, x in 0.01f64..20.0, y in 0.0f64..30.0) {
        // G_{α+1}(x;y) = G_α(x;y) - g_{α+1}(x;y)
        let g0 = NcGammaTable::new(a, x).unwrap().cdf(y, 1e-15).value;
        let g1 = NcGammaTable::new(a + 1.0, x).unwrap().cdf(y, 1e-15).value;
        let d = nc_gamma_pdf(&NonCentralParams::real(a + 1.0, x, y).unwrap()).unwrap().re;
        prop_assert!((g1 - (g0 - d)).abs() < 1e-12);
    }
}
