use approx::assert_abs_diff_eq;
use mvgamma::quad::*;
use mvgamma::specfun::{laguerre_gen, ln_beta, poisson_kernel};

fn tight() -> Tolerance<f64> {
    Tolerance::new(1e-13, 1e-13, 4_000).unwrap()
}

#[test]
fn tolerance_validation() {
    assert!(Tolerance::new(0.0, 1e-3, 10).is_err());
    assert!(Tolerance::new(1e-3, 1.5, 10).is_err());
    assert!(Tolerance::new(1e-3, 1e-3, 0).is_err());
}

#[test]
fn gamma_weighted_examples() {
    let one = integrate_gamma_weighted(|_| 1.0, 2.0, &tight()).unwrap();
    assert!(one.converged);
    assert_abs_diff_eq!(one.value, 1.0, epsilon = 1e-12);
    let mean = integrate_gamma_weighted_with(|y| y, 3.0, GammaTail { bound: 1.0, degree: 1 }, &tight()).unwrap();
    assert_abs_diff_eq!(mean.value, 3.0, epsilon = 1e-10);
    let orth = integrate_gamma_weighted_with(
        |y| laguerre_gen(2, 1.0, y),
        1.0,
        GammaTail { bound: 2.0, degree: 2 },
        &tight(),
    )
    .unwrap();
    assert_abs_diff_eq!(orth.value, 0.0, epsilon = 1e-9);
}

#[test]
fn gamma_weighted_small_shapes() {
    for &alpha in &[0.1, 0.3, 0.5, 0.75] {
        let one = integrate_gamma_weighted(|_| 1.0, alpha, &tight()).unwrap();
        assert_abs_diff_eq!(one.value, 1.0, epsilon = 1e-11);
    }
}

#[test]
fn gamma_weighted_reports_bounding_errors() {
    // E[cos Y] for Y ~ Gamma(2) is Re (1 - i)^{-2} = 0.
    for &t in &[1e-4, 1e-7, 1e-10] {
        let tol = Tolerance::abs(t);
        let r = integrate_gamma_weighted(|y: f64| y.cos(), 2.0, &tol).unwrap();
        assert!(r.converged);
        assert!(r.value.abs() <= r.abs_error_estimate.max(1e-15), "{t}: {} vs {}", r.value, r.abs_error_estimate);
    }
}

#[test]
fn halving_tolerance_does_not_raise_error_estimate() {
    let mut last = f64::INFINITY;
    for k in 3..12 {
        let tol = Tolerance::abs(10f64.powi(-k));
        let r = integrate_gamma_weighted(|y: f64| (1.0 + y).recip(), 1.5, &tol).unwrap();
        assert!(r.abs_error_estimate <= last * 1.000_001);
        last = r.abs_error_estimate;
    }
}

#[test]
fn two_dimensional_examples() {
    let tol = Tolerance::new(1e-11, 1e-11, 2_000).unwrap();
    let one = integrate_2d_gamma(|_, _| 1.0, 1.5, GammaTail::default(), &tol).unwrap();
    assert_abs_diff_eq!(one.value, 1.0, epsilon = 1e-10);
    let prod = integrate_2d_gamma(|a, b| a * b, 2.0, GammaTail { bound: 1.0, degree: 2 }, &tol).unwrap();
    assert_abs_diff_eq!(prod.value, 4.0, epsilon = 1e-8);
    let kernel = integrate_2d_gamma(
        |a, b| poisson_kernel(a, b, 1.0, 0.3).unwrap(),
        1.0,
        GammaTail::default(),
        &tol,
    )
    .unwrap();
    assert_abs_diff_eq!(kernel.value, 1.0, epsilon = 1e-7);
}

#[test]
fn angle_examples() {
    let tol = tight();
    let pi = integrate_angle(|_| 1.0, &tol).unwrap();
    assert_abs_diff_eq!(pi.value, std::f64::consts::PI, epsilon = 1e-12);
    for &(alpha, eps) in &[(1.0, 1e-10), (0.75, 1e-8), (2.5, 1e-10)] {
        let norm = ln_beta(0.5f64, alpha - 0.5).exp();
        let r = integrate_angle(|phi: f64| (phi.sin().powi(2)).powf(alpha - 1.0) / norm, &tol).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = eps);
    }
}

#[test]
fn gauss_rules_integrate_polynomials() {
    let leg = gauss_legendre::<f64>(10);
    let s: f64 = leg.nodes.iter().zip(&leg.weights).map(|(x, w)| w * x.powi(18)).sum();
    assert_abs_diff_eq!(s, 1.0 / 19.0, epsilon = 1e-14);
    let jac = gauss_jacobi::<f64>(12, -0.5, -0.5);
    // Chebyshev weight: E[x²] = 1/2, E[x⁴] = 3/8.
    let m2: f64 = jac.nodes.iter().zip(&jac.weights).map(|(x, w)| w * x * x).sum();
    let m4: f64 = jac.nodes.iter().zip(&jac.weights).map(|(x, w)| w * x.powi(4)).sum();
    assert_abs_diff_eq!(m2, 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(m4, 0.375, epsilon = 1e-14);
    for &alpha in &[0.5, 1.0, 2.5] {
        let lag = gauss_laguerre::<f64>(200, alpha);
        let w: Vec<f64> = lag.ln_weights.iter().map(|l| l.exp()).collect();
        let total: f64 = w.iter().sum();
        let mean: f64 = lag.nodes.iter().zip(&w).map(|(x, w)| x * w).sum();
        let second: f64 = lag.nodes.iter().zip(&w).map(|(x, w)| x * x * w).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(mean, alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(second, alpha * (alpha + 1.0), epsilon = 1e-11);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let f = |y: f64| (y.sin() + 1.5).ln();
    let a = integrate_gamma_weighted(f, 0.7, &tight()).unwrap();
    let b = integrate_gamma_weighted(f, 0.7, &tight()).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn pairwise_sum_matches_naive_on_small_input() {
    assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
    assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
}
