use mvgamma::corrstruct::*;
use mvgamma::engines::*;
use mvgamma::linalg::Matrix;
use mvgamma::oracle::{mc_cdf, sample_chi_square};
use mvgamma::quad::{integrate, Tolerance};
use mvgamma::specfun::gamma_cdf;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn tol() -> Tolerance<f64> {
    Tolerance::default()
}

fn pt(x: &[f64], alpha: f64) -> EvalPoint {
    EvalPoint::new(x.to_vec(), alpha).unwrap()
}

fn two_block(theta: f64) -> BlockFactorialStructure<f64> {
    BlockFactorialStructure::two_block(2, vec![0.5; 4], theta).unwrap()
}

fn one_factorial(p: &EvalPoint, a: &[f64]) -> f64 {
    let s = OneFactorialStructure::new(a.to_vec()).unwrap();
    let v = cdf_one_factorial(p, &s, &tol()).unwrap();
    assert!(v.converged);
    v.value
}

fn ar1(n: usize, rho: f64) -> CorrelationMatrix<f64> {
    CorrelationMatrix::validate(Matrix::from_fn(n, |i, j| rho.powi((i as i32 - j as i32).abs()))).unwrap()
}

fn equi(n: usize, r: f64) -> CorrelationMatrix<f64> {
    CorrelationMatrix::validate(Matrix::from_fn(n, |i, j| if i == j { 1.0 } else { r })).unwrap()
}

// Reference values below come from an independent numpy/mpmath implementation
// of the same representations (nested adaptive quadrature, no shared code).
const TWO_BLOCK_A1_T06: f64 = 0.377804435457381;
const TWO_BLOCK_A1_T115: f64 = 0.391690116066508;
const TWO_BLOCK_A05_T07: f64 = 0.7154009363137427;
const TWO_BLOCK_A05_T11: f64 = 0.72149445384822;
const TWO_BLOCK_A1_T1: f64 = 0.386964074042956;
const THREE_BLOCK: f64 = 0.19082594908561276;

#[test]
fn one_factorial_independence_and_marginal() {
    let v = one_factorial(&pt(&[1.0, 1.0], 1.0), &[0.0, 0.0]);
    assert!((v - (1.0 - (-1.0f64).exp()).powi(2)).abs() < 1e-14);
    for a in [0.0, 0.4, 0.9] {
        let v = one_factorial(&pt(&[1.7], 0.8), &[a]);
        assert!((v - gamma_cdf(1.7, 0.8).unwrap()).abs() < 1e-10, "a = {a}: {v}");
    }
}

#[test]
fn one_factorial_matches_chi_square_sampler() {
    let a = [0.3, 0.4, 0.5, 0.6, 0.7];
    let x = [2.0; 5];
    let r = OneFactorialStructure::new(a.to_vec()).unwrap().assemble().unwrap();
    let batch = sample_chi_square(&r, 1, 1_000_000, 7).unwrap();
    let mc = mc_cdf(&batch, &x).unwrap();
    let v = one_factorial(&pt(&x, 0.5), &a);
    assert!((v - mc.mean).abs() < 3.5 * mc.std_error, "{v} vs {} ± {}", mc.mean, mc.std_error);
}

#[test]
fn two_block_engines_agree_with_reference() {
    let p = pt(&[1.5; 4], 1.0);
    let s = two_block(0.6);
    let lag = cdf_two_block_laguerre(&p, &s, &tol()).unwrap();
    let ker = cdf_two_block_kernel(&p, &s, &tol()).unwrap();
    let two = cdf_two_factorial(&p, &s, &tol()).unwrap();
    assert!(lag.converged && ker.converged && two.converged);
    assert!((lag.value - TWO_BLOCK_A1_T06).abs() < 1e-10, "{}", lag.value);
    assert!((ker.value - TWO_BLOCK_A1_T06).abs() < 1e-8, "{}", ker.value);
    assert!((two.value - TWO_BLOCK_A1_T06).abs() < 1e-8, "{}", two.value);
}

#[test]
fn two_factorial_beyond_unit_theta() {
    let p = pt(&[1.5; 4], 1.0);
    let s = two_block(1.15);
    assert!(cdf_two_block_laguerre(&p, &s, &tol()).is_err());
    let (route, v) = cdf_two_block(&p, &s, &tol()).unwrap();
    assert_eq!(route, TwoBlockRoute::TwoFactorial);
    assert!((v.value - TWO_BLOCK_A1_T115).abs() < 1e-8, "{}", v.value);
}

#[test]
fn half_shape_routes() {
    let p = pt(&[1.5; 4], 0.5);
    let lag = cdf_two_block_laguerre(&p, &two_block(0.7), &tol()).unwrap();
    let half = cdf_two_factorial_half(&p, &two_block(0.7), &tol()).unwrap();
    assert!((lag.value - TWO_BLOCK_A05_T07).abs() < 1e-10, "{}", lag.value);
    assert!((half.value - lag.value).abs() < 1e-5, "{} vs {}", half.value, lag.value);
    let (route, v) = cdf_two_block(&p, &two_block(1.1), &tol()).unwrap();
    assert_eq!(route, TwoBlockRoute::TwoFactorialHalf);
    assert!((v.value - TWO_BLOCK_A05_T11).abs() < 1e-8, "{}", v.value);
    assert!(cdf_two_factorial(&p, &two_block(0.7), &tol()).is_err());
}

#[test]
fn two_block_unit_theta_merges_and_is_the_limit() {
    let p = pt(&[1.5; 4], 1.0);
    let merged = one_factorial(&p, &[0.5; 4]);
    assert!((merged - TWO_BLOCK_A1_T1).abs() < 1e-10);
    let at1 = cdf_two_block_laguerre(&p, &two_block(1.0), &tol()).unwrap().value;
    assert!((at1 - merged).abs() < 1e-10);
    let mut prev = 0.0;
    for t in [0.9, 0.99, 0.999] {
        let v = cdf_two_block_laguerre(&p, &two_block(t), &tol()).unwrap().value;
        assert!(v > prev && v <= merged + 1e-12, "theta = {t}: {v}");
        prev = v;
    }
    assert!(merged - prev < 1e-3);
}

#[test]
fn zero_theta_gives_block_product() {
    let x = [1.1, 0.7, 1.9, 1.3];
    for alpha in [0.5, 1.0, 2.0] {
        let p = pt(&x, alpha);
        let prod = one_factorial(&pt(&x[..2], alpha), &[0.5, 0.5]) * one_factorial(&pt(&x[2..], alpha), &[0.5, 0.5]);
        let s = two_block(0.0);
        let lag = cdf_two_block_laguerre(&p, &s, &tol()).unwrap().value;
        let ker = cdf_two_block_kernel(&p, &s, &tol()).unwrap().value;
        assert!((lag - prod).abs() < 1e-12 && (ker - prod).abs() < 1e-10);
        if alpha > 0.5 {
            let two = cdf_two_factorial(&p, &s, &tol()).unwrap().value;
            assert!((two - prod).abs() < 1e-10);
        }
    }
}

#[test]
fn kernel_agrees_with_laguerre_at_half_shape() {
    let s = BlockFactorialStructure::two_block(2, vec![0.3, 0.5, 0.4, 0.6, 0.2], 0.6).unwrap();
    let p = pt(&[1.0, 0.8, 1.4, 1.1, 0.6], 0.5);
    let lag = cdf_two_block_laguerre(&p, &s, &tol()).unwrap().value;
    let ker = cdf_two_block_kernel(&p, &s, &tol()).unwrap().value;
    assert!((lag - ker).abs() < 1e-6, "{lag} vs {ker}");
}

#[test]
fn laguerre_coefficients_obey_parseval() {
    let c = LaguerreCoefficients::new(&[1.0, 1.5, 0.7], &[0.5, 0.6, 0.4], 0.75, 40, 1e-12).unwrap();
    assert!(c.converged);
    let mut partial = 0.0;
    for k in 0..=c.kmax() {
        let next = partial + c.h[k] * c.c[k] * c.c[k];
        assert!(next >= partial && next <= c.norm_sq + 1e-12 && next <= 1.0);
        partial = next;
    }
    assert!(c.parseval_remainder(41) < 1e-6);
    let block = one_factorial(&pt(&[1.0, 1.5, 0.7], 0.75), &[0.5, 0.6, 0.4]);
    assert!((c.c[0] - block).abs() < 1e-10);
    for k in 1..5 {
        assert_eq!(coeff_cjk(&[1.0, 2.0], 1.0, &[0.0, 0.0], k, 1e-12).unwrap(), 0.0);
    }
}

fn three_block_params(variant: ThreeBlockVariant, theta: [f64; 3]) -> ThreeBlockSeriesParams {
    let s = BlockFactorialStructure::three_block([2, 2, 2], vec![0.5; 6], theta).unwrap();
    ThreeBlockSeriesParams::new(s, Tolerance::abs(1e-12), 200, variant).unwrap()
}

#[test]
fn three_block_variants_match_reference() {
    let p = pt(&[1.2, 1.5, 1.0, 2.0, 1.4, 1.7], 1.0);
    for variant in [ThreeBlockVariant::Direct, ThreeBlockVariant::Rearranged] {
        let v = cdf_three_block(&p, &three_block_params(variant, [0.3, 0.25, 0.2])).unwrap();
        assert!(v.converged, "{variant:?}");
        assert!((v.value - THREE_BLOCK).abs() < 1e-10, "{variant:?}: {}", v.value);
    }
}

#[test]
fn three_block_identity_is_block_product() {
    let x = [1.2, 1.5, 1.0, 2.0, 1.4, 1.7];
    let p = pt(&x, 1.0);
    let prod: f64 = x.chunks(2).map(|c| one_factorial(&pt(c, 1.0), &[0.5, 0.5])).product();
    for variant in [ThreeBlockVariant::Direct, ThreeBlockVariant::Rearranged] {
        let v = cdf_three_block(&p, &three_block_params(variant, [0.0; 3])).unwrap();
        assert!((v.value - prod).abs() < 1e-10, "{variant:?}");
    }
}

type Mono = [u32; 6];

fn poly_mul(a: &BTreeMap<Mono, BigRational>, b: &BTreeMap<Mono, BigRational>) -> BTreeMap<Mono, BigRational> {
    let mut out: BTreeMap<Mono, BigRational> = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Mono = std::array::from_fn(|i| ma[i] + mb[i]);
            *out.entry(m).or_insert_with(|| BigRational::from_integer(0.into())) += ca * cb;
        }
    }
    out
}

#[test]
fn three_block_weights_match_symbolic_expansion() {
    // (1 − u)^{−α} = Σ_m (α)_m/m! u^m with u = ϑ₁²ζ₂ζ₃ + ϑ₂²ζ₁ζ₃ + ϑ₃²ζ₁ζ₂ − 2ϑ₁ϑ₂ϑ₃ζ₁ζ₂ζ₃,
    // monomials as exponents of (ϑ₁, ϑ₂, ϑ₃, ζ₁, ζ₂, ζ₃).
    let rat = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let alpha = rat(3, 2);
    let u: BTreeMap<Mono, BigRational> = [
        ([2, 0, 0, 0, 1, 1], rat(1, 1)),
        ([0, 2, 0, 1, 0, 1], rat(1, 1)),
        ([0, 0, 2, 1, 1, 0], rat(1, 1)),
        ([1, 1, 1, 1, 1, 1], rat(-2, 1)),
    ]
    .into_iter()
    .collect();
    let mut expansion: BTreeMap<Mono, BigRational> = BTreeMap::new();
    let mut power: BTreeMap<Mono, BigRational> = [([0; 6], rat(1, 1))].into_iter().collect();
    let mut coef = rat(1, 1);
    for m in 0..=4i64 {
        for (mono, c) in &power {
            *expansion.entry(*mono).or_insert_with(|| rat(0, 1)) += &coef * c;
        }
        coef = coef * (&alpha + rat(m, 1)) / rat(m + 1, 1);
        power = poly_mul(&power, &u);
    }
    // Different index tuples can share a monomial, e.g. (0,0,0,2) and (1,1,1,0).
    let mut summed: BTreeMap<Mono, BigRational> = BTreeMap::new();
    for k in 0..=4 {
        for parts in three_block_terms(k) {
            let [k1, k2, k3, k4] = parts.map(|v| v as u32);
            let k = k as u32;
            let mono = [2 * k1 + k4, 2 * k2 + k4, 2 * k3 + k4, k - k1, k - k2, k - k3];
            *summed.entry(mono).or_insert_with(|| rat(0, 1)) += three_block_weight(alpha.clone(), parts);
        }
    }
    expansion.retain(|_, c| *c != rat(0, 1));
    summed.retain(|_, c| *c != rat(0, 1));
    assert_eq!(summed, expansion);
}

#[test]
fn tree_matches_one_factorial_in_two_dimensions() {
    let r = CorrelationMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let t = tree_structure(&r, None).unwrap();
    for alpha in [0.5, 1.0, 2.5] {
        let p = pt(&[1.3, 0.8], alpha);
        let v = cdf_tree(&p, &t, &tol()).unwrap().value;
        let w = one_factorial(&p, &[0.5f64.sqrt(); 2]);
        assert!((v - w).abs() < 1e-9, "alpha = {alpha}: {v} vs {w}");
    }
    let v = cdf_tree(&pt(&[1.3, 0.8], 1.0), &t, &tol()).unwrap().value;
    assert!((v - 0.4340875945650877).abs() < 1e-10);
}

#[test]
fn tree_pdf_integrates_to_cdf() {
    let r = ar1(2, 0.5);
    let t = tree_structure(&r, None).unwrap();
    let q = Tolerance::abs(1e-10);
    let (x1, x2) = (1.4, 0.9);
    let v = integrate(|u| integrate(|w| pdf_tree(&[u, w], 1.0, &t).unwrap(), 0.0, x2, &q).value, 0.0, x1, &q).value;
    let c = cdf_tree(&pt(&[x1, x2], 1.0), &t, &tol()).unwrap().value;
    assert!((v - c).abs() < 1e-8, "{v} vs {c}");
}

#[test]
fn tree_pdf_laplace_transform_on_a_path() {
    let r = ar1(3, 0.5);
    let t = tree_structure(&r, None).unwrap();
    let ts = [0.1, 0.2, 0.3];
    let q = Tolerance::abs(1e-9);
    let upper = 60.0;
    let lt = integrate(
        |a| {
            integrate(
                |b| {
                    integrate(
                        |c| {
                            let s = ts[0] * a + ts[1] * b + ts[2] * c;
                            pdf_tree(&[a, b, c], 1.0, &t).unwrap() * (-s).exp()
                        },
                        0.0,
                        upper,
                        &q,
                    )
                    .value
                },
                0.0,
                upper,
                &q,
            )
            .value
        },
        0.0,
        upper,
        &q,
    )
    .value;
    let m = Matrix::from_fn(3, |i, j| f64::from(u8::from(i == j)) + r.get(i, j) * ts[j]);
    let expect = m.det().powf(-1.0);
    assert!((lt - expect).abs() < 1e-5, "{lt} vs {expect}");
}

#[test]
fn tree_path_matches_sampler() {
    let r = ar1(3, 0.5);
    let t = tree_structure(&r, None).unwrap();
    let x = [1.0, 1.5, 2.0];
    let v = cdf_tree(&pt(&x, 1.0), &t, &tol()).unwrap();
    assert!(v.converged);
    let batch = sample_chi_square(&r, 2, 1_000_000, 11).unwrap();
    let mc = mc_cdf(&batch, &x).unwrap();
    assert!((v.value - mc.mean).abs() < 3.5 * mc.std_error, "{} vs {} ± {}", v.value, mc.mean, mc.std_error);
}

#[test]
fn rho_block_matches_two_block_laguerre() {
    // Equicorrelated blocks r with cross correlation ρ are two-block with a = √r, ϑ = ρ/r.
    let x = [1.2, 0.9, 1.6, 1.1];
    let p = pt(&x, 1.0);
    for (r, rho) in [(0.4, 0.1), (0.5, 0.3)] {
        let exact = cdf_rho_block(&p, &equi(2, r), &equi(2, r), rho, RhoBlockOrder::ExactSeries, &tol()).unwrap();
        let s = BlockFactorialStructure::two_block(2, vec![r.sqrt(); 4], rho / r).unwrap();
        let lag = cdf_two_block_laguerre(&p, &s, &tol()).unwrap();
        assert!(exact.converged);
        assert!((exact.value - lag.value).abs() < 1e-9, "r = {r}: {} vs {}", exact.value, lag.value);
    }
    let exact = cdf_rho_block(&p, &equi(2, 0.4), &equi(2, 0.4), 0.1, RhoBlockOrder::ExactSeries, &tol()).unwrap().value;
    let approx = cdf_rho_block(&p, &equi(2, 0.4), &equi(2, 0.4), 0.1, RhoBlockOrder::Rho4Approx, &tol()).unwrap().value;
    assert!((exact - approx).abs() < 1e-6, "{exact} vs {approx}");
}

#[test]
fn rho_block_edge_cases() {
    let p = pt(&[1.2, 0.9, 1.6, 1.1], 1.0);
    let zero = cdf_rho_block(&p, &equi(2, 0.4), &equi(2, 0.4), 0.0, RhoBlockOrder::ExactSeries, &tol()).unwrap().value;
    let a = 0.4f64.sqrt();
    let prod = one_factorial(&pt(&[1.2, 0.9], 1.0), &[a, a]) * one_factorial(&pt(&[1.6, 1.1], 1.0), &[a, a]);
    assert!((zero - prod).abs() < 1e-10);
    let p2 = pt(&[1.3, 0.8], 1.0);
    let one = CorrelationMatrix::identity(1);
    let v = cdf_rho_block(&p2, &one, &one, 0.5, RhoBlockOrder::ExactSeries, &tol()).unwrap().value;
    assert!((v - one_factorial(&p2, &[0.5f64.sqrt(); 2])).abs() < 1e-6);
}

#[test]
fn upper_tail_approximation_limits() {
    let x = 3.0;
    let at0 = upper_tail_approx(x, 0.5, 3, 3, 0.25, 0.25, 0.0).unwrap();
    let block = one_factorial(&pt(&[x; 3], 0.5), &[0.5; 3]);
    assert!((at0 - block * block).abs() < 1e-9, "{at0} vs {}", block * block);
    let mut prev = at0;
    for r2 in [0.01, 0.02, 0.04, 0.0625] {
        let v = upper_tail_approx(x, 0.5, 3, 3, 0.25, 0.25, r2).unwrap();
        assert!(v >= prev - 1e-12, "r2cross = {r2}");
        prev = v;
    }
    assert!(upper_tail_approx(x, 0.5, 3, 3, 0.25, 0.25, 0.07).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn engines_are_monotone_probabilities(
        a in prop::collection::vec(0.0f64..0.9, 4),
        x in prop::collection::vec(0.2f64..4.0, 4),
        theta in 0.0f64..0.95,
        alpha in prop::sample::select(vec![0.5, 1.0, 2.0]),
        bump in 0.05f64..1.0,
        i in 0usize..4,
    ) {
        let s = BlockFactorialStructure::two_block(2, a.clone(), theta).unwrap();
        let p = pt(&x, alpha);
        let mut y = x.clone();
        y[i] += bump;
        let q = pt(&y, alpha);
        let lo = cdf_two_block_laguerre(&p, &s, &tol()).unwrap().value;
        let hi = cdf_two_block_laguerre(&q, &s, &tol()).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&lo) && hi >= lo - 1e-10);
        let lo = one_factorial(&p, &a);
        let hi = one_factorial(&q, &a);
        prop_assert!((0.0..=1.0).contains(&lo) && hi >= lo - 1e-10);
    }
}
