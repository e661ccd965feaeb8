use mvgamma::converge::*;
use mvgamma::corrstruct::BlockFactorialStructure;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn tt(v: [f64; 3]) -> ThetaTilde<f64> {
    ThetaTilde::new(v, [0.5; 3]).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `|ϑ̃₃² c₁c₂ e^{−iγ₃} + ϑ̃₂² c₁c₃ e^{−iγ₂} + ϑ̃₁² c₂c₃ e^{−iγ₁} − 2ϑ̃₁ϑ̃₂ϑ̃₃ c₁c₂c₃|²`, `c_j = cos γ_j`.
fn rho_sq_complex(g: [f64; 3], v: [f64; 3]) -> f64 {
    let c = g.map(f64::cos);
    let e = |x: f64| Complex64::from_polar(1.0, -x);
    let z = e(g[2]) * (v[2] * v[2] * c[0] * c[1]) + e(g[1]) * (v[1] * v[1] * c[0] * c[2])
        + e(g[0]) * (v[0] * v[0] * c[1] * c[2])
        - 2.0 * v[0] * v[1] * v[2] * c[0] * c[1] * c[2];
    z.norm_sqr()
}

/// Random triple with `Θ̃` positive definite, as produced by any valid structure.
fn random_tt(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..0.99));
        if tt(v).scalar() < 1.0 {
            return v;
        }
    }
}

#[test]
fn block_radii() {
    let s = BlockFactorialStructure::three_block([1, 2, 3], vec![0.0; 6], [0.2, 0.2, 0.2]).unwrap();
    assert_eq!(d_values(&s), [0.0; 3]);
    assert!((block_radius(&[0.5f64.sqrt()]) - 0.5f64).abs() < 1e-15);
    let exact = block_radius(&[rat(3, 10), rat(4, 10), rat(5, 10)]);
    // q = 9/91 + 16/84 + 25/75
    let q = rat(9, 91) + rat(16, 84) + rat(25, 75);
    assert_eq!(exact, &q / (rat(1, 1) + &q));
    let approx: f64 = block_radius(&[0.3, 0.4, 0.5]);
    let (n, d) = (exact.numer().to_string().parse::<f64>().unwrap(), exact.denom().to_string().parse::<f64>().unwrap());
    assert!((approx - n / d).abs() < 1e-15);
}

#[test]
fn scalar_is_one_minus_determinant() {
    let v = [0.3, 0.5, 0.7];
    let det = 1.0 - v.iter().map(|x| x * x).sum::<f64>() + 2.0 * v[0] * v[1] * v[2];
    assert!((tt(v).scalar() - (1.0 - det)).abs() < 1e-15);
}

#[test]
fn rho_sq_trivial_values() {
    let t = tt([0.3, 0.5, 0.7]);
    assert!((rho_sq([0.0; 3], &t) - t.scalar().powi(2)).abs() < 1e-15);
    assert_eq!(rho_sq([1.0, -2.0, 3.0], &tt([0.0; 3])), 0.0);
}

#[test]
fn rho_sq_matches_complex_modulus_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let v = random_tt(&mut rng);
        let g: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.5..1.5));
        let a = rho_sq(g.map(f64::tan), &tt(v));
        let b = rho_sq_complex(g, v);
        assert!((a - b).abs() < 1e-12, "{v:?} {g:?}: {a} vs {b}");
    }
}

#[test]
fn sufficient_condition_examples() {
    assert!(sufficient_condition(&tt([0.5; 3])));
    assert!(!sufficient_condition(&tt([0.99; 3])));
    let edge = ThetaTilde::new([rat(1, 1), rat(0, 1), rat(0, 1)], [rat(0, 1), rat(0, 1), rat(0, 1)]).unwrap();
    assert!(sufficient_condition(&edge));
}

#[test]
fn max_rho_sq_at_zero() {
    let m = max_rho_sq(&tt([0.0; 3]), 1e-8).unwrap();
    assert_eq!(m.max_rho_sq, 0.0);
    assert_eq!(m.branch, MaxRhoBranch::Origin);
}

#[test]
fn max_rho_sq_matches_grid_on_hard_case() {
    let m = max_rho_sq(&tt([0.95, 0.95, 0.2]), 1e-8).unwrap();
    assert!(m.converged);
    assert!((m.max_rho_sq - m.grid_max).abs() <= 1e-6 * m.max_rho_sq.max(1e-300), "{m:?}");
    assert!((rho_sq(m.argmax_t, &tt([0.95, 0.95, 0.2])) - m.max_rho_sq).abs() < 1e-12);
}

#[test]
fn max_rho_sq_dominates_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let v = random_tt(&mut rng);
        let t = tt(v);
        let m = max_rho_sq(&t, 1e-8).unwrap();
        assert!(m.max_rho_sq >= rho_sq([0.0; 3], &t));
        for _ in 0..1000 {
            let g: [f64; 3] = std::array::from_fn(|_| rng.random_range(-FRAC_PI_2..FRAC_PI_2));
            assert!(rho_sq(g.map(f64::tan), &t) <= m.max_rho_sq + 1e-12, "{v:?}");
        }
    }
}

#[test]
fn sufficient_condition_implies_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    while checked < 100 {
        let v = random_tt(&mut rng);
        let t = tt(v);
        if !sufficient_condition(&t) {
            continue;
        }
        checked += 1;
        assert!(max_rho_sq(&t, 1e-8).unwrap().max_rho_sq < 1.0, "{v:?}");
    }
}

#[test]
fn single_axis_rays_stay_below_origin_value() {
    let t = tt([0.9, 0.8, 0.7]);
    let s2 = t.scalar().powi(2);
    for j in 0..3 {
        for k in -50..=50 {
            let mut p = [0.0; 3];
            p[j] = f64::from(k) * 0.4;
            assert!(rho_sq(p, &t) <= s2 + 1e-15);
        }
    }
}

#[test]
fn quartic_gap_agrees_in_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..2000 {
        let t = tt(random_tt(&mut rng));
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let r = rho_sq(p, &t);
        let g = rho_gap(p, &t);
        let den: f64 = p.iter().map(|v| 1.0 + v * v).product();
        assert!((g - den * (1.0 - r)).abs() < 1e-9 * den);
        if (r - 1.0).abs() > 1e-9 {
            assert_eq!(g > 0.0, r < 1.0);
        }
    }
}

#[test]
fn from_structure_scales_by_radii() {
    let s = BlockFactorialStructure::three_block([2, 2, 2], vec![0.5; 6], [0.3, 0.25, 0.2]).unwrap();
    let t = ThetaTilde::from_structure(&s).unwrap();
    let d: f64 = block_radius(&[0.5, 0.5]);
    assert!(t.d.iter().all(|v| (v - d).abs() < 1e-15));
    assert!((t.values[0] - 0.3 * d).abs() < 1e-15);
    assert!((t.values[2] - 0.2 * d).abs() < 1e-15);
}
