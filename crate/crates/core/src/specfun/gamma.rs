//! Gamma function, gamma density/cdf and the error function.

use crate::error::{Error, Result};
use crate::real::Real;

const MODULE: &str = "specfun";

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, with reflection below 1/2).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Γ(x)Γ(1-x) = π / sin(πx); only positive arguments reach here.
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::of(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln g_α(x)` for `x > 0`.
pub(crate) fn ln_gamma_pdf<T: Real>(x: T, alpha: T) -> T {
    (alpha - T::one()) * x.ln() - x - ln_gamma(alpha)
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::domain(MODULE, format!("shape must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// Gamma density `g_α(x) = x^{α-1} e^{-x} / Γ(α)`.
///
/// At `x = 0` the density is `+∞` for `α < 1`.
pub fn gamma_pdf<T: Real>(x: T, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    if x < T::zero() || x.is_nan() {
        return Err(Error::domain(MODULE, format!("gamma density needs x >= 0, got {x}")));
    }
    if x.is_zero() {
        return Ok(if alpha < T::one() {
            T::infinity()
        } else if alpha == T::one() {
            T::one()
        } else {
            T::zero()
        });
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    Ok(ln_gamma_pdf(x, alpha).exp())
}

/// Gamma cdf `G_α(x)`, the regularized lower incomplete gamma function.
pub fn gamma_cdf<T: Real>(x: T, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    if x < T::zero() || x.is_nan() {
        return Err(Error::domain(MODULE, format!("gamma cdf needs x >= 0, got {x}")));
    }
    Ok(reg_lower(alpha, x))
}

/// Regularized lower incomplete gamma `P(a, x)`; callers validate arguments.
pub(crate) fn reg_lower<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x.is_infinite() {
        return T::one();
    }
    if x < a + T::one() {
        lower_series(a, x)
    } else {
        T::one() - upper_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub(crate) fn reg_upper<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x.is_infinite() {
        return T::zero();
    }
    if x < a + T::one() {
        T::one() - lower_series(a, x)
    } else {
        upper_fraction(a, x)
    }
}

fn prefactor<T: Real>(a: T, x: T) -> T {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

fn lower_series<T: Real>(a: T, x: T) -> T {
    let eps = T::epsilon();
    let mut ap = a;
    let mut del = T::one() / a;
    let mut sum = del;
    let cap = 100_000 + a.to_usize().unwrap_or(0);
    for _ in 0..cap {
        ap += T::one();
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * eps {
            break;
        }
    }
    (sum * prefactor(a, x)).min(T::one())
}

fn upper_fraction<T: Real>(a: T, x: T) -> T {
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..100_000usize {
        let fi = T::of(i);
        let an = -fi * (fi - a);
        b += T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h *= del;
        if (del - T::one()).abs() < eps {
            break;
        }
    }
    (prefactor(a, x) * h).max(T::zero())
}

/// Error function, accurate to a few ulps in `f64`.
pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return -erf(-x);
    }
    if x < T::lit(2.5) {
        erf_series(x)
    } else {
        T::one() - erfc_fraction(x)
    }
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::lit(0.5) {
        T::one() - erf(x)
    } else if x < T::lit(2.5) {
        T::one() - erf_series(x)
    } else {
        erfc_fraction(x)
    }
}

// erf(x) = 2x/√π e^{-x²} Σ (2x²)^n / (1·3···(2n+1)); every term is positive.
fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = T::one();
    let mut sum = T::one();
    let mut n = 0usize;
    while term > sum * T::epsilon() && n < 500 {
        n += 1;
        term *= T::lit(2.0) * x2 / T::of(2 * n + 1);
        sum += term;
    }
    T::lit(2.0) * x / T::PI().sqrt() * (-x2).exp() * sum
}

// erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x ≥ 2.5.
fn erfc_fraction<T: Real>(x: T) -> T {
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for i in 1..5_000usize {
        let an = T::of(i) * T::lit(0.5);
        d = x + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = c * d;
        f *= del;
        if (del - T::one()).abs() < eps {
            break;
        }
    }
    (-x * x).exp() / (T::PI().sqrt() * f)
}
