//! Non-central gamma cdf `G_α(x; y) = e^{-y} Σ_n G_{α+n}(x) yⁿ/n!` and its closed forms.

use num_complex::Complex;

use super::gamma::{erf, gamma_cdf, ln_gamma, ln_gamma_pdf, reg_lower};
use super::hyper::{hyp0f1, ln_hyp0f1};
use super::{SeriesValue, TERM_CAP};
use crate::error::{Error, Result};
use crate::quad::{integrate_angle, Tolerance};
use crate::real::Real;

const MODULE: &str = "specfun";

/// Arguments of the non-central gamma cdf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonCentralParams<T> {
    pub alpha: T,
    pub x: T,
    pub y: Complex<T>,
}

impl<T: Real> NonCentralParams<T> {
    pub fn new(alpha: T, x: T, y: Complex<T>) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
        }
        if !(x >= T::zero()) {
            return Err(Error::domain(MODULE, format!("truncation point must be >= 0, got {x}")));
        }
        if !(y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::domain(MODULE, "non-centrality must be finite"));
        }
        Ok(NonCentralParams { alpha, x, y })
    }

    pub fn real(alpha: T, x: T, y: T) -> Result<Self> {
        Self::new(alpha, x, Complex::new(y, T::zero()))
    }
}

/// Central cdfs `G_{α+n}(x)`, n = 0, 1, …, for one `(α, x)`.
///
/// Built once from the terms `x^{α+m} e^{-x}/Γ(α+m+1)` summed from the small
/// end, so every entry keeps full relative accuracy. Evaluating the
/// non-central cdf for many non-centralities at the same `x` then costs one
/// Poisson-weighted sum each.
#[derive(Debug, Clone)]
pub struct NcGammaTable<T> {
    alpha: T,
    x: T,
    central: Vec<T>,
}

impl<T: Real> NcGammaTable<T> {
    /// `x = +∞` is accepted and yields the constant cdf 1.
    pub fn new(alpha: T, x: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
        }
        if !(x >= T::zero()) {
            return Err(Error::domain(MODULE, format!("truncation point must be >= 0, got {x}")));
        }
        if x.is_infinite() {
            return Ok(NcGammaTable { alpha, x, central: vec![T::one()] });
        }
        if x.is_zero() {
            return Ok(NcGammaTable { alpha, x, central: vec![T::zero()] });
        }
        let lx = x.ln();
        let mut ln_t = alpha * lx - x - ln_gamma(alpha + T::one());
        let floor_ln = T::min_positive_value().ln() + T::lit(10.0);
        let mut terms = Vec::new();
        let mut t = T::zero();
        let mut linear = false;
        for m in 0..(4 * TERM_CAP) {
            let mm = T::of(m);
            if !linear && ln_t > floor_ln {
                t = ln_t.exp();
                linear = true;
            }
            terms.push(t);
            if mm > x && (linear && t < T::min_positive_value()) {
                break;
            }
            let ratio = x / (alpha + mm + T::one());
            if linear {
                t = t * ratio;
            } else {
                ln_t += ratio.ln();
            }
        }
        let mut central = vec![T::zero(); terms.len()];
        let mut acc = T::zero();
        for (slot, t) in central.iter_mut().zip(terms.iter()).rev() {
            acc += *t;
            *slot = acc;
        }
        // Pin the scale of every entry to the directly computed G_α(x).
        let direct = reg_lower(alpha, x);
        if central[0] > T::zero() {
            let fix = direct / central[0];
            for v in central.iter_mut() {
                *v = (*v * fix).min(T::one());
            }
        }
        Ok(NcGammaTable { alpha, x, central })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn x(&self) -> T {
        self.x
    }

    /// `G_{α+n}(x)`.
    pub fn central(&self, n: usize) -> T {
        if self.x.is_infinite() {
            return T::one();
        }
        self.central.get(n).copied().unwrap_or(T::zero())
    }

    fn len(&self) -> usize {
        self.central.len()
    }

    /// `G_α(x; y)` for real `y ≥ 0`, summed outward from the Poisson mode.
    pub fn cdf(&self, y: T, tol: T) -> SeriesValue<T> {
        if self.x.is_infinite() || self.x.is_zero() || y <= T::zero() {
            return SeriesValue::exact(self.central(0));
        }
        let len = self.len();
        let mode = y.floor().to_usize().unwrap_or(usize::MAX);
        let start = mode.min(len - 1);
        let ss = T::of(start);
        let p_start = (-y + ss * y.ln() - ln_gamma(ss + T::one())).exp();
        if p_start.is_zero() {
            // The Poisson mass sits where every G_{α+n}(x) has underflowed.
            return SeriesValue {
                value: T::zero(),
                abs_error_estimate: self.central(len - 1),
                terms_used: 1,
                converged: true,
            };
        }
        let mut sum = T::zero();
        let mut abs_sum = T::zero();
        let mut terms = 0usize;
        let mut tail = T::zero();

        // Upward from the mode.
        let mut p = p_start;
        let mut small = 0;
        let mut n = start;
        loop {
            let g = self.central(n);
            let t = p * g;
            sum += t;
            abs_sum += t;
            terms += 1;
            if n + 1 >= len {
                break;
            }
            small = if t < tol * sum.max(T::one()) { small + 1 } else { 0 };
            let r = y / T::of(n + 2);
            if small >= 3 && r < T::one() {
                let bound = t * r / (T::one() - r);
                if bound < tol {
                    tail += bound;
                    break;
                }
            }
            if terms > TERM_CAP {
                tail = T::infinity();
                break;
            }
            p = p * y / T::of(n + 1);
            n += 1;
        }
        // Downward from the mode.
        let mut p = p_start;
        let mut small = 0;
        let mut n = start;
        while n > 0 {
            p = p * T::of(n) / y;
            n -= 1;
            let t = p * self.central(n);
            sum += t;
            abs_sum += t;
            terms += 1;
            small = if t < tol * sum.max(T::one()) { small + 1 } else { 0 };
            let r = T::of(n) / y;
            if small >= 3 && r < T::one() {
                let bound = p * r / (T::one() - r);
                if bound < tol {
                    tail += bound;
                    break;
                }
            }
            if terms > 2 * TERM_CAP {
                tail = T::infinity();
                break;
            }
        }
        let err = tail + T::lit(4.0) * T::epsilon() * abs_sum;
        SeriesValue {
            value: sum.max(T::zero()).min(T::one()),
            abs_error_estimate: err,
            terms_used: terms,
            converged: err <= tol,
        }
    }

    /// `G_α(x; y)` for complex `y`, summed from `n = 0`.
    pub fn cdf_complex(&self, y: Complex<T>, tol: T) -> SeriesValue<T, Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        if y.im.is_zero() && y.re >= T::zero() {
            let s = self.cdf(y.re, tol);
            return SeriesValue {
                value: Complex::new(s.value, T::zero()),
                abs_error_estimate: s.abs_error_estimate,
                terms_used: s.terms_used,
                converged: s.converged,
            };
        }
        if self.x.is_infinite() || self.x.is_zero() {
            return SeriesValue::exact(Complex::new(self.central(0), T::zero()));
        }
        let len = self.len();
        let yabs = y.norm();
        let log_mode = y.re.abs() > T::lit(500.0);
        let ln_y = y.ln();
        let mut ln_p = -y;
        let mut p = (-y).exp();
        let mut sum = zero;
        let mut abs_sum = T::zero();
        let mut small = 0;
        let mut tail = T::zero();
        let mut terms = 0;
        for n in 0..len {
            let g = self.central(n);
            let pn = if log_mode { ln_p.exp() } else { p };
            let t = pn * g;
            sum += t;
            let tn = t.norm();
            abs_sum += tn;
            terms += 1;
            small = if tn < tol * sum.norm().max(T::one()) { small + 1 } else { 0 };
            let r = yabs / T::of(n + 2);
            if small >= 3 && r < T::one() {
                let bound = tn * r / (T::one() - r);
                if bound < tol {
                    tail = bound;
                    break;
                }
            }
            if terms > TERM_CAP {
                tail = T::infinity();
                break;
            }
            let nn = T::of(n + 1);
            if log_mode {
                ln_p = ln_p + ln_y - Complex::new(nn.ln(), T::zero());
            } else {
                p = p * y / nn;
            }
        }
        let err = tail + T::lit(8.0) * T::epsilon() * abs_sum;
        SeriesValue { value: sum, abs_error_estimate: err, terms_used: terms, converged: err <= tol }
    }
}

/// Non-central gamma cdf by the Poisson series, for real or complex `y`.
///
/// For real `y ≥ 0` the value lies in `[0, 1]`.
pub fn nc_gamma_cdf<T: Real>(p: &NonCentralParams<T>, tol: T) -> Result<SeriesValue<T, Complex<T>>> {
    let p = NonCentralParams::new(p.alpha, p.x, p.y)?;
    if !(tol > T::zero()) {
        return Err(Error::domain(MODULE, "tolerance must be positive"));
    }
    let table = NcGammaTable::new(p.alpha, p.x)?;
    Ok(table.cdf_complex(p.y, tol))
}

/// Non-central gamma density `e^{-y} g_α(x) ₀F₁(α; xy)`.
pub fn nc_gamma_pdf<T: Real>(p: &NonCentralParams<T>) -> Result<Complex<T>> {
    let p = NonCentralParams::new(p.alpha, p.x, p.y)?;
    if !(p.x > T::zero()) {
        return Err(Error::domain(MODULE, "non-central density needs x > 0"));
    }
    if p.y.im.is_zero() && p.y.re >= T::zero() {
        return Ok(Complex::new(nc_gamma_density(p.alpha, p.x, p.y.re), T::zero()));
    }
    let f = hyp0f1(p.alpha, p.y * p.x, T::epsilon())?;
    Ok((-p.y).exp() * f.value * ln_gamma_pdf(p.x, p.alpha).exp())
}

/// Real non-central density `g_β(x; y)` for `x > 0`, `y ≥ 0`, evaluated in log space.
pub(crate) fn nc_gamma_density<T: Real>(beta: T, x: T, y: T) -> T {
    if x.is_infinite() {
        return T::zero();
    }
    if x <= T::zero() {
        return if y > T::zero() || beta > T::one() {
            T::zero()
        } else if beta == T::one() {
            (-y).exp()
        } else {
            T::infinity()
        };
    }
    (-y + ln_gamma_pdf(x, beta) + ln_hyp0f1(beta, x * y)).exp()
}

/// Closed form for `α = n + ½`: an erf combination minus a finite sum of
/// half-integer-order modified Bessel functions, all elementary.
pub fn nc_gamma_cdf_half_integer<T: Real>(n: usize, x: T, y: T) -> Result<T> {
    let alpha = T::of(n) + T::lit(0.5);
    if x < T::zero() || y < T::zero() {
        return Err(Error::domain(MODULE, "closed form needs x >= 0 and y >= 0"));
    }
    if y.is_zero() || x.is_zero() {
        return if y.is_zero() { gamma_cdf(x, alpha) } else { Ok(T::zero()) };
    }
    let s = x.sqrt();
    let r = y.sqrt();
    let half = T::lit(0.5);
    let base = half * (erf(s + r) + erf(s - r));
    if n == 0 {
        return Ok(base);
    }
    let z = T::lit(2.0) * s * r;
    // e^{-z} I_{∓1/2}(z) and the upward recurrence I_{ν+1} = I_{ν-1} - (2ν/z) I_ν.
    let lead = (T::lit(2.0) / (T::PI() * z)).sqrt();
    let e2 = (-T::lit(2.0) * z).exp();
    let mut i_lo = lead * (T::one() + e2) * half; // ν = -1/2
    let mut i_hi = lead * (-(-T::lit(2.0) * z).exp_m1()) * half; // ν = 1/2
    let damp = (-(s - r) * (s - r)).exp();
    let ratio = x / y;
    let mut corr = T::zero();
    for k in 1..=n {
        let nu = T::of(k) - half;
        corr += ratio.powf(nu * half) * damp * i_hi;
        let next = i_lo - T::lit(2.0) * nu / z * i_hi;
        i_lo = i_hi;
        i_hi = next;
    }
    Ok((base - corr).max(T::zero()).min(T::one()))
}

/// Step function `G_0(z)`: 0 below zero, ½ at zero, 1 above.
pub fn step_g0<T: Real>(z: T) -> T {
    if z < T::zero() {
        T::zero()
    } else if z.is_zero() {
        T::lit(0.5)
    } else {
        T::one()
    }
}

/// Trigonometric-integral closed form for integer `α = n ≥ 1`.
pub fn nc_gamma_cdf_integer_trig<T: Real>(n: usize, x: T, y: T, tol: &Tolerance<T>) -> Result<T> {
    if n == 0 {
        return Err(Error::domain(MODULE, "integer closed form needs n >= 1"));
    }
    if x < T::zero() || y < T::zero() {
        return Err(Error::domain(MODULE, "closed form needs x >= 0 and y >= 0"));
    }
    if y.is_zero() {
        return gamma_cdf(x, T::of(n));
    }
    if x.is_zero() {
        return Ok(T::zero());
    }
    let sxy = (x * y).sqrt();
    let lead = (x / y).powf(T::of(n) * T::lit(0.5)) / T::PI();
    let nn = T::of(n);
    let f = |phi: T| {
        let q = x - T::lit(2.0) * sxy * phi.cos() + y;
        if q <= T::zero() {
            // x = y and φ = 0: the quotient tends to -(2n-1)/2.
            return lead * -(T::lit(2.0) * nn - T::one()) * T::lit(0.5);
        }
        let num = y * (nn * phi).cos() - sxy * ((nn - T::one()) * phi).cos();
        lead * num / q * (-q).exp()
    };
    let integral = integrate_angle(f, tol)?;
    if !integral.converged {
        return Err(Error::no_convergence(MODULE, "trigonometric integral did not converge"));
    }
    Ok(integral.value + step_g0(x - y))
}

/// Finite-correction closed form for integer `α = n ≥ 1`:
/// `G_n(x;y) = G_1(x;y) - e^{-y} Σ_{k=1}^{n-1} g_{1+k}(x) ₀F₁(1+k; xy)`,
/// with `G_1` taken from the trigonometric integral.
pub fn nc_gamma_cdf_integer_finite<T: Real>(n: usize, x: T, y: T, tol: &Tolerance<T>) -> Result<T> {
    let g1 = nc_gamma_cdf_integer_trig(1, x, y, tol)?;
    if x.is_zero() || y.is_zero() {
        return nc_gamma_cdf_integer_trig(n, x, y, tol);
    }
    let mut corr = T::zero();
    for k in 1..n {
        let beta = T::of(1 + k);
        let f = hyp0f1(beta, Complex::new(x * y, T::zero()), T::epsilon())?;
        corr += (-y + ln_gamma_pdf(x, beta)).exp() * f.value.re;
    }
    Ok(g1 - corr)
}
