//! ₀F₁, generalized Laguerre polynomials and the Poisson kernel.

use num_complex::Complex;

use super::gamma::ln_gamma;
use super::{SeriesValue, TERM_CAP};
use crate::error::{Error, Result};
use crate::real::Real;

const MODULE: &str = "specfun";

/// `₀F₁(α; z) = Σ_k z^k / ((α)_k k!)` for complex `z`.
///
/// The tolerance is relative to `max(1, |value|)`.
pub fn hyp0f1<T: Real>(alpha: T, z: Complex<T>, tol: T) -> Result<SeriesValue<T, Complex<T>>> {
    if !(alpha > T::zero()) {
        return Err(Error::domain(MODULE, format!("0F1 needs a positive parameter, got {alpha}")));
    }
    let mut sum = Complex::new(T::one(), T::zero());
    let mut term = sum;
    let mut abs_sum = T::one();
    let mut small_run = 0;
    let zabs = z.norm();
    for k in 0..TERM_CAP {
        let kk = T::of(k);
        term = term * z / ((alpha + kk) * (kk + T::one()));
        sum += term;
        let tn = term.norm();
        abs_sum += tn;
        let scale = sum.norm().max(T::one());
        if tn < tol * scale {
            small_run += 1;
        } else {
            small_run = 0;
        }
        let ratio = zabs / ((alpha + kk + T::one()) * (kk + T::lit(2.0)));
        if small_run >= 3 && ratio < T::one() {
            let tail = tn * ratio / (T::one() - ratio);
            if tail < tol * scale {
                let err = tail + T::lit(4.0) * T::epsilon() * abs_sum;
                return Ok(SeriesValue {
                    value: sum,
                    abs_error_estimate: err,
                    terms_used: k + 2,
                    converged: err <= tol * scale,
                });
            }
        }
    }
    Ok(SeriesValue {
        value: sum,
        abs_error_estimate: T::infinity(),
        terms_used: TERM_CAP + 1,
        converged: false,
    })
}

/// `ln ₀F₁(α; x)` for real `x ≥ 0`, summed around the largest term so that
/// arguments far beyond the overflow range of `₀F₁` itself are handled.
pub fn ln_hyp0f1<T: Real>(alpha: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let one = T::one();
    // Largest term sits where x = (α + k)(k + 1).
    let disc = ((alpha - one) * (alpha - one) + T::lit(4.0) * x).sqrt();
    let peak = ((disc - (alpha + one)) * T::lit(0.5)).max(T::zero()).floor();
    let k0 = peak.to_usize().unwrap_or(0);
    let kk0 = T::of(k0);
    let ln_t0 = kk0 * x.ln() - ln_gamma(alpha + kk0) + ln_gamma(alpha) - ln_gamma(kk0 + one);
    let cut = T::epsilon() * T::lit(1e-3);
    let mut sum = one;
    let mut t = one;
    let mut k = k0;
    loop {
        let kk = T::of(k);
        t = t * x / ((alpha + kk) * (kk + one));
        sum += t;
        k += 1;
        if t < cut * sum || k > k0 + TERM_CAP {
            break;
        }
    }
    let mut t = one;
    let mut k = k0;
    while k > 0 {
        let kk = T::of(k);
        t = t * (alpha + kk - one) * kk / x;
        sum += t;
        k -= 1;
        if t < cut * sum {
            break;
        }
    }
    ln_t0 + sum.ln()
}

/// Generalized Laguerre polynomial `L_k^{(α-1)}(y)` by the three-term recurrence.
pub fn laguerre_gen<T: Real>(k: usize, alpha: T, y: T) -> T {
    let (m, s) = laguerre_scaled(k, alpha, y);
    m * s.exp()
}

/// `L_k^{(α-1)}(y)` as `(mantissa, ln scale)`; the recurrence is rescaled
/// whenever its magnitude passes `1e150`.
pub fn laguerre_scaled<T: Real>(k: usize, alpha: T, y: T) -> (T, T) {
    let mut seq = LaguerreSeq::new(alpha, y);
    for _ in 0..k {
        seq.advance();
    }
    seq.current()
}

/// Iterator state for `L_0, L_1, …` at a fixed point, carrying a log scale.
#[derive(Debug, Clone, Copy)]
pub struct LaguerreSeq<T> {
    alpha: T,
    y: T,
    k: usize,
    prev: T,
    cur: T,
    ln_scale: T,
}

impl<T: Real> LaguerreSeq<T> {
    pub fn new(alpha: T, y: T) -> Self {
        LaguerreSeq { alpha, y, k: 0, prev: T::zero(), cur: T::one(), ln_scale: T::zero() }
    }

    /// Degree of the current polynomial.
    pub fn degree(&self) -> usize {
        self.k
    }

    /// `(mantissa, ln scale)` of the current value.
    pub fn current(&self) -> (T, T) {
        (self.cur, self.ln_scale)
    }

    pub fn advance(&mut self) {
        let k = T::of(self.k);
        // (k+1) L_{k+1} = (2k + α - y) L_k - (k + α - 1) L_{k-1}
        let next = ((T::lit(2.0) * k + self.alpha - self.y) * self.cur
            - (k + self.alpha - T::one()) * self.prev)
            / (k + T::one());
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        let big = T::lit(1e150);
        if self.cur.abs() > big {
            self.prev = self.prev / big;
            self.cur = self.cur / big;
            self.ln_scale += big.ln();
        }
    }
}

/// Orthogonality normalizer `h_k = C(α+k-1, k) = (α)_k / k! = ∫ (L_k^{(α-1)})² g_α`.
pub fn laguerre_norm<T: Real>(k: usize, alpha: T) -> T {
    ln_laguerre_norm(k, alpha).exp()
}

pub(crate) fn ln_laguerre_norm<T: Real>(k: usize, alpha: T) -> T {
    let kk = T::of(k);
    ln_gamma(alpha + kk) - ln_gamma(alpha) - ln_gamma(kk + T::one())
}

/// Poisson kernel of the Laguerre family,
/// `(1-ϑ²)^{-α} exp(-ϑ²(y₁+y₂)/(1-ϑ²)) ₀F₁(α; ϑ²y₁y₂/(1-ϑ²)²)`.
pub fn poisson_kernel<T: Real>(y1: T, y2: T, alpha: T, theta: T) -> Result<T> {
    if !(theta.abs() < T::one()) {
        return Err(Error::domain(MODULE, format!("Poisson kernel needs |theta| < 1, got {theta}")));
    }
    if !(alpha > T::zero()) {
        return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
    }
    if y1 < T::zero() || y2 < T::zero() {
        return Err(Error::domain(MODULE, "Poisson kernel needs non-negative arguments"));
    }
    Ok(ln_poisson_kernel(y1, y2, alpha, theta).exp())
}

pub(crate) fn ln_poisson_kernel<T: Real>(y1: T, y2: T, alpha: T, theta: T) -> T {
    let t2 = theta * theta;
    let c = T::one() - t2;
    -alpha * c.ln() - t2 * (y1 + y2) / c + ln_hyp0f1(alpha, t2 * (y1 * y2) / (c * c))
}
