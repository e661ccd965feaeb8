//! Integrals against the gamma density `g_α` on the half line and on the
//! positive quadrant.

use super::kronrod::integrate;
use super::{Tolerance, MODULE};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::{ln_gamma, reg_upper, SeriesValue};

/// Growth bound `|f(y)| ≤ bound · (1 + y)^degree` used to place the
/// truncation point of a half-line integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTail<T> {
    pub bound: T,
    pub degree: u32,
}

impl<T: Real> Default for GammaTail<T> {
    fn default() -> Self {
        GammaTail { bound: T::one(), degree: 0 }
    }
}

impl<T: Real> GammaTail<T> {
    /// Upper bound of `∫_U^∞ |f| g_α`, using `E[Y^j; Y > U] = (α)_j Q(α+j, U)`.
    fn mass_beyond(&self, alpha: T, u: T) -> T {
        let mut total = T::zero();
        let mut binom = T::one();
        let mut poch = T::one();
        for j in 0..=self.degree {
            let jj = T::of(j as usize);
            if j > 0 {
                binom = binom * (T::of(self.degree as usize) - jj + T::one()) / jj;
                poch = poch * (alpha + jj - T::one());
            }
            total += binom * poch * reg_upper(alpha + jj, u);
        }
        self.bound * total
    }

    /// Smallest point of a geometric ladder whose tail mass is below `target`.
    fn truncation(&self, alpha: T, target: T) -> Result<T> {
        let mut u = alpha + T::lit(10.0);
        for _ in 0..400 {
            if self.mass_beyond(alpha, u) < target {
                return Ok(u);
            }
            u = u * T::lit(1.1);
        }
        Err(Error::no_convergence(MODULE, "no truncation point meets the tail tolerance"))
    }
}

// Substitution that removes the y^{α-1} singularity: y = u² for α ≥ ½, y = u^{1/α} below.
#[derive(Clone, Copy)]
struct HalfLineMap<T> {
    alpha: T,
    square: bool,
    ln_norm: T,
}

impl<T: Real> HalfLineMap<T> {
    fn new(alpha: T) -> Self {
        let square = alpha >= T::lit(0.5);
        let ln_norm = if square {
            T::lit(2.0).ln() - ln_gamma(alpha)
        } else {
            -ln_gamma(alpha + T::one())
        };
        HalfLineMap { alpha, square, ln_norm }
    }

    fn upper(&self, y_max: T) -> T {
        if self.square {
            y_max.sqrt()
        } else {
            y_max.powf(self.alpha)
        }
    }

    /// `(y(u), g_α(y(u)) y'(u))`.
    fn point(&self, u: T) -> (T, T) {
        if self.square {
            let y = u * u;
            let expo = T::lit(2.0) * self.alpha - T::one();
            let pw = if expo.is_zero() { T::one() } else { u.powf(expo) };
            (y, pw * (self.ln_norm - y).exp())
        } else {
            let y = u.powf(T::one() / self.alpha);
            (y, (self.ln_norm - y).exp())
        }
    }
}

/// `∫_0^∞ f(y) g_α(y) dy` for `|f| ≤ 1`.
pub fn integrate_gamma_weighted<T: Real, F: FnMut(T) -> T>(f: F, alpha: T, tol: &Tolerance<T>) -> Result<SeriesValue<T>> {
    integrate_gamma_weighted_with(f, alpha, GammaTail::default(), tol)
}

/// `∫_0^∞ f(y) g_α(y) dy` with an explicit growth bound on `f`.
///
/// The half line is cut at `U` where the bounded tail mass is below
/// `abs_tol / 10`; `[0, U]` is integrated adaptively after a substitution that
/// makes the gamma weight bounded at the origin.
pub fn integrate_gamma_weighted_with<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    alpha: T,
    tail: GammaTail<T>,
    tol: &Tolerance<T>,
) -> Result<SeriesValue<T>> {
    check_alpha(alpha)?;
    let tail_target = tol.abs_tol / T::lit(10.0);
    let u_max = tail.truncation(alpha, tail_target)?;
    let map = HalfLineMap::new(alpha);
    let inner_tol = tol.scaled(T::lit(0.9));
    let r = integrate(
        |u| {
            let (y, w) = map.point(u);
            if w.is_zero() {
                T::zero()
            } else {
                f(y) * w
            }
        },
        T::zero(),
        map.upper(u_max),
        &inner_tol,
    );
    let err = r.abs_error_estimate + tail.mass_beyond(alpha, u_max);
    Ok(SeriesValue {
        value: r.value,
        abs_error_estimate: err,
        terms_used: r.terms_used,
        converged: r.converged && err <= tol.target(r.value),
    })
}

/// `∫∫ f(y₁, y₂) g_α(y₁) g_α(y₂) dy₁ dy₂` over the positive quadrant.
///
/// Nested adaptive quadrature: every outer node runs an inner adaptive
/// integral. The tail bound is applied per axis, which covers both bounded
/// integrands and integrands whose product with the weight is a probability
/// density with gamma marginals (such as the Poisson kernel).
pub fn integrate_2d_gamma<T: Real, F: FnMut(T, T) -> T>(
    mut f: F,
    alpha: T,
    tail: GammaTail<T>,
    tol: &Tolerance<T>,
) -> Result<SeriesValue<T>> {
    check_alpha(alpha)?;
    let tail_target = tol.abs_tol / T::lit(20.0);
    let u_max = tail.truncation(alpha, tail_target)?;
    let map = HalfLineMap::new(alpha);
    let upper = map.upper(u_max);
    let inner_tol = tol.scaled(T::lit(0.25));
    let outer_tol = tol.scaled(T::lit(0.5));
    let mut inner_err = T::zero();
    let mut inner_ok = true;
    let mut evaluations = 0usize;
    let r = integrate(
        |u1| {
            let (y1, w1) = map.point(u1);
            if w1.is_zero() {
                return T::zero();
            }
            let inner = integrate(
                |u2| {
                    let (y2, w2) = map.point(u2);
                    if w2.is_zero() {
                        T::zero()
                    } else {
                        f(y1, y2) * w2
                    }
                },
                T::zero(),
                upper,
                &inner_tol,
            );
            evaluations += inner.terms_used;
            inner_ok &= inner.converged;
            inner_err = inner_err.max(inner.abs_error_estimate);
            inner.value * w1
        },
        T::zero(),
        upper,
        &outer_tol,
    );
    let err = r.abs_error_estimate + inner_err + T::lit(2.0) * tail.mass_beyond(alpha, u_max);
    Ok(SeriesValue {
        value: r.value,
        abs_error_estimate: err,
        terms_used: evaluations.max(1),
        converged: r.converged && inner_ok && err <= tol.target(r.value),
    })
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
    }
    Ok(())
}
