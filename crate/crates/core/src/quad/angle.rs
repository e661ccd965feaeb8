use super::{Tolerance, MODULE};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::specfun::SeriesValue;

/// Integral of `f` over `(0, π)` by tanh-sinh quadrature.
///
/// Nodes cluster double-exponentially at both endpoints, so integrable
/// endpoint singularities such as `(sin²φ)^{α-1}` with `α < 1` are handled
/// without special treatment. The step is halved until two successive levels
/// agree to the tolerance.
pub fn integrate_angle<T: Real, F: FnMut(T) -> T>(mut f: F, tol: &Tolerance<T>) -> Result<SeriesValue<T>> {
    let half_pi = T::FRAC_PI_2();
    let pi = T::PI();
    // Nodes near 0 stay representable far out; nodes that round onto π are skipped.
    let t_max = T::lit(4.5);
    let mut h = T::lit(0.5);
    let mut evaluations = 0usize;

    let node = |t: T, f: &mut F| -> T {
        let u = half_pi * t.sinh();
        let e = (T::lit(2.0) * u).exp();
        // φ = π/(1 + e^{-2u}); w = (π/2) cosh t / cosh²u · (π/2)
        let phi = pi * e / (T::one() + e);
        let cu = u.cosh();
        let w = half_pi * half_pi * t.cosh() / (cu * cu);
        if !(phi > T::zero() && phi < pi) || w.is_zero() {
            return T::zero();
        }
        w * f(phi)
    };

    let mut sum = node(T::zero(), &mut f);
    evaluations += 1;
    let mut k = 1usize;
    loop {
        let t = T::of(k) * h;
        if t > t_max {
            break;
        }
        sum += node(t, &mut f) + node(-t, &mut f);
        evaluations += 2;
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..12 {
        // Halve the step: only odd multiples of the new step are new nodes.
        h = h * T::lit(0.5);
        let mut add = T::zero();
        let mut k = 1usize;
        loop {
            let t = T::of(k) * h;
            if t > t_max {
                break;
            }
            add += node(t, &mut f) + node(-t, &mut f);
            evaluations += 2;
            k += 2;
        }
        sum += add;
        let next = sum * h;
        if !next.is_finite() {
            return Err(Error::no_convergence(MODULE, "angular integrand is not finite"));
        }
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= tol.target(next) {
            return Ok(SeriesValue {
                value: next,
                abs_error_estimate: diff + T::lit(10.0) * T::epsilon() * next.abs(),
                terms_used: evaluations,
                converged: true,
            });
        }
    }
    Ok(SeriesValue { value: estimate, abs_error_estimate: T::infinity(), terms_used: evaluations, converged: false })
}
