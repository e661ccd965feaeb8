//! Deterministic quadrature shared by the engines: adaptive Gauss–Kronrod
//! panels, gamma-weighted half-line integrals in one and two variables,
//! tanh-sinh on `(0, π)` and Golub–Welsch Gauss rules.

mod angle;
mod gauss;
mod kronrod;
mod weighted;

use crate::error::{Error, Result};
use crate::real::Real;

pub use angle::integrate_angle;
pub use gauss::{gauss_hermite, gauss_jacobi, gauss_laguerre, gauss_legendre, GaussRule, LogGaussRule};
pub use kronrod::integrate;
pub use weighted::{integrate_2d_gamma, integrate_gamma_weighted, integrate_gamma_weighted_with, GammaTail};

const MODULE: &str = "quad";

/// Requested accuracy of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tolerance<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        let unit = |v: T| v > T::zero() && v < T::one();
        if !unit(abs_tol) || !unit(rel_tol) {
            return Err(Error::domain(MODULE, "tolerances must lie in (0, 1)"));
        }
        if max_subdivisions == 0 {
            return Err(Error::domain(MODULE, "max_subdivisions must be at least 1"));
        }
        Ok(Tolerance { abs_tol, rel_tol, max_subdivisions })
    }

    /// Absolute tolerance `abs`, relative tolerance `abs` as well.
    pub fn abs(abs: T) -> Self {
        Tolerance { abs_tol: abs, rel_tol: abs, max_subdivisions: 2_000 }
    }

    pub(crate) fn scaled(&self, factor: T) -> Self {
        Tolerance {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_subdivisions: self.max_subdivisions,
        }
    }

    pub(crate) fn target(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for Tolerance<f64> {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 2_000 }
    }
}

impl Default for Tolerance<f32> {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-5, rel_tol: 1e-5, max_subdivisions: 2_000 }
    }
}

/// Pairwise (cascade) summation in the given order.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n if n <= 8 => values.iter().fold(T::zero(), |a, &b| a + b),
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}
