//! Scalar special functions: gamma density and cdf, the non-central gamma cdf
//! for real or complex non-centrality, ₀F₁, generalized Laguerre polynomials
//! and their Poisson kernel.

mod gamma;
mod hyper;
mod noncentral;

use crate::real::Real;

pub use gamma::{erf, erfc, gamma_cdf, gamma_pdf, ln_beta, ln_gamma};
pub(crate) use gamma::{ln_gamma_pdf, reg_upper};
pub use hyper::{
    hyp0f1, laguerre_gen, laguerre_norm, laguerre_scaled, ln_hyp0f1, poisson_kernel, LaguerreSeq,
};
pub(crate) use hyper::ln_poisson_kernel;
pub(crate) use noncentral::nc_gamma_density;
pub use noncentral::{
    nc_gamma_cdf, nc_gamma_cdf_half_integer, nc_gamma_cdf_integer_finite,
    nc_gamma_cdf_integer_trig, nc_gamma_pdf, step_g0, NcGammaTable, NonCentralParams,
};

/// Term cap shared by every series in this module.
pub const TERM_CAP: usize = 10_000;

/// Result of a truncated series or a quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SeriesValue<T, V = T> {
    pub value: V,
    pub abs_error_estimate: T,
    pub terms_used: usize,
    pub converged: bool,
}

impl<T: Real, V> SeriesValue<T, V> {
    /// A value known without truncation error.
    pub fn exact(value: V) -> Self {
        SeriesValue { value, abs_error_estimate: T::zero(), terms_used: 1, converged: true }
    }

    pub fn map<W>(self, f: impl FnOnce(V) -> W) -> SeriesValue<T, W> {
        SeriesValue {
            value: f(self.value),
            abs_error_estimate: self.abs_error_estimate,
            terms_used: self.terms_used,
            converged: self.converged,
        }
    }
}
