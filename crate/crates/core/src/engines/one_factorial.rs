use super::{BlockIntegrand, EvalPoint};
use crate::corrstruct::OneFactorialStructure;
use crate::error::Result;
use crate::quad::{integrate_gamma_weighted, Tolerance};
use crate::SeriesValue;

/// `F = ∫₀^∞ Π_j G_α(x_j/(1−a_j²); a_j² y/(1−a_j²)) g_α(y) dy`.
///
/// Non-convergence of the quadrature is reported through the flag of the
/// returned value, not as an error.
pub fn cdf_one_factorial(
    p: &EvalPoint,
    s: &OneFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<SeriesValue<f64>> {
    p.check_dim(s.n())?;
    // The sign of a column entry does not enter: only a_j² appears.
    let block = BlockIntegrand::new(&p.x, s.a(), p.alpha)?;
    if block.is_constant() {
        return Ok(SeriesValue::exact(block.eval(0.0)));
    }
    let r = integrate_gamma_weighted(|y| block.eval(y), p.alpha, tol)?;
    Ok(SeriesValue { value: r.value.clamp(0.0, 1.0), ..r })
}
