//! Deterministic cdf and pdf engines, one per structured correlation class,
//! with independent representations of the same quantity where available.
//!
//! Every cdf takes truncation points on the gamma scale (`X_i ≤ x_i`); an
//! entry `+∞` drops the coordinate, which yields exact marginals.

mod laguerre;
mod one_factorial;
mod rho_block;
mod three_block;
mod tree;
mod two_factorial;

use crate::corrstruct::BlockFactorialStructure;
use crate::error::{Error, Result};
use crate::quad::Tolerance;
use crate::specfun::NcGammaTable;

pub use laguerre::{
    cdf_two_block_kernel, cdf_two_block_laguerre, coeff_cjk, upper_tail_approx, LaguerreCoefficients,
};
pub use one_factorial::cdf_one_factorial;
pub use rho_block::{cdf_rho_block, rho_block_weights, RhoBlockOrder, MAX_RHO_BLOCK};
pub use three_block::{
    cdf_three_block, three_block_spectral_radius, three_block_terms, three_block_weight, ThreeBlockSeriesParams,
    ThreeBlockVariant,
};
pub use tree::{cdf_tree, pdf_tree};
pub use two_factorial::{cdf_two_factorial, cdf_two_factorial_half};

pub(crate) use laguerre::two_block_laguerre_parts;
pub(crate) use three_block::three_block_parts;

pub(crate) const MODULE: &str = "engines";

/// Tolerance passed to every non-central gamma series inside the engines.
pub(crate) const SERIES_TOL: f64 = 1e-14;

/// Truncation points and shape of a cdf evaluation.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalPoint {
    pub x: Vec<f64>,
    pub alpha: f64,
}

impl EvalPoint {
    /// Entries must be positive; `+∞` marginalizes a coordinate.
    pub fn new(x: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
        }
        if let Some(v) = x.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::domain(MODULE, format!("truncation points must be positive, got {v}")));
        }
        Ok(EvalPoint { x, alpha })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.x.len() != n {
            return Err(Error::domain(
                MODULE,
                format!("evaluation point has {} coordinates, structure has {n}", self.x.len()),
            ));
        }
        Ok(())
    }
}

/// `y ↦ Π_μ G_α(x_μ/d_μ; b_μ² y)` for one block of a factorial structure,
/// the conditional cdf given the common factor. Coordinates at `+∞` are
/// left out.
#[derive(Debug, Clone)]
pub(crate) struct BlockIntegrand {
    tables: Vec<NcGammaTable<f64>>,
    b2: Vec<f64>,
    constant: f64,
}

impl BlockIntegrand {
    pub(crate) fn new(x: &[f64], a: &[f64], alpha: f64) -> Result<Self> {
        let mut tables = Vec::new();
        let mut b2 = Vec::new();
        let mut constant = 1.0;
        for (&xm, &am) in x.iter().zip(a) {
            if xm.is_infinite() {
                continue;
            }
            let d = 1.0 - am * am;
            let t = NcGammaTable::new(alpha, xm / d)?;
            if am == 0.0 {
                constant *= t.central(0);
            } else {
                tables.push(t);
                b2.push(am * am / d);
            }
        }
        Ok(BlockIntegrand { tables, b2, constant })
    }

    /// True when the value does not depend on `y`.
    pub(crate) fn is_constant(&self) -> bool {
        self.tables.is_empty()
    }

    pub(crate) fn eval(&self, y: f64) -> f64 {
        let mut v = self.constant;
        for (t, &b2) in self.tables.iter().zip(&self.b2) {
            if v == 0.0 {
                break;
            }
            v *= t.cdf(b2 * y, SERIES_TOL).value;
        }
        v
    }
}

/// Which representation [`cdf_two_block`] used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoBlockRoute {
    /// `|ϑ| = 1`: both blocks share one factor.
    MergedOneFactorial,
    /// `|ϑ| < 1`: Laguerre series.
    Laguerre,
    /// `|ϑ| > 1`, `α > ½`: triple integral with an imaginary second factor.
    TwoFactorial,
    /// `|ϑ| > 1`, `α = ½`: Gaussian double integral.
    TwoFactorialHalf,
}

/// Route of a two-block evaluation by the size of `ϑ` and the shape.
pub fn two_block_route(theta: f64, alpha: f64) -> Result<TwoBlockRoute> {
    let t = theta.abs();
    if t == 1.0 {
        Ok(TwoBlockRoute::MergedOneFactorial)
    } else if t < 1.0 {
        Ok(TwoBlockRoute::Laguerre)
    } else if alpha > 0.5 {
        Ok(TwoBlockRoute::TwoFactorial)
    } else if alpha == 0.5 {
        Ok(TwoBlockRoute::TwoFactorialHalf)
    } else {
        Err(Error::precondition(
            MODULE,
            format!("|theta| = {t} > 1 needs alpha >= 1/2 (not infinitely divisible), got {alpha}"),
        ))
    }
}

/// Two-block cdf by whichever representation covers `ϑ`.
pub fn cdf_two_block(
    p: &EvalPoint,
    s: &BlockFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<(TwoBlockRoute, crate::SeriesValue<f64>)> {
    let route = two_block_route(s.theta12(), p.alpha)?;
    let v = match route {
        TwoBlockRoute::MergedOneFactorial | TwoBlockRoute::Laguerre => cdf_two_block_laguerre(p, s, tol)?,
        TwoBlockRoute::TwoFactorial => cdf_two_factorial(p, s, tol)?,
        TwoBlockRoute::TwoFactorialHalf => cdf_two_factorial_half(p, s, tol)?,
    };
    Ok((route, v))
}
