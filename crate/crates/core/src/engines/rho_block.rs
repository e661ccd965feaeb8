use std::collections::BTreeMap;

use super::{EvalPoint, MODULE, SERIES_TOL};
use crate::corrstruct::{is_m_matrix, one_factorial_exact, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::quad::{gauss_laguerre, Tolerance};
use crate::specfun::{laguerre_norm, nc_gamma_density, NcGammaTable};
use crate::SeriesValue;

/// Largest block handled (subset enumeration over all non-empty subsets).
pub const MAX_RHO_BLOCK: usize = 4;
const MAX_ORDER: usize = 30;

/// Truncation of the series in `ρ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoBlockOrder {
    /// Sum until three consecutive terms are negligible.
    ExactSeries,
    /// Terms up to `ρ⁴`; the error estimate is the size of the `ρ⁶` term.
    Rho4Approx,
}

/// Multi-index of derivative orders within a block.
type Orders = [u8; MAX_RHO_BLOCK];

/// One block: factors, non-empty subsets with their weights `q_J`.
struct Block {
    x: Vec<f64>,
    d: Vec<f64>,
    b2: Vec<f64>,
    subsets: Vec<(Orders, f64)>,
}

impl Block {
    fn new(x: &[f64], r: &CorrelationMatrix<f64>, which: usize) -> Result<Self> {
        let n = r.n();
        let inv = r.inverse();
        for i in 0..n {
            let row_sum: f64 = inv.row(i).iter().sum();
            if !(row_sum > 0.0) {
                return Err(Error::precondition(
                    MODULE,
                    format!("block {which}: inverse is not diagonally dominant (row {} sums to {row_sum:.3e})", i + 1),
                ));
            }
            for j in 0..n {
                if i != j && inv[(i, j)] > 1e-12 {
                    return Err(Error::precondition(
                        MODULE,
                        format!("block {which}: inverse has a positive off-diagonal entry at ({},{})", i + 1, j + 1),
                    ));
                }
            }
        }
        let f = one_factorial_exact(r, 1e-9).ok_or_else(|| {
            Error::precondition(MODULE, format!("block {which}: correlation is not one-factorial"))
        })?;
        let a = f.a();
        let d: Vec<f64> = a.iter().map(|v| 1.0 - v * v).collect();
        let b2 = a.iter().zip(&d).map(|(v, d)| v * v / d).collect();
        let subsets = rho_block_weights(r)
            .into_iter()
            .enumerate()
            .map(|(i, q)| {
                let mask = i + 1;
                (std::array::from_fn(|mu| u8::from(mask & (1 << mu) != 0)), q)
            })
            .collect();
        Ok(Block { x: x.to_vec(), d, b2, subsets })
    }

    fn n(&self) -> usize {
        self.x.len()
    }
}

/// `q_J = 1' R_J⁻¹ 1 · |R_J|` of every non-empty subset, in bit-mask order.
pub fn rho_block_weights(r: &CorrelationMatrix<f64>) -> Vec<f64> {
    let n = r.n();
    (1u32..(1 << n))
        .map(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let m = r.submatrix(&idx);
            let inv = m.inverse();
            inv.rows().iter().flatten().sum::<f64>() * m.det()
        })
        .collect()
}

/// `P ↦ P · Σ_J q_J Π_{μ∈J} ∂_μ` on polynomials in the derivative symbols.
fn multiply(p: &BTreeMap<Orders, f64>, subsets: &[(Orders, f64)]) -> BTreeMap<Orders, f64> {
    let mut out = BTreeMap::new();
    for (m, &c) in p {
        for (s, q) in subsets {
            let mut key = *m;
            for i in 0..MAX_RHO_BLOCK {
                key[i] += s[i];
            }
            *out.entry(key).or_insert(0.0) += c * q;
        }
    }
    out
}

/// `Σ_M P[M] ∂^M F(x̄; α+k, R)` for a one-factorial block, by Gauss–Laguerre
/// in the common factor with weight `g_{α+k}` and rule doubling.
fn block_term(block: &Block, poly: &BTreeMap<Orders, f64>, alpha: f64, k: usize, tol: f64) -> Result<(f64, f64, bool)> {
    let beta = alpha + k as f64;
    let n = block.n();
    let tables: Vec<NcGammaTable<f64>> =
        (0..n).map(|mu| NcGammaTable::new(beta, block.x[mu] / block.d[mu])).collect::<Result<_>>()?;
    let at = |nodes: usize| -> f64 {
        let rule = gauss_laguerre(nodes, beta);
        let mut total = 0.0;
        let mut deriv = vec![vec![0.0; k + 1]; n];
        for (&y, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
            let w = lw.exp();
            if w == 0.0 {
                continue;
            }
            for mu in 0..n {
                let xs = block.x[mu] / block.d[mu];
                let nu = block.b2[mu] * y;
                deriv[mu][0] = tables[mu].cdf(nu, SERIES_TOL).value;
                if k == 0 {
                    continue;
                }
                // ∂^{m} G_β(x/d; ν) = d^{−m} Σ_l C(m−1, l)(−1)^{m−1−l} g_{β−l}(x/d; ν).
                let dens: Vec<f64> = (0..k).map(|l| nc_gamma_density(beta - l as f64, xs, nu)).collect();
                for m in 1..=k {
                    let mut s = 0.0;
                    let mut binom = 1.0;
                    for l in 0..m {
                        if l > 0 {
                            binom *= (m - l) as f64 / l as f64;
                        }
                        let sign = if (m - 1 - l) % 2 == 0 { 1.0 } else { -1.0 };
                        s += sign * binom * dens[l];
                    }
                    deriv[mu][m] = s / block.d[mu].powi(m as i32);
                }
            }
            let mut v = 0.0;
            for (orders, c) in poly {
                let mut term = *c;
                for mu in 0..n {
                    term *= deriv[mu][orders[mu] as usize];
                }
                v += term;
            }
            total += w * v;
        }
        total
    };
    let mut nodes = 32;
    let mut prev = at(nodes);
    loop {
        nodes *= 2;
        let v = at(nodes);
        let err = (v - prev).abs();
        if err <= tol * v.abs().max(1.0) || nodes >= 512 {
            return Ok((v, err, err <= tol * v.abs().max(1.0)));
        }
        prev = v;
    }
}

/// Cdf of a correlation matrix with one-factorial diagonal blocks `R₁₁`,
/// `R₂₂` and constant cross block `ρ 1 1'`, as a series in `ρ²` whose terms
/// are products of mixed partial derivatives of the block cdfs at shape
/// `α + k`. Block sizes are limited to [`MAX_RHO_BLOCK`].
pub fn cdf_rho_block(
    p: &EvalPoint,
    r11: &CorrelationMatrix<f64>,
    r22: &CorrelationMatrix<f64>,
    rho: f64,
    order: RhoBlockOrder,
    tol: &Tolerance<f64>,
) -> Result<SeriesValue<f64>> {
    let (n1, n2) = (r11.n(), r22.n());
    if n1 > MAX_RHO_BLOCK || n2 > MAX_RHO_BLOCK {
        return Err(Error::domain(MODULE, format!("block sizes are limited to {MAX_RHO_BLOCK}, got {n1} and {n2}")));
    }
    p.check_dim(n1 + n2)?;
    if p.x.iter().any(|v| v.is_infinite()) {
        return Err(Error::domain(MODULE, "rho-block series needs finite truncation points"));
    }
    if !(rho >= 0.0) {
        return Err(Error::domain(MODULE, format!("rho must be non-negative, got {rho}")));
    }
    let b1 = Block::new(&p.x[..n1], r11, 1)?;
    let b2 = Block::new(&p.x[n1..], r22, 2)?;
    let full = Matrix::from_fn(n1 + n2, |i, j| match (i < n1, j < n1) {
        (true, true) => r11.get(i, j),
        (false, false) => r22.get(i - n1, j - n1),
        _ => rho,
    });
    let full = CorrelationMatrix::validate(full)
        .map_err(|e| Error::precondition(MODULE, format!("assembled matrix is not a correlation matrix: {e}")))?;
    if !is_m_matrix(&full.inverse(), 1e-12) {
        return Err(Error::precondition(MODULE, format!("inverse of the assembled matrix is not an M-matrix at rho = {rho}")));
    }

    let alpha = p.alpha;
    let t2 = rho * rho;
    let last = match order {
        RhoBlockOrder::ExactSeries => MAX_ORDER,
        RhoBlockOrder::Rho4Approx => 3,
    };
    let inner_tol = tol.abs_tol * 0.01;
    let mut poly1 = BTreeMap::from([([0u8; MAX_RHO_BLOCK], 1.0)]);
    let mut poly2 = poly1.clone();
    let mut total = 0.0f64;
    let mut err = 0.0;
    let mut ok = true;
    let mut quiet = 0;
    for k in 0..=last {
        if k > 0 {
            poly1 = multiply(&poly1, &b1.subsets);
            poly2 = multiply(&poly2, &b2.subsets);
        }
        let (v1, e1, c1) = block_term(&b1, &poly1, alpha, k, inner_tol)?;
        let (v2, e2, c2) = block_term(&b2, &poly2, alpha, k, inner_tol)?;
        let w = laguerre_norm(k, alpha) * t2.powi(k as i32);
        let term = w * v1 * v2;
        if order == RhoBlockOrder::Rho4Approx && k == 3 {
            return Ok(SeriesValue { value: total.clamp(0.0, 1.0), abs_error_estimate: term.abs() + err, terms_used: 3, converged: ok });
        }
        total += term;
        err += w * (v1.abs() * e2 + v2.abs() * e1);
        ok &= c1 && c2;
        if rho == 0.0 {
            return Ok(SeriesValue { value: total.clamp(0.0, 1.0), abs_error_estimate: err, terms_used: 1, converged: ok });
        }
        quiet = if term.abs() <= 0.01 * tol.abs_tol { quiet + 1 } else { 0 };
        if quiet >= 3 {
            return Ok(SeriesValue {
                value: total.clamp(0.0, 1.0),
                abs_error_estimate: err + 3.0 * term.abs(),
                terms_used: k + 1,
                converged: ok,
            });
        }
    }
    Ok(SeriesValue { value: total.clamp(0.0, 1.0), abs_error_estimate: err.max(tol.abs_tol), terms_used: last + 1, converged: false })
}
