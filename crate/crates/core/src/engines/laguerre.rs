use super::{BlockIntegrand, EvalPoint, MODULE};
use crate::corrstruct::{BlockFactorialStructure, OneFactorialStructure};
use crate::error::{Error, Result};
use crate::quad::{gauss_laguerre, integrate_2d_gamma, GammaTail, Tolerance};
use crate::specfun::{laguerre_norm, ln_poisson_kernel, LaguerreSeq};
use crate::SeriesValue;

const MAX_NODES: usize = 1024;
const MAX_DEGREE: usize = 256;

/// Laguerre coefficients `c_k = h_k⁻¹ ∫ G(y) L_k^{(α−1)}(y) g_α(y) dy`,
/// `h_k = C(α+k−1, k)`, of a block's conditional cdf `G`.
///
/// All degrees share one Gauss–Laguerre rule; the rule is doubled until two
/// successive rules agree on every normalized coefficient `√h_k c_k`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LaguerreCoefficients {
    pub alpha: f64,
    pub c: Vec<f64>,
    /// Estimated absolute error of each `c_k`.
    pub err: Vec<f64>,
    /// `h_k` for the same degrees.
    pub h: Vec<f64>,
    /// `‖G‖² = ∫ G² g_α`, the Parseval total of `Σ h_k c_k²`.
    pub norm_sq: f64,
    pub nodes: usize,
    pub converged: bool,
}

impl LaguerreCoefficients {
    /// Coefficients of degree `0..=kmax` for the block `(x, a)`.
    pub fn new(x: &[f64], a: &[f64], alpha: f64, kmax: usize, tol: f64) -> Result<Self> {
        if x.len() != a.len() {
            return Err(Error::domain(MODULE, "block points and factors differ in length"));
        }
        let block = BlockIntegrand::new(x, a, alpha)?;
        Ok(Self::for_block(&block, alpha, kmax, tol))
    }

    pub(crate) fn for_block(block: &BlockIntegrand, alpha: f64, kmax: usize, tol: f64) -> Self {
        let h: Vec<f64> = (0..=kmax).map(|k| laguerre_norm(k, alpha)).collect();
        if block.is_constant() {
            let v = block.eval(0.0);
            let mut c = vec![0.0; kmax + 1];
            c[0] = v;
            return LaguerreCoefficients {
                alpha,
                c,
                err: vec![0.0; kmax + 1],
                h,
                norm_sq: v * v,
                nodes: 1,
                converged: true,
            };
        }
        let mut n = (2 * (kmax + 1)).next_power_of_two().max(64);
        let (mut c, mut norm_sq) = coefficients_at(block, alpha, kmax, n, &h);
        loop {
            let m = 2 * n;
            let (c2, norm2) = coefficients_at(block, alpha, kmax, m, &h);
            let err: Vec<f64> = c.iter().zip(&c2).map(|(a, b)| (a - b).abs()).collect();
            let worst = err.iter().zip(&h).map(|(e, h)| e * h.sqrt()).fold(0.0, f64::max);
            let converged = worst <= tol;
            c = c2;
            norm_sq = norm2.max(norm_sq.min(norm2));
            n = m;
            if converged || n >= MAX_NODES {
                return LaguerreCoefficients { alpha, c, err, h, norm_sq, nodes: n, converged };
            }
        }
    }

    /// `max(0, ‖G‖² − Σ_{i<k} h_i c_i²)`, the Parseval mass of degrees ≥ `k`.
    pub fn parseval_remainder(&self, k: usize) -> f64 {
        let partial: f64 = (0..k.min(self.c.len())).map(|i| self.h[i] * self.c[i] * self.c[i]).sum();
        (self.norm_sq - partial).max(0.0)
    }

    pub fn kmax(&self) -> usize {
        self.c.len() - 1
    }
}

fn coefficients_at(block: &BlockIntegrand, alpha: f64, kmax: usize, n: usize, h: &[f64]) -> (Vec<f64>, f64) {
    let rule = gauss_laguerre(n, alpha);
    let mut acc = vec![0.0; kmax + 1];
    let mut norm_sq = 0.0;
    for (&y, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
        let g = block.eval(y);
        if g == 0.0 {
            continue;
        }
        norm_sq += lw.exp() * g * g;
        let mut seq = LaguerreSeq::new(alpha, y);
        for slot in acc.iter_mut() {
            let (m, s) = seq.current();
            *slot += g * m * (lw + s).exp();
            seq.advance();
        }
    }
    let c = acc.iter().zip(h).map(|(a, h)| a / h).collect();
    (c, norm_sq)
}

/// Single coefficient `c_{j,k}` of one block.
pub fn coeff_cjk(x_block: &[f64], alpha: f64, a_block: &[f64], k: usize, tol: f64) -> Result<f64> {
    Ok(LaguerreCoefficients::new(x_block, a_block, alpha, k, tol)?.c[k])
}

/// Sum `Σ_k h_k t^k c_{1,k} c_{2,k}` from degree `start`, with the
/// Cauchy–Schwarz tail `t^{K+1} √(R₁ R₂)` from the Parseval remainders.
fn bilinear_sum(c1: &LaguerreCoefficients, c2: &LaguerreCoefficients, t: f64, start: usize) -> (f64, f64, f64) {
    let kmax = c1.kmax().min(c2.kmax());
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut tk = t.powi(start as i32);
    for k in start..=kmax {
        let h = c1.h[k];
        sum += h * tk * c1.c[k] * c2.c[k];
        err += h * tk.abs() * (c1.c[k].abs() * c2.err[k] + c2.c[k].abs() * c1.err[k]);
        tk *= t;
    }
    let guard = 1e-15;
    let r1 = c1.parseval_remainder(kmax + 1) + guard * c1.norm_sq;
    let r2 = c2.parseval_remainder(kmax + 1) + guard * c2.norm_sq;
    let tail = tk.abs() * (r1 * r2).sqrt();
    (sum, err, tail)
}

fn block_integrands(p: &EvalPoint, s: &BlockFactorialStructure<f64>) -> Result<Vec<BlockIntegrand>> {
    (0..s.p())
        .map(|j| {
            let r = s.block_range(j);
            BlockIntegrand::new(&p.x[r.clone()], &s.a()[r], p.alpha)
        })
        .collect()
}

/// Adaptive-degree coefficients for all blocks until `tail(K) ≤ tol/2`.
pub(crate) fn coefficients_for(
    blocks: &[BlockIntegrand],
    alpha: f64,
    tol: f64,
    mut tail_of: impl FnMut(&[LaguerreCoefficients]) -> f64,
) -> (Vec<LaguerreCoefficients>, bool) {
    let mut kmax = 24;
    loop {
        let cs: Vec<LaguerreCoefficients> =
            blocks.iter().map(|b| LaguerreCoefficients::for_block(b, alpha, kmax, tol * 0.05)).collect();
        let tail = tail_of(&cs);
        if tail <= 0.5 * tol || kmax >= MAX_DEGREE {
            let ok = tail <= 0.5 * tol && cs.iter().all(|c| c.converged);
            return (cs, ok);
        }
        kmax = (2 * kmax).min(MAX_DEGREE);
    }
}

/// Two-block cdf as the Laguerre series `Σ_k h_k ϑ^{2k} c_{1,k} c_{2,k}`,
/// valid for `|ϑ| ≤ 1`. At `|ϑ| = 1` the blocks merge into one factor and
/// the one-factorial integral is used instead.
pub fn cdf_two_block_laguerre(
    p: &EvalPoint,
    s: &BlockFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<SeriesValue<f64>> {
    if s.p() != 2 {
        return Err(Error::domain(MODULE, "two-block engine needs exactly two blocks"));
    }
    p.check_dim(s.n())?;
    let th = s.theta12();
    if !(th.abs() <= 1.0) {
        return Err(Error::precondition(
            MODULE,
            format!("Laguerre series needs |theta| <= 1, got {th}; use the two-factorial engine"),
        ));
    }
    if th.abs() == 1.0 {
        let merged = OneFactorialStructure::new(s.a().to_vec())?;
        return super::cdf_one_factorial(p, &merged, tol);
    }
    let blocks = block_integrands(p, s)?;
    let t = th * th;
    let (cs, ok) = coefficients_for(&blocks, p.alpha, tol.abs_tol, |cs| bilinear_sum(&cs[0], &cs[1], t, 0).2);
    let (sum, err, tail) = bilinear_sum(&cs[0], &cs[1], t, 0);
    let e = err + tail;
    Ok(SeriesValue {
        value: sum.clamp(0.0, 1.0),
        abs_error_estimate: e,
        terms_used: cs[0].kmax() + 1,
        converged: ok && e <= tol.target(sum),
    })
}

/// Degree-0 term `c_{1,0} c_{2,0}` (the product of the block cdfs) and the
/// remaining series `Σ_{k≥1} h_k ϑ^{2k} c_{1,k} c_{2,k}`, from the same
/// coefficients, for `|ϑ| < 1`.
pub(crate) fn two_block_laguerre_parts(
    p: &EvalPoint,
    s: &BlockFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<(f64, SeriesValue<f64>)> {
    p.check_dim(s.n())?;
    let th = s.theta12();
    if s.p() != 2 || !(th.abs() < 1.0) {
        return Err(Error::precondition(MODULE, format!("Laguerre excess series needs two blocks and |theta| < 1, got {th}")));
    }
    let blocks = block_integrands(p, s)?;
    let t = th * th;
    let (cs, ok) = coefficients_for(&blocks, p.alpha, tol.abs_tol, |cs| bilinear_sum(&cs[0], &cs[1], t, 1).2);
    let (sum, err, tail) = bilinear_sum(&cs[0], &cs[1], t, 1);
    let base = cs[0].c[0] * cs[1].c[0];
    let e = err + tail + cs[0].err[0] * cs[1].c[0].abs() + cs[1].err[0] * cs[0].c[0].abs();
    Ok((
        base,
        SeriesValue { value: sum, abs_error_estimate: e, terms_used: cs[0].kmax(), converged: ok && e <= tol.target(sum) },
    ))
}

/// Two-block cdf as a double integral against the Poisson kernel,
/// `∫∫ G₁(u₁) G₂(u₂) K_ϑ(u₁, u₂) g_α(u₁) g_α(u₂) du₁ du₂`, for `|ϑ| < 1`.
///
/// This is the scaled-variable form of
/// `(1−ϑ²)^α ∫∫ G₁((1−ϑ²)y₁) G₂((1−ϑ²)y₂) ₀F₁(α; ϑ² y₁ y₂) g_α g_α`, chosen
/// because `K_ϑ g_α g_α` is a density with gamma marginals, which fixes the
/// truncation of both axes.
pub fn cdf_two_block_kernel(
    p: &EvalPoint,
    s: &BlockFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<SeriesValue<f64>> {
    if s.p() != 2 {
        return Err(Error::domain(MODULE, "two-block engine needs exactly two blocks"));
    }
    p.check_dim(s.n())?;
    let th = s.theta12();
    if !(th.abs() < 1.0) {
        return Err(Error::precondition(MODULE, format!("kernel form needs |theta| < 1, got {th}")));
    }
    let blocks = block_integrands(p, s)?;
    let alpha = p.alpha;
    if th == 0.0 || blocks.iter().any(|b| b.is_constant()) {
        // The kernel integrates to 1 against either marginal.
        let one = |b: &BlockIntegrand| -> Result<SeriesValue<f64>> {
            if b.is_constant() {
                Ok(SeriesValue::exact(b.eval(0.0)))
            } else {
                crate::quad::integrate_gamma_weighted(|y| b.eval(y), alpha, &tol.scaled(0.5))
            }
        };
        let (v1, v2) = (one(&blocks[0])?, one(&blocks[1])?);
        let e = v1.abs_error_estimate + v2.abs_error_estimate;
        return Ok(SeriesValue {
            value: v1.value * v2.value,
            abs_error_estimate: e,
            terms_used: v1.terms_used + v2.terms_used,
            converged: v1.converged && v2.converged,
        });
    }
    let r = integrate_2d_gamma(
        |u1, u2| {
            let g1 = blocks[0].eval(u1);
            if g1 == 0.0 {
                return 0.0;
            }
            let g2 = blocks[1].eval(u2);
            if g2 == 0.0 {
                return 0.0;
            }
            g1 * g2 * ln_poisson_kernel(u1, u2, alpha, th).exp()
        },
        alpha,
        GammaTail::default(),
        tol,
    )?;
    Ok(SeriesValue { value: r.value.clamp(0.0, 1.0), ..r })
}

/// Approximation of the cdf of two equicorrelated blocks (sizes `n1`, `n2`,
/// correlations `r1`, `r2`) at a common threshold `x`, given the mean
/// squared cross correlation `r2cross ≤ r1 r2`: the product of the block
/// cdfs plus `Σ_{k≥1} h_k (r2cross/(r1 r2))^k c_k(n1, r1) c_k(n2, r2)`.
pub fn upper_tail_approx(
    x: f64,
    alpha: f64,
    n1: usize,
    n2: usize,
    r1: f64,
    r2: f64,
    r2cross: f64,
) -> Result<f64> {
    let unit = |r: f64| r > 0.0 && r < 1.0;
    if !unit(r1) || !unit(r2) {
        return Err(Error::domain(MODULE, "mean block correlations must lie in (0, 1)"));
    }
    if !(r2cross >= 0.0) || r2cross > r1 * r2 {
        return Err(Error::precondition(
            MODULE,
            format!("mean squared cross correlation {r2cross} must lie in [0, r1*r2 = {}]", r1 * r2),
        ));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain(MODULE, "block sizes must be positive"));
    }
    let b1 = BlockIntegrand::new(&vec![x; n1], &vec![r1.sqrt(); n1], alpha)?;
    let b2 = BlockIntegrand::new(&vec![x; n2], &vec![r2.sqrt(); n2], alpha)?;
    let t = r2cross / (r1 * r2);
    let tol = 1e-10;
    let (cs, _) = coefficients_for(&[b1, b2], alpha, tol, |cs| bilinear_sum(&cs[0], &cs[1], t, 1).2);
    let (sum, _, _) = bilinear_sum(&cs[0], &cs[1], t, 1);
    Ok(cs[0].c[0] * cs[1].c[0] + sum)
}
