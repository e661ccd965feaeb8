use num_traits::{FromPrimitive, Num};

use super::laguerre::LaguerreCoefficients;
use super::{BlockIntegrand, EvalPoint, MODULE};
use crate::converge::{max_rho_sq, ThetaTilde};
use crate::corrstruct::BlockFactorialStructure;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::quad::Tolerance;
use crate::specfun::{laguerre_norm, ln_gamma};
use crate::SeriesValue;

/// Which arrangement of the three-block series to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreeBlockVariant {
    /// Shells of equal total degree `k` in the block variables.
    Direct,
    /// Homogeneous polynomials of degree `N` in `ϑ₁, ϑ₂, ϑ₃`.
    Rearranged,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ThreeBlockSeriesParams {
    pub structure: BlockFactorialStructure<f64>,
    pub tol: Tolerance<f64>,
    pub max_total_degree: usize,
    pub variant: ThreeBlockVariant,
}

impl ThreeBlockSeriesParams {
    pub fn new(
        structure: BlockFactorialStructure<f64>,
        tol: Tolerance<f64>,
        max_total_degree: usize,
        variant: ThreeBlockVariant,
    ) -> Result<Self> {
        if structure.p() != 3 {
            return Err(Error::domain(MODULE, "three-block series needs exactly three blocks"));
        }
        if max_total_degree == 0 {
            return Err(Error::domain(MODULE, "max_total_degree must be at least 1"));
        }
        Ok(ThreeBlockSeriesParams { structure, tol, max_total_degree, variant })
    }
}

/// All `(k₁, k₂, k₃, k₄)` with `k₁ + k₂ + k₃ + k₄ = k`.
pub fn three_block_terms(k: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for k1 in 0..=k {
        for k2 in 0..=k - k1 {
            for k3 in 0..=k - k1 - k2 {
                out.push([k1, k2, k3, k - k1 - k2 - k3]);
            }
        }
    }
    out
}

/// `(α)_k (−2)^{k₄} / (k₁! k₂! k₃! k₄!)`, the weight of
/// `Π_j ϑ_j^{2k_j+k₄} ζ_j^{k−k_j}` in the expansion of
/// `(1 − ϑ₁²ζ₂ζ₃ − ϑ₂²ζ₁ζ₃ − ϑ₃²ζ₁ζ₂ + 2ϑ₁ϑ₂ϑ₃ζ₁ζ₂ζ₃)^{−α}`.
pub fn three_block_weight<T: Num + FromPrimitive + Clone>(alpha: T, parts: [usize; 4]) -> T {
    let k: usize = parts.iter().sum();
    let of = |n: usize| T::from_usize(n).expect("count representable");
    let mut w = T::one();
    for i in 0..k {
        w = w * (alpha.clone() + of(i));
    }
    for &m in &parts {
        for i in 2..=m {
            w = w / of(i);
        }
    }
    for _ in 0..parts[3] {
        w = w * (T::zero() - of(2));
    }
    w
}

/// Largest absolute eigenvalue of `Θ̃ − I₃`, the matrix with zero diagonal
/// and off-diagonal entries `ϑ̃_{jk} = ϑ_{jk} √(d_j d_k)` at the worst-case
/// radii `d_j`.
pub fn three_block_spectral_radius(s: &BlockFactorialStructure<f64>) -> Result<f64> {
    let tt = ThetaTilde::from_structure(s)?;
    let v = tt.values;
    let m = Matrix::from_rows(&[vec![0.0, v[2], v[1]], vec![v[2], 0.0, v[0]], vec![v[1], v[0], 0.0]])?;
    let (eig, _) = m.symmetric_eigen();
    Ok(eig.iter().fold(0.0f64, |a, e| a.max(e.abs())))
}

/// Three-block cdf as the series of products of block Laguerre
/// coefficients, in either arrangement.
///
/// The direct arrangement requires `max ρ² < 1` and stops when the shell
/// bound `h_k ρ^k / (1 − ρ)` falls below the tolerance, or when three
/// consecutive shells are negligible. The rearranged one requires the
/// spectral radius of `Θ̃ − I₃` below 1 and stops on three negligible
/// consecutive degrees.
pub fn cdf_three_block(p: &EvalPoint, params: &ThreeBlockSeriesParams) -> Result<SeriesValue<f64>> {
    Ok(three_block_parts(p, params)?.1)
}

/// The series value together with its degree-0 term `c_{1,0} c_{2,0} c_{3,0}`.
pub(crate) fn three_block_parts(p: &EvalPoint, params: &ThreeBlockSeriesParams) -> Result<(f64, SeriesValue<f64>)> {
    let s = &params.structure;
    if s.p() != 3 {
        return Err(Error::domain(MODULE, "three-block series needs exactly three blocks"));
    }
    p.check_dim(s.n())?;
    let th = s.theta_triple();
    if th.iter().any(|v| *v < 0.0) {
        return Err(Error::precondition(MODULE, "three-block series needs non-negative block correlations"));
    }
    let tt = ThetaTilde::from_structure(s)?;
    let rho = match params.variant {
        ThreeBlockVariant::Direct => {
            let m = max_rho_sq(&tt, 1e-6)?;
            if !(m.max_rho_sq < 1.0) {
                return Err(Error::precondition(
                    MODULE,
                    format!("series convergence condition fails: max rho^2 = {:.6} >= 1", m.max_rho_sq),
                ));
            }
            m.max_rho_sq.sqrt()
        }
        ThreeBlockVariant::Rearranged => {
            let r = three_block_spectral_radius(s)?;
            if !(r < 1.0) {
                return Err(Error::precondition(
                    MODULE,
                    format!("rearranged series needs spectral radius of Theta~ - I below 1, got {r:.6}"),
                ));
            }
            r
        }
    };
    let blocks: Vec<BlockIntegrand> = (0..3)
        .map(|j| {
            let r = s.block_range(j);
            BlockIntegrand::new(&p.x[r.clone()], &s.a()[r], p.alpha)
        })
        .collect::<Result<_>>()?;
    let tol = params.tol.abs_tol;
    let cap = params.max_total_degree;
    let mut kmax = cap.min(32);
    loop {
        let cs: Vec<LaguerreCoefficients> =
            blocks.iter().map(|b| LaguerreCoefficients::for_block(b, p.alpha, kmax, tol * 0.01)).collect();
        let coeffs_ok = cs.iter().all(|c| c.converged);
        let out = match params.variant {
            ThreeBlockVariant::Direct => direct(&cs, th, p.alpha, rho, tol, kmax),
            ThreeBlockVariant::Rearranged => rearranged(&cs, th, p.alpha, tol, kmax),
        };
        let base = cs[0].c[0] * cs[1].c[0] * cs[2].c[0];
        if out.converged || kmax >= cap {
            let converged = out.converged && coeffs_ok;
            return Ok((base, SeriesValue { value: out.value.clamp(0.0, 1.0), converged, ..out }));
        }
        let next = (2 * kmax).min(cap).min(256);
        if next == kmax {
            return Ok((base, SeriesValue { value: out.value.clamp(0.0, 1.0), converged: false, ..out }));
        }
        kmax = next;
    }
}

/// `ln n!` for `n ≤ len`.
fn ln_factorials(len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len + 1];
    for n in 1..=len {
        v[n] = v[n - 1] + (n as f64).ln();
    }
    v
}

/// Consecutive degrees whose absolute sum decides convergence of the
/// rearranged series (odd and even degrees alternate in sign).
const WINDOW: usize = 8;

/// Per-shell stopping state: certified bound or three negligible shells.
struct Stop {
    quiet: usize,
}

impl Stop {
    fn update(&mut self, shell: f64, tol: f64) -> bool {
        if shell.abs() <= 0.01 * tol {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= 3
    }
}

fn direct(cs: &[LaguerreCoefficients], th: [f64; 3], alpha: f64, rho: f64, tol: f64, kmax: usize) -> SeriesValue<f64> {
    let mut total = 0.0;
    let mut stop = Stop { quiet: 0 };
    let mut last_shell = 0.0;
    let lf = ln_factorials(kmax);
    let ln_poch0 = ln_gamma(alpha);
    for k in 0..=kmax {
        let mut shell = 0.0;
        let ln_poch = ln_gamma(alpha + k as f64) - ln_poch0;
        for parts in three_block_terms(k) {
            let ln_w = ln_poch + parts[3] as f64 * std::f64::consts::LN_2 - parts.iter().map(|&m| lf[m]).sum::<f64>();
            let mut term = if parts[3] % 2 == 1 { -ln_w.exp() } else { ln_w.exp() };
            for j in 0..3 {
                term *= th[j].powi((2 * parts[j] + parts[3]) as i32) * cs[j].c[k - parts[j]];
            }
            shell += term;
        }
        total += shell;
        last_shell = shell;
        let bound = if rho < 1.0 { laguerre_norm(k + 1, alpha) * rho.powi(k as i32 + 1) / (1.0 - rho) } else { f64::INFINITY };
        if bound <= 0.5 * tol {
            return SeriesValue { value: total, abs_error_estimate: bound, terms_used: k + 1, converged: true };
        }
        if k >= 2 && stop.update(shell, tol) {
            return SeriesValue { value: total, abs_error_estimate: 3.0 * shell.abs(), terms_used: k + 1, converged: true };
        }
    }
    SeriesValue { value: total, abs_error_estimate: last_shell.abs().max(tol), terms_used: kmax + 1, converged: false }
}

fn rearranged(cs: &[LaguerreCoefficients], th: [f64; 3], alpha: f64, tol: f64, kmax: usize) -> SeriesValue<f64> {
    let mut total = cs[0].c[0] * cs[1].c[0] * cs[2].c[0];
    let mut window = std::collections::VecDeque::with_capacity(WINDOW);
    let mut best = (f64::INFINITY, total, 0usize);
    let lf = ln_factorials(2 * kmax + 2);
    let ln_poch0 = ln_gamma(alpha);
    // Degree N needs coefficients up to ⌊N/2⌋.
    for big_n in 2..=(2 * kmax + 1) {
        let n = big_n / 2;
        let e = big_n % 2;
        let mut poly = 0.0;
        for [m1, m2, m3, _] in three_block_terms(n - e).into_iter().filter(|t| t[3] == 0) {
            let ms = [m1, m2, m3];
            let lo = *ms.iter().min().expect("three entries");
            let mut inner = 0.0;
            for m in 0..=lo {
                let mut ln_w = (2 * m + e) as f64 * std::f64::consts::LN_2 + ln_gamma(alpha + (n - m) as f64)
                    - ln_poch0
                    - lf[2 * m + e];
                for &mj in &ms {
                    ln_w -= lf[mj - m];
                }
                inner += ln_w.exp();
            }
            let mut term = inner;
            for j in 0..3 {
                term *= th[j].powi((2 * ms[j] + e) as i32) * cs[j].c[n - ms[j]];
            }
            poly += term;
        }
        if e == 1 {
            poly = -poly;
        }
        total += poly;
        if window.len() == WINDOW {
            window.pop_front();
        }
        window.push_back(poly.abs());
        if window.len() < WINDOW {
            continue;
        }
        let recent: f64 = window.iter().sum();
        if recent < best.0 {
            best = (recent, total, big_n);
        }
        if recent <= 0.1 * tol {
            return SeriesValue { value: total, abs_error_estimate: recent, terms_used: big_n + 1, converged: true };
        }
        // Rounding in high-degree coefficients eventually makes the terms
        // grow again; keep the partial sum where they were smallest.
        if recent > 100.0 * best.0 {
            break;
        }
    }
    SeriesValue { value: best.1, abs_error_estimate: best.0, terms_used: best.2 + 1, converged: best.0 <= tol }
}
