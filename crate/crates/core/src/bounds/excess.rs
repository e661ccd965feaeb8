use super::{Evaluator, InequalityCertificate, Method, Partition, MODULE};
use crate::converge::{max_rho_sq, ThetaTilde};
use crate::corrstruct::{is_m_matrix, three_block_mmatrix_condition, Assemble, BlockFactorialStructure, CorrelationMatrix, OneFactorialStructure};
use crate::engines::{
    cdf_one_factorial, cdf_two_block, three_block_parts, two_block_laguerre_parts, EvalPoint, ThreeBlockSeriesParams,
    TwoBlockRoute,
};
use crate::error::{Error, Result};
use crate::quad::Tolerance;
use crate::SeriesValue;

/// Shapes for which the monotonicity in the correlations holds in
/// dimension `n`: `2α ∈ ℕ` or `2α > [(n−1)/2]`.
pub fn admissible_shape(alpha: f64, n: usize) -> bool {
    let two = 2.0 * alpha;
    let integer = (two - two.round()).abs() <= 1e-12 && two.round() >= 1.0;
    integer || two > ((n.saturating_sub(1)) / 2) as f64
}

fn check_shape(alpha: f64, n: usize) -> Result<()> {
    if !admissible_shape(alpha, n) {
        return Err(Error::precondition(
            MODULE,
            format!("shape {alpha} is not admissible in dimension {n}: need 2*alpha integer or above {}", (n - 1) / 2),
        ));
    }
    Ok(())
}

fn converged(v: SeriesValue<f64>, what: &str) -> Result<f64> {
    if !v.converged {
        return Err(Error::NonConvergence {
            module: MODULE,
            msg: format!("{what}: error estimate {:.3e} above tolerance", v.abs_error_estimate),
        });
    }
    Ok(v.value)
}

/// Product of the block cdfs of a block-factorial structure.
fn block_product(p: &EvalPoint, s: &BlockFactorialStructure<f64>, tol: &Tolerance<f64>) -> Result<f64> {
    let mut prod = 1.0;
    for j in 0..s.p() {
        let r = s.block_range(j);
        let sub = EvalPoint::new(p.x[r.clone()].to_vec(), p.alpha)?;
        let f = OneFactorialStructure::new(s.a()[r].to_vec())?;
        prod *= converged(cdf_one_factorial(&sub, &f, tol)?, "block cdf")?;
    }
    Ok(prod)
}

/// Lower bound `F(x; α, R_ϑ) − F(x; α, R₀)` for the excess
/// `P_R(∩A) − P(∩_{block 1} A) P(∩_{block 2} A)` of any `R` that agrees
/// with the structure on the diagonal blocks and dominates it across.
///
/// `R_ϑ` is evaluated by the merged one-factorial integral at `ϑ = 1`, the
/// Laguerre series for `ϑ < 1` (as the series without its degree-0 term,
/// which is the product) and the two-factorial integral for `ϑ > 1`.
pub fn excess_two_block(
    x: &EvalPoint,
    r: &CorrelationMatrix<f64>,
    s: &BlockFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<InequalityCertificate> {
    if s.p() != 2 {
        return Err(Error::domain(MODULE, "two-block excess needs a two-block structure"));
    }
    let n = s.n();
    if r.n() != n || x.n() != n {
        return Err(Error::domain(MODULE, "point, matrix and structure differ in dimension"));
    }
    check_shape(x.alpha, n)?;
    let th = s.theta12();
    let bound = {
        let (q1, q2) = (s.q(0), s.q(1));
        (1.0 + 1.0 / q1).sqrt().min((1.0 + 1.0 / q2).sqrt())
    };
    if !(th >= 0.0) || th > bound {
        return Err(Error::precondition(
            MODULE,
            format!("theta = {th} outside the M-matrix range [0, {bound:.6}]"),
        ));
    }
    let fitted = s.assembled_matrix();
    let mut differs = false;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (rij, fij) = (r.get(i, j), fitted[(i, j)]);
            if s.block_of(i) == s.block_of(j) {
                if (rij - fij).abs() > 1e-9 {
                    return Err(Error::precondition(
                        MODULE,
                        format!("diagonal block entry ({},{}) = {rij} differs from a_i a_j = {fij}", i + 1, j + 1),
                    ));
                }
            } else {
                if rij < fij - 1e-12 {
                    return Err(Error::precondition(
                        MODULE,
                        format!("cross entry ({},{}) = {rij} is below theta a_i a_j = {fij}", i + 1, j + 1),
                    ));
                }
                differs |= rij > fij + 1e-12;
            }
        }
    }
    if !differs {
        return Err(Error::precondition(MODULE, "R equals the structured matrix R_theta; the bound would be the excess itself"));
    }
    let desc = format!("excess_two_block;alpha={:?};x={:?};a={:?};theta={th:?};n1={}", x.alpha, x.x, s.a(), s.block_sizes()[0]);
    if th == 0.0 || s.q(0) == 0.0 || s.q(1) == 0.0 {
        let base = block_product(x, s, tol)?;
        return Ok(InequalityCertificate::new("excess_two_block", &desc, base, base, Method::TwoBlockLaguerre, 0.0, None));
    }
    let route = crate::engines::two_block_route(th, x.alpha)?;
    let (lhs, rhs, method) = match route {
        TwoBlockRoute::Laguerre => {
            let (base, rest) = two_block_laguerre_parts(x, s, tol)?;
            let rest = converged(rest, "Laguerre excess series")?;
            (base + rest, base, Method::TwoBlockLaguerre)
        }
        _ => {
            let (_, v) = cdf_two_block(x, s, tol)?;
            let f = converged(v, "two-block cdf")?;
            let m = if route == TwoBlockRoute::MergedOneFactorial { Method::OneFactorial } else { Method::TwoFactorial };
            (f, block_product(x, s, tol)?, m)
        }
    };
    Ok(InequalityCertificate::new("excess_two_block", &desc, lhs, rhs, method, 0.0, None))
}

/// Lower bound for the excess over the product of the three block
/// probabilities: the three-block series without its degree-0 term.
pub fn excess_three_block(x: &EvalPoint, params: &ThreeBlockSeriesParams) -> Result<InequalityCertificate> {
    let s = &params.structure;
    if s.p() != 3 {
        return Err(Error::domain(MODULE, "three-block excess needs a three-block structure"));
    }
    check_shape(x.alpha, s.n())?;
    let th = s.theta_triple();
    let q = [s.q(0), s.q(1), s.q(2)];
    // The closed-form condition is stated for ϑ_j ∈ (0, 1); on the boundary
    // the assembled inverse is checked directly.
    let m_matrix = if th.iter().all(|&t| t > 0.0 && t < 1.0) {
        three_block_mmatrix_condition(th, q)
    } else {
        let r = s.assemble()?;
        is_m_matrix(&r.inverse(), 1e-12)
    };
    if !m_matrix {
        return Err(Error::precondition(MODULE, "inverse of the three-block matrix is not an M-matrix"));
    }
    let m = max_rho_sq(&ThetaTilde::from_structure(s)?, 1e-8)?;
    if !(m.max_rho_sq < 1.0) {
        return Err(Error::precondition(MODULE, format!("series convergence condition fails: max rho^2 = {:.6}", m.max_rho_sq)));
    }
    let (base, v) = three_block_parts(x, params)?;
    let total = converged(v, "three-block series")?;
    let desc = format!("excess_three_block;alpha={:?};x={:?};a={:?};theta={th:?};sizes={:?}", x.alpha, x.x, s.a(), s.block_sizes());
    Ok(InequalityCertificate::new("excess_three_block", &desc, total, base, Method::ThreeBlockSeries, 0.0, None))
}

/// `(γ(b; ½)^{2α} − 1) · P(∩_{block 1} A) P(∩_{block 2} A)` with
/// `γ(b; ½) = P(∩ B) / (P(∩_{block 1} B) P(∩_{block 2} B))` at shape ½,
/// a lower bound for the excess at shape `α` when `2α ∈ ℕ`.
///
/// `level` supplies the block probabilities at shape `α`, `half` the
/// probabilities at shape ½ of the same correlation matrix.
pub fn power_bound(
    x: &EvalPoint,
    b: &[f64],
    half: &dyn Evaluator,
    level: &dyn Evaluator,
    part: &Partition,
) -> Result<InequalityCertificate> {
    let n = x.n();
    let two = 2.0 * x.alpha;
    if (two - two.round()).abs() > 1e-12 || two.round() < 1.0 {
        return Err(Error::precondition(MODULE, format!("power bound needs 2*alpha a positive integer, got {two}")));
    }
    if half.alpha() != 0.5 || level.alpha() != x.alpha {
        return Err(Error::domain(MODULE, "evaluators must be at shape 1/2 and at the shape of the point"));
    }
    if b.len() != n || half.dim() != n || level.dim() != n || part.n() != n || part.blocks().len() != 2 {
        return Err(Error::domain(MODULE, "point, truncation vector, evaluators and two-block partition must agree"));
    }
    if let Some(i) = (0..n).find(|&i| !(x.x[i] <= b[i])) {
        return Err(Error::precondition(MODULE, format!("x_{0} = {1} exceeds b_{0} = {2}", i + 1, x.x[i], b[i])));
    }
    let desc = format!("power_bound;alpha={:?};x={:?};b={b:?};blocks={:?}", x.alpha, x.x, part.blocks());
    let method = if half.is_deterministic() && level.is_deterministic() { level.method() } else { Method::MonteCarlo };
    let g = match half.evaluate(&[b.to_vec(), part.keep(b, &[0]), part.keep(b, &[1])]) {
        Ok(g) => g,
        Err(e) => return Ok(InequalityCertificate::failed("power_bound", &desc, method, &e)),
    };
    let p = match level.evaluate(&[part.keep(&x.x, &[0]), part.keep(&x.x, &[1])]) {
        Ok(p) => p,
        Err(e) => return Ok(InequalityCertificate::failed("power_bound", &desc, method, &e)),
    };
    let (f, f1, f2) = (g.values[0], g.values[1], g.values[2]);
    let gamma = f / (f1 * f2);
    let prod = p.values[0] * p.values[1];
    let pow = gamma.powf(two);
    // Delta method on γ and on the product; the two evaluations are independent.
    let se_gamma = g.linear_se(&[1.0 / (f1 * f2), -gamma / f1, -gamma / f2]);
    let se_prod = p.linear_se(&[p.values[1], p.values[0]]);
    let se = ((two * gamma.powf(two - 1.0) * prod * se_gamma).powi(2) + ((pow - 1.0) * se_prod).powi(2)).sqrt();
    let seed = g.seed.or(p.seed);
    Ok(InequalityCertificate::new("power_bound", &desc, pow * prod, prod, method, se, seed))
}
