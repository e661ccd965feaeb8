use num_complex::Complex;

use super::{cdf_one_factorial, EvalPoint, MODULE, SERIES_TOL};
use crate::corrstruct::{BlockFactorialStructure, OneFactorialStructure, TwoFactorialStructure};
use crate::error::{Error, Result};
use crate::quad::{gauss_hermite, gauss_jacobi, gauss_laguerre, Tolerance};
use crate::specfun::NcGammaTable;
use crate::SeriesValue;

/// Rule sizes tried in turn: (nodes per radial axis, nodes in the angle).
const LEVELS: [(usize, usize); 4] = [(32, 16), (64, 32), (128, 64), (256, 128)];

/// Coordinates of a two-factorial structure that depend on the factors.
struct Factors {
    tables: Vec<NcGammaTable<f64>>,
    b1: Vec<f64>,
    b2: Vec<f64>,
    imaginary: bool,
    constant: f64,
}

impl Factors {
    fn new(p: &EvalPoint, t: &TwoFactorialStructure<f64>) -> Result<Self> {
        let mut f = Factors { tables: vec![], b1: vec![], b2: vec![], imaginary: t.second_imaginary, constant: 1.0 };
        for mu in 0..t.n() {
            if p.x[mu].is_infinite() {
                continue;
            }
            let table = NcGammaTable::new(p.alpha, p.x[mu] / t.d[mu])?;
            let (c1, c2) = (t.b_columns[0][mu], t.b_columns[1][mu]);
            if c1 == 0.0 && c2 == 0.0 {
                f.constant *= table.central(0);
            } else {
                f.tables.push(table);
                f.b1.push(c1);
                f.b2.push(c2);
            }
        }
        Ok(f)
    }

    /// Product of the conditional cdfs at non-centralities `ν_μ(s1, s2)`,
    /// where `ν_μ = |B_μ1 s1 + B_μ2 s2|²`-type values are produced by `nu`.
    fn product(&self, mut nu: impl FnMut(f64, f64) -> Complex<f64>) -> Complex<f64> {
        let mut v = Complex::new(self.constant, 0.0);
        for (i, t) in self.tables.iter().enumerate() {
            v *= t.cdf_complex(nu(self.b1[i], self.b2[i]), SERIES_TOL).value;
            if v.norm() == 0.0 {
                break;
            }
        }
        v
    }
}

fn check(p: &EvalPoint, s: &BlockFactorialStructure<f64>) -> Result<()> {
    if s.p() != 2 {
        return Err(Error::domain(MODULE, "two-factorial engine needs exactly two blocks"));
    }
    p.check_dim(s.n())?;
    let th = s.theta12();
    let bound = s.two_block_theta_bound();
    if !(th.abs() < bound) {
        return Err(Error::precondition(
            MODULE,
            format!("|theta| = {} must stay below the admissibility bound {bound}", th.abs()),
        ));
    }
    Ok(())
}

/// With a block whose factors all vanish the blocks are independent.
fn independent_blocks(p: &EvalPoint, s: &BlockFactorialStructure<f64>, tol: &Tolerance<f64>) -> Result<Option<SeriesValue<f64>>> {
    if s.q(0) > 0.0 && s.q(1) > 0.0 {
        return Ok(None);
    }
    let mut value = 1.0;
    let mut err = 0.0;
    let mut ok = true;
    for j in 0..2 {
        let r = s.block_range(j);
        let sub = EvalPoint { x: p.x[r.clone()].to_vec(), alpha: p.alpha };
        let v = cdf_one_factorial(&sub, &OneFactorialStructure::new(s.a()[r].to_vec())?, &tol.scaled(0.5))?;
        value *= v.value;
        err += v.abs_error_estimate;
        ok &= v.converged;
    }
    Ok(Some(SeriesValue { value, abs_error_estimate: err, terms_used: 2, converged: ok }))
}

fn refine(tol: &Tolerance<f64>, mut at_level: impl FnMut(usize, usize) -> f64) -> SeriesValue<f64> {
    let mut prev = at_level(LEVELS[0].0, LEVELS[0].1);
    let mut err = f64::INFINITY;
    let mut used = LEVELS[0].0;
    for &(ny, nc) in &LEVELS[1..] {
        let v = at_level(ny, nc);
        err = (v - prev).abs();
        prev = v;
        used = ny;
        if err <= tol.target(v) {
            break;
        }
    }
    SeriesValue {
        value: prev.clamp(0.0, 1.0),
        abs_error_estimate: err,
        terms_used: used,
        converged: err <= tol.target(prev),
    }
}

/// Two-block cdf through the two-factorial form of `R`, for `α > ½`:
/// a triple integral over two gamma variables and the angle between the
/// two factor directions, whose density is `sin^{2α−2}φ / B(½, α−½)`.
///
/// Covers `ϑ > 1` up to the admissibility bound; there the second factor
/// is imaginary, the non-centralities are complex, and the angle average
/// is real by symmetry.
pub fn cdf_two_factorial(
    p: &EvalPoint,
    s: &BlockFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<SeriesValue<f64>> {
    if !(p.alpha > 0.5) {
        return Err(Error::precondition(MODULE, format!("two-factorial integral needs alpha > 1/2, got {}", p.alpha)));
    }
    check(p, s)?;
    if let Some(v) = independent_blocks(p, s, tol)? {
        return Ok(v);
    }
    let t = TwoFactorialStructure::from_two_block(s)?;
    let f = Factors::new(p, &t)?;
    if f.tables.is_empty() {
        return Ok(SeriesValue::exact(f.constant));
    }
    let alpha = p.alpha;
    let e = alpha - 1.5;
    Ok(refine(tol, |ny, nc| {
        let ry = gauss_laguerre(ny, alpha);
        let rc = gauss_jacobi(nc, e, e);
        let w: Vec<f64> = ry.ln_weights.iter().map(|l| l.exp()).collect();
        let mut total = 0.0;
        for (i, &y1) in ry.nodes.iter().enumerate() {
            if w[i] < 1e-300 {
                continue;
            }
            for (j, &y2) in ry.nodes.iter().enumerate() {
                let wij = w[i] * w[j];
                if wij < 1e-300 {
                    continue;
                }
                let cross = 2.0 * (y1 * y2).sqrt();
                let mut inner = 0.0;
                for (&c, &wc) in rc.nodes.iter().zip(&rc.weights) {
                    let v = f.product(|b1, b2| {
                        if f.imaginary {
                            Complex::new(b1 * b1 * y1 - b2 * b2 * y2, b1 * b2 * cross * c)
                        } else {
                            Complex::new(b1 * b1 * y1 + b2 * b2 * y2 + b1 * b2 * cross * c, 0.0)
                        }
                    });
                    inner += wc * v.re;
                }
                total += wij * inner;
            }
        }
        total
    }))
}

/// Two-block cdf through the two-factorial form at `α = ½`: the angle
/// density collapses onto `φ ∈ {0, π}`, leaving a Gaussian double integral
/// `π⁻¹ ∫∫ Re Π_μ G_½(x_μ/d_μ; (B_μ1 r₁ + B_μ2 r₂)²) e^{−r₁²−r₂²} dr₁ dr₂`.
pub fn cdf_two_factorial_half(
    p: &EvalPoint,
    s: &BlockFactorialStructure<f64>,
    tol: &Tolerance<f64>,
) -> Result<SeriesValue<f64>> {
    if p.alpha != 0.5 {
        return Err(Error::precondition(MODULE, format!("this form needs alpha = 1/2 exactly, got {}", p.alpha)));
    }
    check(p, s)?;
    if let Some(v) = independent_blocks(p, s, tol)? {
        return Ok(v);
    }
    let t = TwoFactorialStructure::from_two_block(s)?;
    let f = Factors::new(p, &t)?;
    if f.tables.is_empty() {
        return Ok(SeriesValue::exact(f.constant));
    }
    Ok(refine(tol, |n, _| {
        let rule = gauss_hermite::<f64>(n);
        let mut total = 0.0;
        for (&r1, &w1) in rule.nodes.iter().zip(&rule.weights) {
            for (&r2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                let v = f.product(|b1, b2| {
                    if f.imaginary {
                        Complex::new(b1 * r1, b2 * r2).powi(2)
                    } else {
                        let m = b1 * r1 + b2 * r2;
                        Complex::new(m * m, 0.0)
                    }
                });
                total += w1 * w2 * v.re;
            }
        }
        total
    }))
}
