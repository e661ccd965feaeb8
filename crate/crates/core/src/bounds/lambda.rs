use super::MODULE;
use crate::error::{Error, Result};
use crate::quad::{integrate_gamma_weighted, Tolerance};
use crate::specfun::{nc_gamma_density, NcGammaTable};

/// `λ = a + (n−4) b − (n−3) c` and its three integrals.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LambdaCriterion {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub converged: bool,
}

/// `(F, f₁, f₂)` at `y`: `F = G_α(x'; y')`, `f₁ = ∂_x G_{α+1}(x'; y')`,
/// `f₂ = ∂²_x G_{α+2}(x'; y')` with `x' = x/(1−r)`, `y' = r y/(1−r)`.
struct Parts {
    table: NcGammaTable<f64>,
    xs: f64,
    alpha: f64,
    r: f64,
}

impl Parts {
    fn at(&self, y: f64) -> (f64, f64, f64) {
        let s = 1.0 - self.r;
        let ys = self.r * y / s;
        let big_f = self.table.cdf(ys, 1e-14).value;
        let g1 = nc_gamma_density(self.alpha + 1.0, self.xs, ys);
        let g2 = nc_gamma_density(self.alpha + 2.0, self.xs, ys);
        (big_f, g1 / s, (g1 - g2) / (s * s))
    }
}

fn check(x: f64, alpha: f64, r: f64, n: usize) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(MODULE, format!("threshold must be positive, got {x}")));
    }
    if !(alpha >= 0.5) {
        return Err(Error::domain(MODULE, format!("shape must be at least 1/2, got {alpha}")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(MODULE, format!("correlation must lie in [0, 1), got {r}")));
    }
    if n < 3 {
        return Err(Error::domain(MODULE, format!("dimension must be at least 3, got {n}")));
    }
    Ok(())
}

/// Integrands of `a`, `b`, `c` (without the weight `g_α(y)`) at `y`.
fn integrands(p: &Parts, n: usize, y: f64) -> [f64; 3] {
    let (f, f1, f2) = p.at(y);
    let r = p.r;
    let pw = |k: i32| f.powi(k);
    let n = n as i32;
    [
        (p.alpha * f1 * f1 - 2.0 * r * y * f1 * f2 + 2.0 * r * r * y * y * f2 * f2) * pw(n - 2),
        r * f1 * f1 * (2.0 * r * y * f2 - f1) * pw(n - 3) * y,
        2.0 * r * r * f1.powi(4) * pw(n - 4) * y * y,
    ]
}

fn parts(x: f64, alpha: f64, r: f64) -> Result<Parts> {
    let xs = x / (1.0 - r);
    Ok(Parts { table: NcGammaTable::new(alpha, xs)?, xs, alpha, r })
}

/// Sign test for a local minimum of `R ↦ P(max X_i ≤ x)` at the
/// equicorrelated matrix with correlation `r` among matrices with the
/// same mean correlation: a local minimum if `λ > 0`.
pub fn local_min_lambda(x: f64, alpha: f64, r: f64, n: usize, tol: &Tolerance<f64>) -> Result<LambdaCriterion> {
    check(x, alpha, r, n)?;
    let p = parts(x, alpha, r)?;
    let mut out = [0.0; 3];
    let mut ok = true;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 && r == 0.0 {
            continue;
        }
        let v = integrate_gamma_weighted(|y| integrands(&p, n, y)[k], alpha, tol)?;
        ok &= v.converged;
        *slot = v.value;
    }
    let [a, b, c] = out;
    let nf = n as f64;
    Ok(LambdaCriterion { lambda: a + (nf - 4.0) * b - (nf - 3.0) * c, a, b, c, converged: ok })
}

/// Rows `(y, a-integrand, b-integrand, c-integrand, λ-integrand)` including
/// the weight `g_α(y)`, for plotting.
pub fn lambda_integrand(x: f64, alpha: f64, r: f64, n: usize, ys: &[f64]) -> Result<Vec<[f64; 5]>> {
    check(x, alpha, r, n)?;
    let p = parts(x, alpha, r)?;
    let nf = n as f64;
    Ok(ys
        .iter()
        .map(|&y| {
            let w = if y > 0.0 { crate::specfun::gamma_pdf(y, alpha).unwrap_or(0.0) } else { 0.0 };
            let [ia, ib, ic] = integrands(&p, n, y).map(|v| v * w);
            [y, ia, ib, ic, ia + (nf - 4.0) * ib - (nf - 3.0) * ic]
        })
        .collect())
}
