use mvgamma::converge::{max_rho_sq, ThetaTilde};
use mvgamma::corrstruct::{tree_structure, Assemble};
use mvgamma::engines::{
    cdf_one_factorial, cdf_three_block, cdf_tree, cdf_two_block_kernel, cdf_two_block_laguerre, cdf_two_factorial, EvalPoint,
    ThreeBlockSeriesParams, ThreeBlockVariant,
};
use mvgamma::oracle::{lt_formula, mc_cdf, mc_laplace, sample_chi_square};
use mvgamma::specfun::{nc_gamma_cdf, nc_gamma_cdf_half_integer, nc_gamma_cdf_integer_finite, nc_gamma_cdf_integer_trig, NonCentralParams};
use mvgamma::{BlockFactorialStructure, CorrelationMatrix, Matrix, OneFactorialStructure, Result, SeriesValue, Tolerance};
use serde_json::{json, Value};

use crate::Report;

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn converged(v: SeriesValue<f64>) -> Result<f64> {
    if !v.converged {
        return Err(mvgamma::Error::NonConvergence { module: "cli", msg: format!("verify: error estimate {:.3e}", v.abs_error_estimate) });
    }
    Ok(v.value)
}

fn closed_forms() -> Result<Check> {
    let q = Tolerance::new(1e-14, 1e-14, 2_000)?;
    let mut worst = 0.0f64;
    for i in 0..50 {
        // Deterministic scatter over (0, 10]².
        let x = 10.0 * ((i as f64 * 0.618_033_988_7) % 1.0) + 1e-3;
        let y = 10.0 * ((i as f64 * 0.414_213_562_4 + 0.3) % 1.0) + 1e-3;
        let series = |a: f64| -> Result<f64> { Ok(nc_gamma_cdf(&NonCentralParams::real(a, x, y)?, 1e-15)?.value.re) };
        for n in [0usize, 1, 2] {
            worst = worst.max((series(n as f64 + 0.5)? - nc_gamma_cdf_half_integer(n, x, y)?).abs());
        }
        for n in [1usize, 2, 4] {
            let s = series(n as f64)?;
            worst = worst.max((s - nc_gamma_cdf_integer_trig(n, x, y, &q)?).abs());
            worst = worst.max((s - nc_gamma_cdf_integer_finite(n, x, y, &q)?).abs());
        }
    }
    Ok(Check { name: "non-central closed forms against the Poisson series", passed: worst <= 1e-10, detail: format!("max deviation {worst:.1e}") })
}

fn two_block_engines() -> Result<Check> {
    let tol = Tolerance::default();
    let mut worst = 0.0f64;
    for (theta, alpha) in [(0.3, 1.0), (-0.6, 2.0), (0.85, 1.5)] {
        let s = BlockFactorialStructure::two_block(2, vec![0.5, 0.7, 0.4, 0.6, 0.3], theta)?;
        let p = EvalPoint::new(vec![1.2, 0.9, 1.6, 1.1, 1.4].iter().map(|v| v * alpha).collect(), alpha)?;
        let v = [
            converged(cdf_two_block_laguerre(&p, &s, &tol)?)?,
            converged(cdf_two_block_kernel(&p, &s, &tol)?)?,
            converged(cdf_two_factorial(&p, &s, &tol)?)?,
        ];
        worst = worst.max((v[0] - v[1]).abs()).max((v[0] - v[2]).abs()).max((v[1] - v[2]).abs());
    }
    Ok(Check { name: "Laguerre series, kernel integral and two-factorial integral agree", passed: worst <= 1e-5, detail: format!("max difference {worst:.1e}") })
}

fn instances() -> Result<Vec<(&'static str, CorrelationMatrix, Vec<f64>, f64, f64)>> {
    let tol = Tolerance::default();
    let mut out = Vec::new();
    let f = OneFactorialStructure::new(vec![0.3, 0.4, 0.5, 0.6, 0.7])?;
    let x = vec![2.0; 5];
    out.push(("one-factorial integral", f.assemble()?, x.clone(), 0.5, converged(cdf_one_factorial(&EvalPoint::new(x, 0.5)?, &f, &tol)?)?));
    let s = BlockFactorialStructure::two_block(2, vec![0.5, 0.6, 0.4, 0.5, 0.3], 0.6)?;
    let x = vec![1.0, 0.8, 1.2, 0.9, 1.1];
    out.push(("two-block Laguerre series", s.assemble()?, x.clone(), 0.5, converged(cdf_two_block_laguerre(&EvalPoint::new(x, 0.5)?, &s, &tol)?)?));
    let s = BlockFactorialStructure::two_block(2, vec![0.5; 4], 1.15)?;
    let x = vec![1.5; 4];
    out.push(("two-factorial integral", s.assemble()?, x.clone(), 1.0, converged(cdf_two_factorial(&EvalPoint::new(x, 1.0)?, &s, &tol)?)?));
    let s = BlockFactorialStructure::three_block([2, 2, 2], vec![0.5; 6], [0.3, 0.25, 0.2])?;
    let x = vec![1.2, 1.5, 1.0, 2.0, 1.4, 1.7];
    let params = ThreeBlockSeriesParams::new(s.clone(), Tolerance::new(1e-10, 1e-10, 2_000)?, 200, ThreeBlockVariant::Direct)?;
    out.push(("three-block Laguerre series", s.assemble()?, x.clone(), 1.0, converged(cdf_three_block(&EvalPoint::new(x, 1.0)?, &params)?)?));
    let ar = CorrelationMatrix::validate(Matrix::from_fn(3, |i, j| 0.5f64.powi((i as i32 - j as i32).abs())))?;
    let t = tree_structure(&ar, None).expect("path inverse is a tree");
    let x = vec![1.0, 1.5, 2.0];
    out.push(("tree integration", ar, x.clone(), 1.0, converged(cdf_tree(&EvalPoint::new(x, 1.0)?, &t, &tol)?)?));
    Ok(out)
}

fn against_sampler(samples: u64, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, (name, r, x, alpha, value)) in instances()?.into_iter().enumerate() {
        let nu = (2.0 * alpha).round() as usize;
        let batch = sample_chi_square(&r, nu, samples, seed.wrapping_add(k as u64))?;
        let e = mc_cdf(&batch, &x)?;
        let z = (value - e.mean) / e.std_error;
        checks.push(Check { name, passed: z.abs() <= 3.5, detail: format!("engine {value:.8}, sampler {:.8} ± {:.1e}, z {z:.2}", e.mean, e.std_error) });
        let t: Vec<f64> = (0..r.n()).map(|i| 0.1 + 0.07 * i as f64).collect();
        let l = mc_laplace(&batch, &t)?;
        let exact = lt_formula(&r, alpha, &t)?;
        let zl = (l.mean - exact) / l.std_error;
        checks.push(Check { name: "Laplace transform law", passed: zl.abs() <= 4.0, detail: format!("{name} matrix, z {zl:.2}") });
    }
    Ok(checks)
}

fn convergence_solver() -> Result<Check> {
    let mut worst = 0.0f64;
    for v in [[0.3, 0.3, 0.3], [0.95, 0.95, 0.2], [0.6, 0.1, 0.7]] {
        let m = max_rho_sq(&ThetaTilde::new(v, [0.5; 3])?, 1e-8)?;
        worst = worst.max((m.max_rho_sq - m.grid_max).abs() / m.max_rho_sq.max(1e-300));
    }
    Ok(Check { name: "convergence maximum against the grid", passed: worst <= 1e-6, detail: format!("max relative deviation {worst:.1e}") })
}

/// Runs every check; exits 1 when one of them fails.
pub(crate) fn run(samples: u64, seed: u64) -> Result<Report> {
    let mut checks = vec![closed_forms()?, two_block_engines()?];
    checks.extend(against_sampler(samples, seed)?);
    checks.push(convergence_solver()?);
    let all = checks.iter().all(|c| c.passed);
    let list: Vec<Value> = checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect();
    Ok(Report { doc: json!({ "checks": list, "all_passed": all, "samples": samples, "seed": seed }), exit: if all { 0 } else { 1 } })
}
