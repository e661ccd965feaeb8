use super::{Evaluator, InequalityCertificate, Partition, MODULE};
use crate::engines::EvalPoint;
use crate::error::{Error, Result};

fn check_inputs(ev: &dyn Evaluator, x: &EvalPoint, part: &Partition) -> Result<()> {
    if x.n() != ev.dim() || part.n() != ev.dim() {
        return Err(Error::domain(MODULE, "point, partition and evaluator differ in dimension"));
    }
    if x.alpha != ev.alpha() {
        return Err(Error::domain(MODULE, format!("point has shape {}, evaluator {}", x.alpha, ev.alpha())));
    }
    Ok(())
}

fn inputs(name: &str, ev: &dyn Evaluator, x: &[f64], extra: &str, part: &Partition) -> String {
    format!("{name};{};alpha={:?};x={x:?};{extra};blocks={:?}", ev.method().name(), ev.alpha(), part.blocks())
}

/// Evaluates `points` and certifies `g(values) ≥ 0` written as `lhs − rhs`,
/// with the uncertainty of `lhs − rhs` from the gradient of `lhs − rhs`.
fn certify(
    name: &str,
    desc: &str,
    ev: &dyn Evaluator,
    points: &[Vec<f64>],
    sides: impl Fn(&[f64]) -> (f64, f64),
) -> InequalityCertificate {
    let e = match ev.evaluate(points) {
        Ok(e) => e,
        Err(err) => return InequalityCertificate::failed(name, desc, ev.method(), &err),
    };
    let (lhs, rhs) = sides(&e.values);
    let se = if e.cov.is_some() {
        // Central differences of the margin in each probability.
        let grad: Vec<f64> = (0..e.values.len())
            .map(|i| {
                let h = 1e-6;
                let mut up = e.values.clone();
                let mut dn = e.values.clone();
                up[i] += h;
                dn[i] -= h;
                let (a, b) = sides(&up);
                let (c, d) = sides(&dn);
                ((a - b) - (c - d)) / (2.0 * h)
            })
            .collect();
        e.linear_se(&grad)
    } else {
        0.0
    };
    InequalityCertificate::new(name, desc, lhs, rhs, ev.method(), se, e.seed)
}

/// `P(∩ all A_i) ≥ P(∩_{block 1} A_i) · P(∩_{block 2} A_i)`.
pub fn check_orthant_inequality(ev: &dyn Evaluator, x: &EvalPoint, part: &Partition) -> Result<InequalityCertificate> {
    check_inputs(ev, x, part)?;
    if part.blocks().len() != 2 {
        return Err(Error::domain(MODULE, "orthant inequality needs a two-block partition"));
    }
    let points = vec![x.x.clone(), part.keep(&x.x, &[0]), part.keep(&x.x, &[1])];
    let desc = inputs("orthant", ev, &x.x, "", part);
    Ok(certify("orthant", &desc, ev, &points, |v| (v[0], v[1] * v[2])))
}

/// The truncated ratio inequality in cross-multiplied form:
/// `P(A) P(B_I) P(B_{∉I}) ≥ P(B) P(A_I) P(A_{∉I})` with `A_i = {X_i ≤ x_i}`,
/// `B_i = {X_i ≤ b_i}`, `x ≤ b`.
pub fn check_truncated_ratio(ev: &dyn Evaluator, x: &EvalPoint, b: &[f64], part: &Partition) -> Result<InequalityCertificate> {
    check_inputs(ev, x, part)?;
    if part.blocks().len() != 2 {
        return Err(Error::domain(MODULE, "ratio inequality needs a two-block partition"));
    }
    if b.len() != x.n() {
        return Err(Error::domain(MODULE, "truncation vector has the wrong dimension"));
    }
    if let Some(i) = (0..x.n()).find(|&i| !(x.x[i] <= b[i])) {
        return Err(Error::precondition(MODULE, format!("x_{0} = {1} exceeds b_{0} = {2}", i + 1, x.x[i], b[i])));
    }
    let points = vec![
        x.x.clone(),
        part.keep(&x.x, &[0]),
        part.keep(&x.x, &[1]),
        b.to_vec(),
        part.keep(b, &[0]),
        part.keep(b, &[1]),
    ];
    let desc = inputs("truncated_ratio", ev, &x.x, &format!("b={b:?}"), part);
    Ok(certify("truncated_ratio", &desc, ev, &points, |v| (v[0] * v[4] * v[5], v[3] * v[1] * v[2])))
}

/// For blocks `A, B, C` of a three-block partition: the cancelling
/// inequality `P(ABC) P(A) ≥ P(AB) P(AC)` and
/// `P(ABC) + P(A)P(B)P(C) ≥ P(AB)P(C) + P(AC)P(B)`.
pub fn check_three_event_inequalities(
    ev: &dyn Evaluator,
    x: &EvalPoint,
    part: &Partition,
) -> Result<(InequalityCertificate, InequalityCertificate)> {
    check_inputs(ev, x, part)?;
    if part.blocks().len() != 3 {
        return Err(Error::domain(MODULE, "three-event inequalities need a three-block partition"));
    }
    // ABC, AB, AC, A, B, C
    let points = vec![
        x.x.clone(),
        part.keep(&x.x, &[0, 1]),
        part.keep(&x.x, &[0, 2]),
        part.keep(&x.x, &[0]),
        part.keep(&x.x, &[1]),
        part.keep(&x.x, &[2]),
    ];
    let e = match ev.evaluate(&points) {
        Ok(e) => e,
        Err(err) => {
            let d = inputs("three_event", ev, &x.x, "", part);
            return Ok((
                InequalityCertificate::failed("cancelling", &d, ev.method(), &err),
                InequalityCertificate::failed("three_event_sum", &d, ev.method(), &err),
            ));
        }
    };
    let fixed = FixedEvaluator { inner: ev, e };
    let c1 = certify("cancelling", &inputs("cancelling", ev, &x.x, "", part), &fixed, &points, |v| {
        (v[0] * v[3], v[1] * v[2])
    });
    let c2 = certify("three_event_sum", &inputs("three_event_sum", ev, &x.x, "", part), &fixed, &points, |v| {
        (v[0] + v[3] * v[4] * v[5], v[1] * v[5] + v[2] * v[4])
    });
    Ok((c1, c2))
}

/// Replays one evaluation, so both three-event certificates share draws.
struct FixedEvaluator<'a> {
    inner: &'a dyn Evaluator,
    e: super::Evaluation,
}

impl super::Evaluator for FixedEvaluator<'_> {
    fn method(&self) -> super::Method {
        self.inner.method()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }
    fn evaluate(&self, _: &[Vec<f64>]) -> Result<super::Evaluation> {
        Ok(self.e.clone())
    }
}

/// Grid of values per coordinate, with the base point for the coordinates
/// not being varied.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PairGrid {
    pub base: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PairGrid {
    /// `m` equally spaced values on `[lo_i, hi_i]` for every coordinate.
    pub fn uniform(base: Vec<f64>, lo: &[f64], hi: &[f64], m: usize) -> Result<Self> {
        if lo.len() != base.len() || hi.len() != base.len() || m < 2 {
            return Err(Error::domain(MODULE, "grid needs one range per coordinate and at least 2 values"));
        }
        let values = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| (0..m).map(|k| l + (h - l) * k as f64 / (m - 1) as f64).collect())
            .collect();
        Ok(PairGrid { base, values })
    }
}

/// A negative mixed second difference of `log F`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Mtp2Violation {
    pub pair: (usize, usize),
    pub cell: (usize, usize),
    pub mixed_difference: f64,
}

/// Mixed second differences `Δ_i Δ_j log F` over every grid cell of every
/// coordinate pair; returns those below `−tol`.
pub fn mtp2_grid_check(ev: &dyn Evaluator, grid: &PairGrid, tol: f64) -> Result<Vec<Mtp2Violation>> {
    if !ev.is_deterministic() {
        return Err(Error::precondition(MODULE, "grid check needs a deterministic evaluator"));
    }
    let n = ev.dim();
    if grid.base.len() != n || grid.values.len() != n {
        return Err(Error::domain(MODULE, "grid and evaluator differ in dimension"));
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (gi, gj) = (&grid.values[i], &grid.values[j]);
            let mut points = Vec::with_capacity(gi.len() * gj.len());
            for &u in gi {
                for &v in gj {
                    let mut p = grid.base.clone();
                    p[i] = u;
                    p[j] = v;
                    points.push(p);
                }
            }
            let e = ev.evaluate(&points)?;
            let lf = |k: usize, l: usize| e.values[k * gj.len() + l].ln();
            for k in 0..gi.len() - 1 {
                for l in 0..gj.len() - 1 {
                    let d = lf(k + 1, l + 1) - lf(k + 1, l) - lf(k, l + 1) + lf(k, l);
                    if d < -tol || d.is_nan() {
                        out.push(Mtp2Violation { pair: (i, j), cell: (k, l), mixed_difference: d });
                    }
                }
            }
        }
    }
    Ok(out)
}
