//! Convergence of the three-block characteristic-function series: the
//! modulus `ρ²` of its expansion variable on the circles swept by the
//! complex block variables, a sufficient condition for `max ρ² < 1`, and
//! the maximum itself from the stationary-point equations with a grid
//! cross-check.

use num_traits::Num;
use rayon::prelude::*;

use crate::corrstruct::BlockFactorialStructure;
use crate::error::{Error, Result};
use crate::real::Real;

const MODULE: &str = "converge";

/// Points per axis of the cross-check grid over `γ ∈ (−π/2, π/2)³`.
pub const GRID_POINTS: usize = 60;
const SCAN_POINTS: usize = 256;

/// `ϑ̃_i = ϑ_{jk} √(d_j d_k)` together with the block radii `d`.
///
/// Index convention: `values[0]` pairs blocks 2 and 3, `values[1]` blocks
/// 1 and 3, `values[2]` blocks 1 and 2.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ThetaTilde<T> {
    pub values: [T; 3],
    pub d: [T; 3],
}

impl<T: Clone + Num + PartialOrd> ThetaTilde<T> {
    /// Checks `ϑ̃_i ≥ 0` and `d_j ∈ [0, 1)`.
    pub fn new(values: [T; 3], d: [T; 3]) -> Result<Self> {
        if values.iter().any(|v| *v < T::zero()) {
            return Err(Error::domain(MODULE, "scaled correlations must be non-negative"));
        }
        if d.iter().any(|v| *v < T::zero() || *v >= T::one()) {
            return Err(Error::domain(MODULE, "block radii must lie in [0, 1)"));
        }
        Ok(ThetaTilde { values, d })
    }

    /// `1 − |Θ̃| = Σ ϑ̃_j² − 2 ϑ̃₁ϑ̃₂ϑ̃₃`, where `Θ̃` has unit diagonal and
    /// off-diagonal entries `ϑ̃`.
    pub fn scalar(&self) -> T {
        let [a, b, c] = self.values.clone();
        let two = T::one() + T::one();
        a.clone() * a.clone() + b.clone() * b.clone() + c.clone() * c.clone() - two * a * b * c
    }
}

impl<T: Real> ThetaTilde<T> {
    /// Scaled correlations of a three-block structure. Negative `ϑ` are
    /// rejected: the circles argument assumes non-negative block coupling.
    pub fn from_structure(s: &BlockFactorialStructure<T>) -> Result<Self> {
        if s.p() != 3 {
            return Err(Error::domain(MODULE, "convergence analysis needs exactly three blocks"));
        }
        let d = d_values(s);
        let th = s.theta_triple();
        let pair = [(1, 2), (0, 2), (0, 1)];
        let mut values = [T::zero(); 3];
        for i in 0..3 {
            let (j, k) = pair[i];
            values[i] = th[i] * (d[j] * d[k]).sqrt();
        }
        ThetaTilde::new(values, d)
    }
}

/// `d = q/(1+q)` with `q = Σ a_μ²/(1−a_μ²)` over one block.
pub fn block_radius<T: Clone + Num>(a: &[T]) -> T {
    let mut q = T::zero();
    for v in a {
        let a2 = v.clone() * v.clone();
        q = q + a2.clone() / (T::one() - a2);
    }
    q.clone() / (T::one() + q)
}

/// Radii `d_j` of the three blocks.
pub fn d_values<T: Real>(s: &BlockFactorialStructure<T>) -> [T; 3] {
    let mut d = [T::zero(); 3];
    for (j, v) in d.iter_mut().enumerate().take(s.p().min(3)) {
        *v = block_radius(s.block_a(j));
    }
    d
}

/// `ρ²(t) = (ϑ̃² + (Σ ϑ̃_j² t_j)²) / Π (1 + t_j²)` with `t_j = tan γ_j`.
pub fn rho_sq<T: Real>(t: [T; 3], tt: &ThetaTilde<T>) -> T {
    let s = tt.scalar();
    let lin: T = (0..3).map(|j| tt.values[j] * tt.values[j] * t[j]).sum();
    let den = t.iter().fold(T::one(), |acc, &v| acc * (T::one() + v * v));
    (s * s + lin * lin) / den
}

/// Denominator minus numerator of `ρ²(t)` as the quartic in `t`; positive
/// exactly where `ρ² < 1`.
pub fn rho_gap<T: Real>(t: [T; 3], tt: &ThetaTilde<T>) -> T {
    let s = tt.scalar();
    let q: [T; 3] = std::array::from_fn(|j| tt.values[j] * tt.values[j]);
    let two = T::lit(2.0);
    let mut v = T::one() - s * s;
    for j in 0..3 {
        v += (T::one() - q[j] * q[j]) * t[j] * t[j];
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        v += t[i] * t[i] * t[j] * t[j] - two * q[i] * q[j] * t[i] * t[j];
    }
    v + (t[0] * t[1] * t[2]).powi(2)
}

/// `Σ ϑ̃_j⁴ ≤ 1`: the quadratic part of [`rho_gap`] is positive
/// semi-definite, hence `max ρ² < 1`.
pub fn sufficient_condition<T: Clone + Num + PartialOrd>(tt: &ThetaTilde<T>) -> bool {
    let mut s = T::zero();
    for v in &tt.values {
        let v2 = v.clone() * v.clone();
        s = s + v2.clone() * v2;
    }
    s <= T::one()
}

/// Where the maximum of `ρ²` was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxRhoBranch {
    /// All three `t_j` non-zero.
    Interior,
    /// One `t_k = 0`.
    BoundaryTkZero,
    Origin,
    /// Only the grid search located the maximum.
    Grid,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MaxRhoResult {
    pub max_rho_sq: f64,
    pub argmax_t: [f64; 3],
    pub branch: MaxRhoBranch,
    /// Stationary-point value and grid maximum agree within the tolerance.
    pub converged: bool,
    pub grid_max: f64,
}

/// `t_j = τ ϑ̃_j² / c_j²` with `c_j² = ½(1 + √(1 − 4τ²ϑ̃_j⁴))`, `x = τ²`.
fn t_from_x(x: f64, q: [f64; 3], skip: Option<usize>) -> [f64; 3] {
    let tau = x.sqrt();
    std::array::from_fn(|j| {
        if Some(j) == skip {
            return 0.0;
        }
        let c2 = 0.5 * (1.0 + (1.0 - 4.0 * x * q[j] * q[j]).max(0.0).sqrt());
        tau * q[j] / c2
    })
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Sign changes of `f` on `(lo, hi)`, each refined by bisection.
fn roots_on(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(hi > lo) {
        return out;
    }
    let step = (hi - lo) / SCAN_POINTS as f64;
    let mut a = lo + step * 1e-9;
    let mut fa = f(a);
    for i in 1..=SCAN_POINTS {
        let b = if i == SCAN_POINTS { hi } else { lo + step * i as f64 };
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if (fa < 0.0) != (fb < 0.0) {
            out.push(bisect(f, a, b));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        out.push(hi);
    }
    out
}

/// Solutions in `x ∈ (0, x₁]` of `m − Σ_{j∈J} √(1 − 4ϑ̃_j⁴x) − sgn(x − x₀)√(1 − 4ϑ̃²x) = 0`,
/// `x₀` the solution of `Σ_{j∈J} √(1 − 4ϑ̃_j⁴x₀) = m`, solved separately on
/// both sides of `x₀`.
fn stationary_x(q: [f64; 3], s: f64, active: &[usize], m: f64) -> Vec<f64> {
    let x1 = 0.25 / (s * s);
    let root_sum = |x: f64| -> f64 { active.iter().map(|&j| (1.0 - 4.0 * q[j] * q[j] * x).max(0.0).sqrt()).sum() };
    let x0 = if root_sum(x1) - m > 0.0 { f64::INFINITY } else { bisect(&|x| root_sum(x) - m, 0.0, x1) };
    let disc = |x: f64| (1.0 - 4.0 * s * s * x).max(0.0).sqrt();
    let below = |x: f64| m - root_sum(x) + disc(x);
    let above = |x: f64| m - root_sum(x) - disc(x);
    let mut xs = roots_on(&below, 0.0, x0.min(x1));
    if x0 < x1 {
        xs.extend(roots_on(&above, x0, x1));
    }
    xs
}

/// Largest `ρ²` on the cross-check grid, refined by a pattern search in `γ`.
fn grid_max(tt: &ThetaTilde<f64>) -> (f64, [f64; 3]) {
    let h = std::f64::consts::PI / GRID_POINTS as f64;
    let gamma = |i: usize| -std::f64::consts::FRAC_PI_2 + (i as f64 + 0.5) * h;
    let rho = |g: [f64; 3]| rho_sq([g[0].tan(), g[1].tan(), g[2].tan()], tt);
    let (best, arg) = (0..GRID_POINTS)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, [0.0; 3]);
            for j in 0..GRID_POINTS {
                for k in 0..GRID_POINTS {
                    let g = [gamma(i), gamma(j), gamma(k)];
                    let v = rho(g);
                    if v > best.0 {
                        best = (v, g);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, [0.0; 3]), |a, b| if b.0 > a.0 { b } else { a });
    let mut g = arg;
    let mut v = best;
    let mut step = h;
    while step > 1e-10 {
        let mut moved = false;
        for axis in 0..3 {
            for dir in [-1.0, 1.0] {
                let mut trial = g;
                trial[axis] = (trial[axis] + dir * step).clamp(-1.5707963267, 1.5707963267);
                let tv = rho(trial);
                if tv > v {
                    v = tv;
                    g = trial;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (v, [g[0].tan(), g[1].tan(), g[2].tan()])
}

/// `max ρ²` over `t ∈ ℝ³`.
///
/// Candidates are the origin, the interior stationary points and the
/// boundary stationary points with one `t_k = 0` (every `k` is tried). The
/// best candidate is compared with a grid search; when they differ by more
/// than `tol` (relative) the larger value is reported with
/// `converged = false`.
pub fn max_rho_sq(tt: &ThetaTilde<f64>, tol: f64) -> Result<MaxRhoResult> {
    if tt.values.iter().any(|v| !(*v >= 0.0 && *v < 1.0)) {
        return Err(Error::domain(MODULE, "scaled correlations must lie in [0, 1)"));
    }
    let s = tt.scalar();
    let mut best = (rho_sq([0.0; 3], tt), [0.0; 3], MaxRhoBranch::Origin);
    if s > 0.0 {
        let q = std::array::from_fn(|j| tt.values[j] * tt.values[j]);
        let mut consider = |t: [f64; 3], branch| {
            let v = rho_sq(t, tt);
            if v > best.0 {
                best = (v, t, branch);
            }
        };
        for x in stationary_x(q, s, &[0, 1, 2], 2.0) {
            consider(t_from_x(x, q, None), MaxRhoBranch::Interior);
        }
        for k in 0..3 {
            let active: Vec<usize> = (0..3).filter(|&j| j != k).collect();
            for x in stationary_x(q, s, &active, 1.0) {
                consider(t_from_x(x, q, Some(k)), MaxRhoBranch::BoundaryTkZero);
            }
        }
    }
    let (gv, gt) = grid_max(tt);
    let agree = (gv - best.0).abs() <= tol * best.0.max(gv).max(1e-300) || gv <= best.0;
    let (value, arg, branch) = if agree { best } else { (gv, gt, MaxRhoBranch::Grid) };
    Ok(MaxRhoResult { max_rho_sq: value, argmax_t: arg, branch, converged: agree, grid_max: gv })
}
