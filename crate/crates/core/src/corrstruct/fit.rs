use super::structures::{BlockFactorialStructure, OneFactorialStructure};
use super::{CorrelationMatrix, MODULE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

/// Magnitudes `|a_μ|` from the product heuristic
/// `ln|a_μ| = (Σ_{ν≠μ} ln|r_{μν}| − (Σ_{μ<ν} ln|r_{μν}|)/(n−1))/(n−2)`, exact
/// on one-factorial inputs with non-zero entries. `None` if some entry is 0.
fn product_heuristic<T: Real>(m: &Matrix<T>, idx: &[usize]) -> Option<Vec<T>> {
    let n = idx.len();
    debug_assert!(n >= 3);
    let ln = |i: usize, j: usize| {
        let v = m[(idx[i], idx[j])].abs();
        (v > T::zero()).then(|| v.ln())
    };
    let mut total = T::zero();
    let mut rows = vec![T::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let l = ln(i, j)?;
            total += l;
            rows[i] += l;
            rows[j] += l;
        }
    }
    let n1 = T::of(n - 1);
    let n2 = T::of(n - 2);
    Some(rows.iter().map(|&r| ((r - total / n1) / n2).exp()).collect())
}

/// Magnitudes from `a_μ² = |r_{μν} r_{μλ}/r_{νλ}|`, averaged over all
/// admissible pairs; used when zero entries defeat the product heuristic.
fn triple_heuristic<T: Real>(m: &Matrix<T>) -> Vec<T> {
    let n = m.n();
    let floor = T::lit(1e-300).max(T::min_positive_value());
    (0..n)
        .map(|mu| {
            let mut sum = T::zero();
            let mut count = 0usize;
            for nu in 0..n {
                for la in 0..nu {
                    if nu == mu || la == mu || m[(nu, la)].abs() <= floor {
                        continue;
                    }
                    sum += (m[(mu, nu)] * m[(mu, la)] / m[(nu, la)]).abs();
                    count += 1;
                }
            }
            if count == 0 {
                T::zero()
            } else {
                (sum / T::of(count)).sqrt()
            }
        })
        .collect()
}

/// Factors `a` with `|r_{ij} − a_i a_j| ≤ tol` for all `i ≠ j`, if such a
/// one-factorial representation with `|a_μ| < 1` exists.
pub fn one_factorial_exact<T: Real>(r: &CorrelationMatrix<T>, tol: T) -> Option<OneFactorialStructure<T>> {
    let m = r.matrix();
    let n = r.n();
    let mag = match n {
        1 => vec![T::zero()],
        2 => vec![m[(0, 1)].abs().sqrt(); 2],
        _ => {
            let idx: Vec<usize> = (0..n).collect();
            product_heuristic(m, &idx).unwrap_or_else(|| triple_heuristic(m))
        }
    };
    // Signs: anchor on the coordinate with the largest factor.
    let anchor = (0..n).max_by(|&i, &j| mag[i].partial_cmp(&mag[j]).unwrap()).unwrap_or(0);
    let a: Vec<T> = (0..n)
        .map(|mu| {
            if mu == anchor || m[(mu, anchor)] >= T::zero() {
                mag[mu]
            } else {
                -mag[mu]
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - a[i] * a[j]).abs() > tol {
                return None;
            }
        }
    }
    OneFactorialStructure::new(a).ok()
}

/// Which constraints of a fitted block structure are tight.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlackReport<T> {
    /// Scale `λ_j` applied to each block so that `λ_j a_μ a_ν ≤ r_{μν}`.
    pub block_scale: Vec<T>,
    /// Pairs `(μ, ν)`, `μ < ν`, where the fitted entry equals `r_{μν}`.
    pub binding: Vec<(usize, usize)>,
    /// Cross-block factors that hit the cap 1.
    pub capped_theta: Vec<(usize, usize)>,
    /// `max_{μ≠ν} (r_{μν} − fitted_{μν})`, never negative.
    pub max_slack: T,
}

/// Fits factors per block and the largest cross factors they admit.
///
/// Blocks of size ≥ 3 use the product heuristic, a block of size 2 takes
/// `a_μ = a_ν = √r_{μν}` and a singleton `a_μ = √max_ν r_{μν}` capped at
/// 0.99. Each block is then scaled by `λ_j = min r_{μν}/(a_μ a_ν)` over the
/// block, and `ϑ_{jk} = min{r_{μν}/(a_μ a_ν) : μ∈I_j, ν∈I_k}` capped at 1.
/// The fitted matrix is dominated entrywise by `R`.
pub fn fit_block_factors<T: Real>(
    r: &CorrelationMatrix<T>,
    block_sizes: &[usize],
) -> Result<(BlockFactorialStructure<T>, SlackReport<T>)> {
    let n = r.n();
    let m = r.matrix();
    if block_sizes.iter().sum::<usize>() != n {
        return Err(Error::domain(MODULE, "block sizes do not add up to the dimension"));
    }
    for i in 0..n {
        for j in 0..i {
            if !(m[(i, j)] > T::zero()) {
                return Err(Error::precondition(
                    MODULE,
                    format!("factor fitting is infeasible: r({},{}) = {} is not positive", i + 1, j + 1, m[(i, j)]),
                ));
            }
        }
    }
    let cap = T::lit(0.99);
    let mut a = vec![T::zero(); n];
    let mut block_scale = Vec::new();
    let mut start = 0;
    for &size in block_sizes {
        let idx: Vec<usize> = (start..start + size).collect();
        let raw: Vec<T> = match size {
            1 => {
                let mu = idx[0];
                let best = (0..n).filter(|&nu| nu != mu).map(|nu| m[(mu, nu)]).fold(T::zero(), T::max);
                vec![best.sqrt().min(cap)]
            }
            2 => vec![m[(idx[0], idx[1])].sqrt(); 2],
            _ => product_heuristic(m, &idx).expect("entries checked positive"),
        };
        let mut lam = T::infinity();
        for i in 0..size {
            for j in 0..i {
                lam = lam.min(m[(idx[i], idx[j])] / (raw[i] * raw[j]));
            }
        }
        if !lam.is_finite() {
            lam = T::one();
        }
        let root = lam.sqrt();
        for (k, &mu) in idx.iter().enumerate() {
            a[mu] = (root * raw[k]).min(cap);
        }
        block_scale.push(lam);
        start += size;
    }
    let p = block_sizes.len();
    let mut theta = Matrix::identity(p);
    let mut capped_theta = Vec::new();
    let ranges: Vec<std::ops::Range<usize>> = {
        let mut s = 0;
        block_sizes
            .iter()
            .map(|&k| {
                s += k;
                s - k..s
            })
            .collect()
    };
    for j in 0..p {
        for k in 0..j {
            let mut t = T::infinity();
            for mu in ranges[j].clone() {
                for nu in ranges[k].clone() {
                    t = t.min(m[(mu, nu)] / (a[mu] * a[nu]));
                }
            }
            if t >= T::one() {
                t = T::one();
                capped_theta.push((k, j));
            }
            theta[(j, k)] = t;
            theta[(k, j)] = t;
        }
    }
    let s = BlockFactorialStructure::new(block_sizes.to_vec(), a, theta)?;
    let fitted = super::structures::Assemble::assembled_matrix(&s);
    let mut binding = Vec::new();
    let mut max_slack = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let slack = m[(i, j)] - fitted[(i, j)];
            max_slack = max_slack.max(slack);
            if slack.abs() <= T::lit(1e-12).max(T::lit(16.0) * T::epsilon()) {
                binding.push((i, j));
            }
        }
    }
    Ok((s, SlackReport { block_scale, binding, capped_theta, max_slack }))
}
