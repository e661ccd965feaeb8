use super::MODULE;
use crate::corrstruct::{one_factorial_exact, CorrelationMatrix};
use crate::engines::{cdf_one_factorial, EvalPoint};
use crate::error::{Error, Result};
use crate::oracle::{mc_mean, sample_chi_square};
use crate::quad::Tolerance;
use crate::specfun::gamma_cdf;

/// Upper bound for `P(∪ Ā_i)` from a refined Bonferroni chain.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BonferroniBound {
    pub upper: f64,
    pub std_error: f64,
    /// The first two terms, computed without sampling.
    pub exact_terms: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

/// `P(Ā_{π1}) + P(Ā_{π2} A_{π1}) + Σ_{k≥3} P(Ā_{πk} A_{π(k−1)} … A_{π(k−order+1)})`
/// with `A_i = {X_i ≤ x_i}` under `Γ_n(α, R)`, `2α ∈ ℕ`.
///
/// The first term is a gamma tail and the second comes from the bivariate
/// (one-factorial) engine; the remaining terms are estimated together from
/// one chi-square sample of size `budget`.
pub fn bonferroni_refined(
    x: &EvalPoint,
    r: &CorrelationMatrix<f64>,
    order: usize,
    perm: &[usize],
    budget: u64,
    seed: u64,
) -> Result<BonferroniBound> {
    let n = r.n();
    if !(3..=4).contains(&order) {
        return Err(Error::domain(MODULE, format!("order must be 3 or 4, got {order}")));
    }
    if x.n() != n || perm.len() != n {
        return Err(Error::domain(MODULE, "point, matrix and permutation differ in dimension"));
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::domain(MODULE, "not a permutation of the coordinates"));
        }
    }
    let nu = 2.0 * x.alpha;
    if (nu - nu.round()).abs() > 1e-12 || nu.round() < 1.0 {
        return Err(Error::precondition(MODULE, format!("sampling needs 2*alpha a positive integer, got {nu}")));
    }
    let xp: Vec<f64> = perm.iter().map(|&i| x.x[i]).collect();
    let mut exact = vec![1.0 - gamma_cdf(xp[0], x.alpha)?];
    if n >= 2 {
        let pair = r.submatrix(&[perm[0], perm[1]]);
        let f = one_factorial_exact(&pair, 1e-12).expect("2x2 correlation matrices are one-factorial");
        let joint = cdf_one_factorial(&EvalPoint::new(vec![xp[0], xp[1]], x.alpha)?, &f, &Tolerance::default())?;
        exact.push(gamma_cdf(xp[0], x.alpha)? - joint.value);
    }
    let (mut mean, mut se) = (0.0, 0.0);
    if n >= 3 {
        let batch = sample_chi_square(r, nu.round() as usize, budget, seed)?;
        let est = mc_mean(&batch, |row| {
            let mut hits = 0u32;
            for k in 2..n {
                if row[perm[k]] > xp[k] && (k + 1 - order.min(k + 1)..k).all(|l| row[perm[l]] <= xp[l]) {
                    hits += 1;
                }
            }
            f64::from(hits)
        });
        mean = est.mean;
        se = est.std_error;
    }
    Ok(BonferroniBound { upper: exact.iter().sum::<f64>() + mean, std_error: se, exact_terms: exact, samples: budget, seed })
}
