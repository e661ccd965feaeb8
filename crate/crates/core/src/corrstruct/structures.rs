use std::ops::Range;

use super::{CorrelationMatrix, MODULE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

/// Builds the correlation matrix a structure describes.
pub trait Assemble<T: Real> {
    /// Entries as given by the structure, without validation.
    fn assembled_matrix(&self) -> Matrix<T>;

    fn assemble(&self) -> Result<CorrelationMatrix<T>> {
        CorrelationMatrix::validate(self.assembled_matrix())
    }
}

/// `R = D + a a'` with `D = Diag(1 − a_μ²)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OneFactorialStructure<T> {
    a: Vec<T>,
}

impl<T: Real> OneFactorialStructure<T> {
    pub fn new(a: Vec<T>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::domain(MODULE, "factor vector is empty"));
        }
        if let Some(v) = a.iter().find(|v| !(v.abs() < T::one())) {
            return Err(Error::domain(MODULE, format!("factor {v} outside (-1, 1)")));
        }
        Ok(OneFactorialStructure { a })
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn d(&self) -> Vec<T> {
        self.a.iter().map(|&v| T::one() - v * v).collect()
    }
}

impl<T: Real> Assemble<T> for OneFactorialStructure<T> {
    fn assembled_matrix(&self) -> Matrix<T> {
        let a = &self.a;
        Matrix::from_fn(a.len(), |i, j| if i == j { T::one() } else { a[i] * a[j] })
    }
}

/// Consecutive index blocks `I_1, …, I_p` (p = 2 or 3) with
/// `r_{μν} = a_μ a_ν` inside a block and `ϑ_{ij} a_μ a_ν` across blocks.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BlockFactorialStructure<T> {
    block_sizes: Vec<usize>,
    a: Vec<T>,
    theta: Matrix<T>,
}

impl<T: Real> BlockFactorialStructure<T> {
    pub fn new(block_sizes: Vec<usize>, a: Vec<T>, theta: Matrix<T>) -> Result<Self> {
        let p = block_sizes.len();
        if !(2..=3).contains(&p) {
            return Err(Error::domain(MODULE, format!("block structure needs 2 or 3 blocks, got {p}")));
        }
        if block_sizes.contains(&0) {
            return Err(Error::domain(MODULE, "empty index block"));
        }
        if block_sizes.iter().sum::<usize>() != a.len() {
            return Err(Error::domain(MODULE, "block sizes do not add up to the factor vector length"));
        }
        if let Some(v) = a.iter().find(|v| !(**v >= T::zero() && **v < T::one())) {
            return Err(Error::domain(MODULE, format!("factor {v} outside [0, 1)")));
        }
        if theta.n() != p {
            return Err(Error::domain(MODULE, "block correlation matrix has the wrong size"));
        }
        let tol = T::lit(1e-12).max(T::lit(8.0) * T::epsilon());
        for i in 0..p {
            if (theta[(i, i)] - T::one()).abs() > tol {
                return Err(Error::domain(MODULE, "block correlation matrix must have unit diagonal"));
            }
            for j in 0..i {
                if !theta[(i, j)].is_finite() || (theta[(i, j)] - theta[(j, i)]).abs() > tol {
                    return Err(Error::domain(MODULE, "block correlation matrix must be symmetric"));
                }
            }
        }
        Ok(BlockFactorialStructure { block_sizes, a, theta })
    }

    /// Two blocks, the first of size `n1`, cross factor `ϑ`.
    pub fn two_block(n1: usize, a: Vec<T>, theta: T) -> Result<Self> {
        let n2 = a.len().saturating_sub(n1);
        let th = Matrix::from_fn(2, |i, j| if i == j { T::one() } else { theta });
        Self::new(vec![n1, n2], a, th)
    }

    /// Three blocks with `ϑ₁ = ϑ_{23}`, `ϑ₂ = ϑ_{13}`, `ϑ₃ = ϑ_{12}`.
    pub fn three_block(sizes: [usize; 3], a: Vec<T>, theta: [T; 3]) -> Result<Self> {
        let [t1, t2, t3] = theta;
        let th = Matrix::from_rows(&[
            vec![T::one(), t3, t2],
            vec![t3, T::one(), t1],
            vec![t2, t1, T::one()],
        ])?;
        Self::new(sizes.to_vec(), a, th)
    }

    pub fn p(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn theta(&self) -> &Matrix<T> {
        &self.theta
    }

    /// Cross factor of a two-block structure.
    pub fn theta12(&self) -> T {
        self.theta[(0, 1)]
    }

    /// `(ϑ_{23}, ϑ_{13}, ϑ_{12})` of a three-block structure.
    pub fn theta_triple(&self) -> [T; 3] {
        [self.theta[(1, 2)], self.theta[(0, 2)], self.theta[(0, 1)]]
    }

    pub fn block_range(&self, j: usize) -> Range<usize> {
        let start: usize = self.block_sizes[..j].iter().sum();
        start..start + self.block_sizes[j]
    }

    pub fn block_a(&self, j: usize) -> &[T] {
        &self.a[self.block_range(j)]
    }

    /// Block index of coordinate `mu`.
    pub fn block_of(&self, mu: usize) -> usize {
        let mut acc = 0;
        for (j, &s) in self.block_sizes.iter().enumerate() {
            acc += s;
            if mu < acc {
                return j;
            }
        }
        panic!("index {mu} outside the structure")
    }

    /// `q_j = Σ_{μ∈I_j} a_μ²/(1 − a_μ²)`.
    pub fn q(&self, j: usize) -> T {
        self.block_a(j).iter().map(|&v| v * v / (T::one() - v * v)).sum()
    }

    /// `b_μ = a_μ/√(1 − a_μ²)`.
    pub fn b(&self) -> Vec<T> {
        self.a.iter().map(|&v| v / (T::one() - v * v).sqrt()).collect()
    }

    pub fn d(&self) -> Vec<T> {
        self.a.iter().map(|&v| T::one() - v * v).collect()
    }

    /// Same factors with another block correlation matrix.
    pub fn with_theta(&self, theta: Matrix<T>) -> Result<Self> {
        Self::new(self.block_sizes.clone(), self.a.clone(), theta)
    }

    /// Supremum of `ϑ` for which the two-block matrix stays positive definite:
    /// `((1 + q₁⁻¹)(1 + q₂⁻¹))^{1/2}`.
    pub fn two_block_theta_bound(&self) -> T {
        let (q1, q2) = (self.q(0), self.q(1));
        ((T::one() + q1.recip()) * (T::one() + q2.recip())).sqrt()
    }
}

impl<T: Real> Assemble<T> for BlockFactorialStructure<T> {
    fn assembled_matrix(&self) -> Matrix<T> {
        let a = &self.a;
        let blk: Vec<usize> = (0..a.len()).map(|m| self.block_of(m)).collect();
        Matrix::from_fn(a.len(), |i, j| {
            if i == j {
                T::one()
            } else {
                self.theta[(blk[i], blk[j])] * a[i] * a[j]
            }
        })
    }
}

/// Closed-form inverse of a two-block matrix.
///
/// With `b_μ = a_μ/√d_μ` and `Δ = (1+q₁)(1+q₂) − q₁q₂ϑ²`,
/// `R⁻¹ = D^{−1/2}(I − Σ_{ij} m_{ij} b_i b_j') D^{−1/2}` where
/// `m₁₁ = (1 + q₂(1−ϑ²))/Δ`, `m₂₂ = (1 + q₁(1−ϑ²))/Δ`, `m₁₂ = ϑ/Δ`.
pub fn two_block_inverse<T: Real>(s: &BlockFactorialStructure<T>) -> Result<Matrix<T>> {
    if s.p() != 2 {
        return Err(Error::domain(MODULE, "two-block inverse needs exactly two blocks"));
    }
    let th = s.theta12();
    let (q1, q2) = (s.q(0), s.q(1));
    let t2 = th * th;
    let delta = (T::one() + q1) * (T::one() + q2) - q1 * q2 * t2;
    if !(delta > T::zero()) {
        return Err(Error::domain(
            MODULE,
            format!("cross factor {th} outside the admissible range (bound {})", s.two_block_theta_bound()),
        ));
    }
    let m = [
        [(T::one() + q2 * (T::one() - t2)) / delta, th / delta],
        [th / delta, (T::one() + q1 * (T::one() - t2)) / delta],
    ];
    let b = s.b();
    let d = s.d();
    let blk: Vec<usize> = (0..s.n()).map(|mu| s.block_of(mu)).collect();
    Ok(Matrix::from_fn(s.n(), |i, j| {
        let delta_ij = if i == j { T::one() } else { T::zero() };
        (delta_ij - m[blk[i]][blk[j]] * b[i] * b[j]) / (d[i] * d[j]).sqrt()
    }))
}

/// Eigenvalues `λ±` of `[[q₁, ϑ√(q₁q₂)], [ϑ√(q₁q₂), q₂]]` and the matching
/// eigenvectors `c₁ b̄₁ ⊕ c₂ b̄₂` of the rank-two part of a two-block matrix,
/// as coefficient pairs `(c₁, c₂)` normalized to unit length.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TwoBlockEigen<T> {
    pub lambda_plus: T,
    pub lambda_minus: T,
    pub coeff_plus: [T; 2],
    pub coeff_minus: [T; 2],
}

/// Roots of `λ² − (q₁+q₂)λ + (1−ϑ²)q₁q₂` with their eigenvectors.
pub fn two_block_eigen<T: Real>(q1: T, q2: T, theta: T) -> Result<TwoBlockEigen<T>> {
    if !(q1 > T::zero() && q2 > T::zero()) {
        return Err(Error::domain(MODULE, "block norms q1, q2 must be positive"));
    }
    let two = T::lit(2.0);
    let half_diff = (q1 - q2) / two;
    let disc = (half_diff * half_diff + q1 * q2 * theta * theta).sqrt();
    let mean = (q1 + q2) / two;
    let lambda_plus = mean + disc;
    // Product form keeps λ₋ accurate when it is small.
    let lambda_minus = (T::one() - theta * theta) * q1 * q2 / lambda_plus;
    let vec_for = |lam: T, fallback: [T; 2]| -> [T; 2] {
        let c_a = [theta * q2, lam - q1];
        let c_b = [lam - q2, theta * q1];
        let norm = |c: [T; 2]| (c[0] * c[0] * q1 + c[1] * c[1] * q2).sqrt();
        let (na, nb) = (norm(c_a), norm(c_b));
        let scale = q1.max(q2);
        if na.max(nb) <= T::lit(1e-12) * scale * scale {
            let nf = norm(fallback);
            return [fallback[0] / nf, fallback[1] / nf];
        }
        if na >= nb {
            [c_a[0] / na, c_a[1] / na]
        } else {
            [c_b[0] / nb, c_b[1] / nb]
        }
    };
    let (fp, fm) = if q1 >= q2 {
        ([T::one(), T::zero()], [T::zero(), T::one()])
    } else {
        ([T::zero(), T::one()], [T::one(), T::zero()])
    };
    Ok(TwoBlockEigen {
        lambda_plus,
        lambda_minus,
        coeff_plus: vec_for(lambda_plus, fp),
        coeff_minus: vec_for(lambda_minus, fm),
    })
}

/// `R = D^{1/2}(I + BB')D^{1/2}` with two columns in `B`; the second column
/// is imaginary when `λ₋ < 0`, so its outer product enters with a minus sign.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TwoFactorialStructure<T> {
    pub d: Vec<T>,
    pub lambda_plus: T,
    pub lambda_minus: T,
    /// Real parts: `√|λ±| e±`.
    pub b_columns: [Vec<T>; 2],
    pub second_imaginary: bool,
}

impl<T: Real> TwoFactorialStructure<T> {
    pub fn from_two_block(s: &BlockFactorialStructure<T>) -> Result<Self> {
        if s.p() != 2 {
            return Err(Error::domain(MODULE, "two-factorial form needs exactly two blocks"));
        }
        let eig = two_block_eigen(s.q(0), s.q(1), s.theta12())?;
        let b = s.b();
        let column = |lam: T, c: [T; 2]| -> Vec<T> {
            let root = lam.abs().sqrt();
            (0..s.n()).map(|mu| root * c[s.block_of(mu)] * b[mu]).collect()
        };
        Ok(TwoFactorialStructure {
            d: s.d(),
            lambda_plus: eig.lambda_plus,
            lambda_minus: eig.lambda_minus,
            b_columns: [column(eig.lambda_plus, eig.coeff_plus), column(eig.lambda_minus, eig.coeff_minus)],
            second_imaginary: eig.lambda_minus < T::zero(),
        })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        let [b1, b2] = &self.b_columns;
        let sign = if self.second_imaginary { -T::one() } else { T::one() };
        Matrix::from_fn(self.n(), |i, j| {
            let delta = if i == j { T::one() } else { T::zero() };
            (self.d[i] * self.d[j]).sqrt() * (delta + b1[i] * b1[j] + sign * b2[i] * b2[j])
        })
    }
}

/// Both sides of `|I_n + (ϑ_{ij} b̄_i b̄_j')| = |I_p + Q^{1/2} Θ Q^{1/2}|`,
/// `q_i = b̄_i' b̄_i`; the block vectors are laid out consecutively.
pub fn block_determinant_identity<T: Real>(theta: &Matrix<T>, b_vectors: &[Vec<T>]) -> Result<(T, T)> {
    let p = theta.n();
    if b_vectors.len() != p {
        return Err(Error::domain(MODULE, "need one vector per block"));
    }
    let q: Vec<T> = b_vectors.iter().map(|b| b.iter().map(|&v| v * v).sum()).collect();
    if q.iter().any(|v| v.is_zero()) {
        return Err(Error::domain(MODULE, "every block vector must be non-zero"));
    }
    let mut flat = Vec::new();
    let mut blk = Vec::new();
    for (j, b) in b_vectors.iter().enumerate() {
        flat.extend_from_slice(b);
        blk.extend(std::iter::repeat(j).take(b.len()));
    }
    let n = flat.len();
    let big = Matrix::from_fn(n, |i, j| {
        let delta = if i == j { T::one() } else { T::zero() };
        delta + theta[(blk[i], blk[j])] * flat[i] * flat[j]
    });
    let small = Matrix::from_fn(p, |i, j| {
        let delta = if i == j { T::one() } else { T::zero() };
        delta + q[i].sqrt() * theta[(i, j)] * q[j].sqrt()
    });
    Ok((big.det(), small.det()))
}
