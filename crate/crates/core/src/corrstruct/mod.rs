//! Correlation matrices and their structured forms: one-factorial, two- and
//! three-block factorial, two-factorial and tree type. Also M-matrix and
//! signature analysis, block inverses and the factor-fitting heuristic.

mod fit;
mod mmatrix;
mod structures;
mod tree;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

pub use fit::{fit_block_factors, one_factorial_exact, SlackReport};
pub use mmatrix::{find_signature, is_m_matrix, three_block_mmatrix_condition, SignatureMatrix, SIGNATURE_SEARCH_CAP};
pub use structures::{
    block_determinant_identity, two_block_eigen, two_block_inverse, Assemble, BlockFactorialStructure,
    OneFactorialStructure, TwoBlockEigen, TwoFactorialStructure,
};
pub use tree::{tree_structure, TreeStructure};

pub(crate) const MODULE: &str = "corrstruct";

/// Symmetric positive-definite matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CorrelationMatrix<T> {
    m: Matrix<T>,
}

impl<T: Real> CorrelationMatrix<T> {
    /// Checks symmetry (1e−12), unit diagonal, entries in `[−1, 1]` and a
    /// smallest eigenvalue above 1e−10, reporting the first failure.
    pub fn validate(m: Matrix<T>) -> Result<Self> {
        let n = m.n();
        if n == 0 {
            return Err(Error::bad_input(MODULE, "not a correlation matrix: empty"));
        }
        let sym_tol = T::lit(1e-12).max(T::lit(8.0) * T::epsilon());
        for i in 0..n {
            if !m[(i, i)].is_finite() || (m[(i, i)] - T::one()).abs() > sym_tol {
                return Err(Error::bad_input(
                    MODULE,
                    format!("not a correlation matrix: diagonal entry ({0},{0}) is {1}", i + 1, m[(i, i)]),
                ));
            }
        }
        for i in 0..n {
            for j in 0..i {
                if !m[(i, j)].is_finite() || !m[(j, i)].is_finite() {
                    return Err(Error::bad_input(
                        MODULE,
                        format!("not a correlation matrix: entry ({},{}) is not finite", i + 1, j + 1),
                    ));
                }
                if (m[(i, j)] - m[(j, i)]).abs() > sym_tol {
                    return Err(Error::bad_input(
                        MODULE,
                        format!("not a correlation matrix: asymmetric at ({},{})", i + 1, j + 1),
                    ));
                }
                if m[(i, j)].abs() > T::one() {
                    return Err(Error::bad_input(
                        MODULE,
                        format!("not a correlation matrix: entry ({},{}) = {} outside [-1, 1]", i + 1, j + 1, m[(i, j)]),
                    ));
                }
            }
        }
        let sym = Matrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)]) / T::lit(2.0));
        let (eig, _) = sym.symmetric_eigen();
        if !(eig[0] > T::lit(1e-10)) {
            return Err(Error::bad_input(
                MODULE,
                format!("not a correlation matrix: singular or indefinite (smallest eigenvalue {})", eig[0]),
            ));
        }
        Ok(CorrelationMatrix { m: sym })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::validate(Matrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        CorrelationMatrix { m: Matrix::identity(n) }
    }

    pub fn n(&self) -> usize {
        self.m.n()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.m[(i, j)]
    }

    pub fn inverse(&self) -> Matrix<T> {
        self.m.inverse().expect("validated correlation matrix is non-singular")
    }

    pub fn det(&self) -> T {
        self.m.det()
    }

    pub fn cholesky(&self) -> Matrix<T> {
        self.m.cholesky().expect("validated correlation matrix is positive definite")
    }

    /// Principal submatrix, again a correlation matrix.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        CorrelationMatrix { m: self.m.submatrix(idx) }
    }
}
