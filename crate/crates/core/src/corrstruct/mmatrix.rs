use super::{CorrelationMatrix, MODULE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

/// Largest dimension accepted by the exhaustive signature search.
pub const SIGNATURE_SEARCH_CAP: usize = 25;

/// `Diag(s₁, …, s_n)` with `s_i = ±1`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SignatureMatrix {
    pub signs: Vec<i8>,
}

impl SignatureMatrix {
    pub fn identity(n: usize) -> Self {
        SignatureMatrix { signs: vec![1; n] }
    }

    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::domain(MODULE, "signature entries must be +1 or -1"));
        }
        Ok(SignatureMatrix { signs })
    }

    /// `S M S`.
    pub fn apply<T: Real>(&self, m: &Matrix<T>) -> Matrix<T> {
        let s = |i: usize| if self.signs[i] > 0 { T::one() } else { -T::one() };
        Matrix::from_fn(m.n(), |i, j| s(i) * s(j) * m[(i, j)])
    }

    /// Same signature up to a global sign flip.
    pub fn equivalent(&self, other: &SignatureMatrix) -> bool {
        self.signs == other.signs || self.signs.iter().zip(&other.signs).all(|(a, b)| *a == -*b)
    }
}

/// Non-positive off-diagonal entries, positive definite, and a non-negative
/// inverse. Tests are made at `tol` times the largest absolute entry (at
/// least 1) of the matrix under test.
pub fn is_m_matrix<T: Real>(m: &Matrix<T>, tol: T) -> bool {
    let n = m.n();
    let scale = |a: &Matrix<T>| {
        let mut s = T::one();
        for i in 0..n {
            for &v in a.row(i) {
                s = s.max(v.abs());
            }
        }
        s
    };
    let t = tol * scale(m);
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] > t {
                return false;
            }
        }
    }
    let sym = Matrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)]) / T::lit(2.0));
    if sym.cholesky().is_none() {
        return false;
    }
    let Some(inv) = m.inverse() else { return false };
    let ti = tol * scale(&inv);
    (0..n).all(|i| inv.row(i).iter().all(|&v| v >= -ti))
}

/// First signature in Gray-code order (with `s₁ = +1`) for which `S R⁻¹ S`
/// is an M-matrix.
///
/// Conjugating by `S` only flips the signs of off-diagonal pairs, so each
/// pair is classified once and a Gray-code step updates the number of
/// offending pairs in `O(n)`.
pub fn find_signature<T: Real>(r: &CorrelationMatrix<T>) -> Result<Option<SignatureMatrix>> {
    let n = r.n();
    if n > SIGNATURE_SEARCH_CAP {
        return Err(Error::domain(
            MODULE,
            format!("signature search is limited to n <= {SIGNATURE_SEARCH_CAP}, got {n}"),
        ));
    }
    let tol = T::lit(1e-10);
    let inv = r.inverse();
    let mut scale = T::one();
    for i in 0..n {
        for &v in inv.row(i) {
            scale = scale.max(v.abs());
        }
    }
    let t = tol * scale;
    // bad[i][j][0]: pair violates when s_i s_j = +1; [1]: when s_i s_j = −1.
    let mut bad = vec![[false; 2]; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let (p, c) = (inv[(i, j)], r.get(i, j));
                bad[i * n + j] = [p > t || c < -tol, -p > t || -c < -tol];
            }
        }
    }
    let mut s = vec![1i8; n];
    let pair_bad = |s: &[i8], i: usize, j: usize| bad[i * n + j][usize::from(s[i] != s[j])];
    let mut count = 0usize;
    for i in 0..n {
        for j in 0..i {
            count += usize::from(pair_bad(&s, i, j));
        }
    }
    let steps: u64 = 1u64 << n.saturating_sub(1);
    for g in 0..steps {
        if g > 0 {
            // Gray code: flip coordinate 1 + (index of the lowest set bit of g).
            let k = 1 + g.trailing_zeros() as usize;
            for j in 0..n {
                if j != k {
                    count -= usize::from(pair_bad(&s, k, j));
                }
            }
            s[k] = -s[k];
            for j in 0..n {
                if j != k {
                    count += usize::from(pair_bad(&s, k, j));
                }
            }
        }
        if count == 0 {
            let sig = SignatureMatrix { signs: s.clone() };
            if is_m_matrix(&sig.apply(&inv), tol) {
                return Ok(Some(sig));
            }
        }
    }
    Ok(None)
}

/// Sign of `Π_j (ϑ_j + (ϑ_j − ϑ_k ϑ_l) p_j)` over the three blocks, with
/// `ϑ₁ = ϑ_{23}`, `ϑ₂ = ϑ_{13}`, `ϑ₃ = ϑ_{12}` and
/// `p_j = Σ_{μ∈I_j} a_μ²/(1 − a_μ²)`: true iff the inverse of the assembled
/// three-block matrix is an M-matrix.
pub fn three_block_mmatrix_condition<T: Real>(theta: [T; 3], p: [T; 3]) -> bool {
    let [t1, t2, t3] = theta;
    let f1 = t1 + (t1 - t2 * t3) * p[0];
    let f2 = t2 + (t2 - t1 * t3) * p[1];
    let f3 = t3 + (t3 - t1 * t2) * p[2];
    f1 * f2 * f3 > T::zero()
}
