//! Gauss rules from the Golub–Welsch eigenproblem of the Jacobi matrix.

use crate::real::Real;
use crate::specfun::{ln_gamma, LaguerreSeq};

/// Nodes and weights of a probability-normalized Gauss rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// Gauss rule whose weights are stored as logarithms, for weights far below
/// the floating-point range (large Gauss–Laguerre rules).
#[derive(Debug, Clone, PartialEq)]
pub struct LogGaussRule<T> {
    pub nodes: Vec<T>,
    pub ln_weights: Vec<T>,
}

/// Eigenvalues and squared first eigenvector components of the symmetric
/// tridiagonal matrix with the given diagonal and sub-diagonal (implicit QL).
fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> (Vec<T>, Vec<T>) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let mut z = vec![T::zero(); n];
    z[0] = T::one();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r.is_zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let nodes = idx.iter().map(|&i| d[i]).collect();
    let w = idx.iter().map(|&i| z[i] * z[i]).collect();
    (nodes, w)
}

/// Gauss–Jacobi rule for the probability density proportional to
/// `(1-x)^a (1+x)^b` on `[-1, 1]`, `a, b > -1`.
pub fn gauss_jacobi<T: Real>(n: usize, a: T, b: T) -> GaussRule<T> {
    assert!(n >= 1, "rule needs at least one node");
    let one = T::one();
    let two = T::lit(2.0);
    let ab = a + b;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    for i in 0..n {
        let ii = T::of(i);
        let s = two * ii + ab;
        let di = if i == 0 {
            (b - a) / (ab + two)
        } else {
            (b * b - a * a) / (s * (s + two))
        };
        diag.push(di);
        if i + 1 < n {
            let k = T::of(i + 1);
            let s = two * k + ab;
            // β_k = 4k(k+a)(k+b)(k+a+b) / (s²(s+1)(s-1)); the last factor
            // ratio (k+a+b)/(s-1) is 1 in the limit s = 1.
            let ratio = if (s - one).abs() < T::lit(1e-12) { one } else { (k + ab) / (s - one) };
            let beta = T::lit(4.0) * k * (k + a) * (k + b) * ratio / (s * s * (s + one));
            off.push(beta.max(T::zero()).sqrt());
        }
    }
    let (nodes, weights) = tridiagonal_eigen(&diag, &off);
    GaussRule { nodes, weights }
}

/// Gauss–Legendre rule on `[-1, 1]` with weights summing to 1.
pub fn gauss_legendre<T: Real>(n: usize) -> GaussRule<T> {
    gauss_jacobi(n, T::zero(), T::zero())
}

/// Gauss–Hermite rule for the density `e^{-r²}/√π` on the real line.
pub fn gauss_hermite<T: Real>(n: usize) -> GaussRule<T> {
    assert!(n >= 1, "rule needs at least one node");
    let diag = vec![T::zero(); n];
    let off: Vec<T> = (1..n).map(|i| (T::of(i) / T::lit(2.0)).sqrt()).collect();
    let (nodes, weights) = tridiagonal_eigen(&diag, &off);
    GaussRule { nodes, weights }
}

/// Gauss–Laguerre rule for the gamma density `g_α`, weights returned in log
/// form. Tail nodes are polished by Newton steps before their weights are
/// taken from the closed form `x / ((n+1)² L_{n+1}(x)²)` (up to constants).
pub fn gauss_laguerre<T: Real>(n: usize, alpha: T) -> LogGaussRule<T> {
    assert!(n >= 1, "rule needs at least one node");
    let two = T::lit(2.0);
    let diag: Vec<T> = (0..n).map(|i| two * T::of(i) + alpha).collect();
    let off: Vec<T> = (1..n).map(|i| (T::of(i) * (T::of(i) + alpha - T::one())).sqrt()).collect();
    let (mut nodes, first) = tridiagonal_eigen(&diag, &off);
    let nn = T::of(n);
    let ln_front = ln_gamma(nn + alpha) - ln_gamma(alpha) - ln_gamma(nn + T::one()) - two * (nn + T::one()).ln();
    let mut ln_weights = Vec::with_capacity(n);
    for (x, &v0) in nodes.iter_mut().zip(first.iter()) {
        // Eigenvector weights are accurate wherever they are representable;
        // the closed form takes over in the far tail.
        if v0 > T::lit(1e-200) {
            ln_weights.push(v0.ln());
            continue;
        }
        for _ in 0..3 {
            let (ln, ln_prev) = laguerre_pair(n, alpha, *x);
            // x L_n' = n L_n - (n + α - 1) L_{n-1}
            let deriv = (nn * ln - (nn + alpha - T::one()) * ln_prev) / *x;
            if deriv.is_zero() || !deriv.is_finite() {
                break;
            }
            let step = ln / deriv;
            if !step.is_finite() {
                break;
            }
            *x -= step;
            if step.abs() <= T::epsilon() * x.abs() {
                break;
            }
        }
        let mut seq = LaguerreSeq::new(alpha, *x);
        for _ in 0..=n {
            seq.advance();
        }
        let (m, s) = seq.current();
        ln_weights.push(ln_front + x.ln() - two * (m.abs().ln() + s));
    }
    LogGaussRule { nodes, ln_weights }
}

// (L_n, L_{n-1}) at x with a common scale removed.
fn laguerre_pair<T: Real>(n: usize, alpha: T, x: T) -> (T, T) {
    let mut seq = LaguerreSeq::new(alpha, x);
    let mut prev = (T::zero(), T::zero());
    for _ in 0..n {
        prev = seq.current();
        seq.advance();
    }
    let (m, s) = seq.current();
    (m, prev.0 * (prev.1 - s).exp())
}
