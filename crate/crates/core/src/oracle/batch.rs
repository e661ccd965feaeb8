use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;

use super::MODULE;
use crate::corrstruct::{CorrelationMatrix, OneFactorialStructure};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Draws per chunk. Chunk `c` always uses stream `c` of the seeded
/// generator, so the sample does not depend on how chunks are scheduled.
pub const CHUNK: u64 = 1 << 14;

pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Standard normal variate by inversion of a uniform on the open unit interval.
#[inline]
pub(crate) fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u)
}

#[derive(Debug, Clone)]
enum Source {
    /// `X = ½ Σ_k (L z_k)²` over `nu` independent standard normal vectors.
    ChiSquare { chol: Matrix<f64>, nu: usize },
    /// `Y ~ Γ(α)`, `X_μ = d_μ W_μ` with `W_μ | Y ~ Γ(α + N_μ)`,
    /// `N_μ ~ Poisson(b_μ² Y)`.
    OneFactorial { d: Vec<f64>, b2: Vec<f64>, alpha: f64 },
}

/// A reproducible sample of `count` positive vectors of dimension `n`.
///
/// Draws are generated on demand, chunk by chunk; nothing is stored.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    source: Source,
    n: usize,
    count: u64,
    seed: u64,
}

/// Multivariate chi-square sample (scaled by ½): `X_i = ½ Σ_{k≤ν} Z_{k,i}²`
/// with rows `Z_k ~ N(0, R)`. The marginal shape is `α = ν/2`.
pub fn sample_chi_square(r: &CorrelationMatrix<f64>, nu: usize, count: u64, seed: u64) -> Result<SampleBatch> {
    if nu == 0 {
        return Err(Error::domain(MODULE, "degrees of freedom must be positive"));
    }
    let chol = r
        .matrix()
        .cholesky()
        .ok_or_else(|| Error::precondition(MODULE, "triangular factorization failed: matrix is numerically singular"))?;
    Ok(SampleBatch { n: r.n(), source: Source::ChiSquare { chol, nu }, count, seed })
}

/// One-factorial gamma sample for any shape `α > 0`, through the Poisson
/// mixture of the non-central gamma conditional on the common factor.
pub fn sample_one_factorial(s: &OneFactorialStructure<f64>, alpha: f64, count: u64, seed: u64) -> Result<SampleBatch> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
    }
    let d = s.d();
    let b2 = s.a().iter().zip(&d).map(|(a, d)| a * a / d).collect();
    Ok(SampleBatch { n: s.n(), source: Source::OneFactorial { d, b2, alpha }, count, seed })
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunks(&self) -> u64 {
        self.count.div_ceil(CHUNK)
    }

    /// Row-major draws of chunk `c` into `out`.
    pub fn fill_chunk(&self, c: u64, out: &mut Vec<f64>) {
        let rows = (self.count - c * CHUNK).min(CHUNK) as usize;
        let n = self.n;
        out.clear();
        out.resize(rows * n, 0.0);
        let mut rng = chunk_rng(self.seed, c);
        match &self.source {
            Source::ChiSquare { chol, nu } => {
                let mut z = vec![0.0; n];
                for row in out.chunks_exact_mut(n) {
                    for _ in 0..*nu {
                        for v in z.iter_mut() {
                            *v = std_normal(&mut rng);
                        }
                        for (i, x) in row.iter_mut().enumerate() {
                            let y: f64 = chol.row(i)[..=i].iter().zip(&z).map(|(l, z)| l * z).sum();
                            *x += 0.5 * y * y;
                        }
                    }
                }
            }
            Source::OneFactorial { d, b2, alpha } => {
                let factor = Gamma::new(*alpha, 1.0).expect("positive shape");
                for row in out.chunks_exact_mut(n) {
                    let y = factor.sample(&mut rng);
                    for (mu, x) in row.iter_mut().enumerate() {
                        let lam = b2[mu] * y;
                        let k = if lam > 0.0 { Poisson::new(lam).expect("positive rate").sample(&mut rng) } else { 0.0 };
                        let w = Gamma::new(alpha + k, 1.0).expect("positive shape").sample(&mut rng);
                        *x = d[mu] * w;
                    }
                }
            }
        }
    }

    /// `map` over every chunk in parallel, results in chunk order.
    pub fn map_chunks<A: Send>(&self, map: impl Fn(&[f64]) -> A + Sync) -> Vec<A> {
        (0..self.chunks())
            .into_par_iter()
            .map_init(Vec::new, |buf, c| {
                self.fill_chunk(c, buf);
                map(buf)
            })
            .collect()
    }

    /// All draws, sequentially, one row at a time.
    pub fn rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.chunks()).flat_map(move |c| {
            let mut buf = Vec::new();
            self.fill_chunk(c, &mut buf);
            buf.chunks_exact(self.n).map(<[f64]>::to_vec).collect::<Vec<_>>()
        })
    }
}

