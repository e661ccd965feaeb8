//! Monte Carlo ground truth: reproducible multivariate gamma samples and
//! estimators with standard errors.
//!
//! Every estimator reduces per-chunk moments in chunk order, so results are
//! bit-identical for any number of threads.

mod batch;
mod export;

use rayon::prelude::*;

use crate::corrstruct::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub use batch::{sample_chi_square, sample_one_factorial, SampleBatch, CHUNK};
pub use export::{read_batch, write_batch, BatchColumns, BATCH_MAGIC};

pub(crate) const MODULE: &str = "oracle";

/// Samples used for engine cross-checks.
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
/// Samples used for inequality counterexamples.
pub const COUNTEREXAMPLE_SAMPLES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
    pub seed: u64,
}

/// Means and covariance (of the means) of several statistics computed on
/// the same draws.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct JointEstimate {
    pub means: Vec<f64>,
    /// `Cov(mean_i, mean_j)`, i.e. the sample covariance divided by `count`.
    pub cov: Vec<Vec<f64>>,
    pub count: u64,
    pub seed: u64,
}

impl JointEstimate {
    pub fn estimate(&self, i: usize) -> MCEstimate {
        MCEstimate { mean: self.means[i], std_error: self.cov[i][i].max(0.0).sqrt(), count: self.count, seed: self.seed }
    }

    /// Standard error of `Σ_i w_i mean_i`.
    pub fn linear_se(&self, w: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, wi) in w.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                v += wi * wj * self.cov[i][j];
            }
        }
        v.max(0.0).sqrt()
    }
}

/// Count, means and co-moments `Σ (f_i − m_i)(f_j − m_j)`.
#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: Vec<f64>,
    co: Vec<f64>,
}

impl Moments {
    fn new(m: usize) -> Self {
        Moments { count: 0, mean: vec![0.0; m], co: vec![0.0; m * m] }
    }

    fn push(&mut self, f: &[f64], delta: &mut [f64]) {
        let m = self.mean.len();
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        for i in 0..m {
            delta[i] = f[i] - self.mean[i];
            self.mean[i] += delta[i] * inv;
        }
        for i in 0..m {
            let after = f[i] - self.mean[i];
            for j in 0..m {
                self.co[i * m + j] += delta[j] * after;
            }
        }
    }

    /// Pairwise combination of two disjoint samples.
    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let m = self.mean.len();
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d: Vec<f64> = (0..m).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..m {
            for j in 0..m {
                self.co[i * m + j] += other.co[i * m + j] + d[i] * d[j] * na * nb / n;
            }
        }
        for i in 0..m {
            self.mean[i] += d[i] * nb / n;
        }
        self.count += other.count;
    }

    fn finish(self, seed: u64) -> JointEstimate {
        let m = self.mean.len();
        let n = self.count as f64;
        let denom = if self.count > 1 { n * (n - 1.0) } else { f64::INFINITY };
        let cov = (0..m).map(|i| (0..m).map(|j| self.co[i * m + j] / denom).collect()).collect();
        JointEstimate { means: self.mean, cov, count: self.count, seed }
    }
}

/// Means of `m` statistics of each draw, with their joint covariance.
/// `stat(row, out)` writes the statistics of one draw into `out`.
pub fn mc_joint(batch: &SampleBatch, m: usize, stat: impl Fn(&[f64], &mut [f64]) + Sync) -> JointEstimate {
    let n = batch.n();
    let parts = batch.map_chunks(|rows| {
        let mut acc = Moments::new(m);
        let mut f = vec![0.0; m];
        let mut delta = vec![0.0; m];
        for row in rows.chunks_exact(n) {
            stat(row, &mut f);
            acc.push(&f, &mut delta);
        }
        acc
    });
    let mut total = Moments::new(m);
    for p in &parts {
        total.merge(p);
    }
    total.finish(batch.seed())
}

/// Mean of one statistic.
pub fn mc_mean(batch: &SampleBatch, stat: impl Fn(&[f64]) -> f64 + Sync) -> MCEstimate {
    mc_joint(batch, 1, |row, out| out[0] = stat(row)).estimate(0)
}

/// `1{X ≤ x}` componentwise; `+∞` entries never bind.
#[inline]
pub fn below(row: &[f64], x: &[f64]) -> bool {
    row.iter().zip(x).all(|(v, x)| v <= x)
}

fn check_dim(batch: &SampleBatch, len: usize) -> Result<()> {
    if batch.n() != len {
        return Err(Error::domain(MODULE, format!("batch has dimension {}, point has {len}", batch.n())));
    }
    Ok(())
}

/// Proportion of draws with every component `≤ x`.
pub fn mc_cdf(batch: &SampleBatch, x: &[f64]) -> Result<MCEstimate> {
    check_dim(batch, x.len())?;
    Ok(mc_mean(batch, |row| f64::from(u8::from(below(row, x)))))
}

/// Empirical `E exp(−Σ t_i X_i)`.
pub fn mc_laplace(batch: &SampleBatch, t: &[f64]) -> Result<MCEstimate> {
    check_dim(batch, t.len())?;
    check_laplace_arg(t)?;
    Ok(mc_mean(batch, |row| (-row.iter().zip(t).map(|(x, t)| x * t).sum::<f64>()).exp()))
}

fn check_laplace_arg(t: &[f64]) -> Result<()> {
    if let Some(v) = t.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(MODULE, format!("Laplace argument must be non-negative and finite, got {v}")));
    }
    Ok(())
}

/// `|I + R T|^{−α}` with `T = Diag(t)`.
pub fn lt_formula(r: &CorrelationMatrix<f64>, alpha: f64, t: &[f64]) -> Result<f64> {
    if t.len() != r.n() {
        return Err(Error::domain(MODULE, "Laplace argument and matrix differ in dimension"));
    }
    check_laplace_arg(t)?;
    let m = Matrix::from_fn(r.n(), |i, j| f64::from(u8::from(i == j)) + r.get(i, j) * t[j]);
    Ok(m.det().powf(-alpha))
}

/// Cdf estimates along `R₀ + τ(R₁ − R₀)` from common random numbers.
#[derive(Debug, Clone)]
pub struct CoupledPath {
    pub tau: Vec<f64>,
    /// Estimate at each `τ`, or why the interpolated matrix was rejected.
    pub points: Vec<Result<MCEstimate>>,
    /// `F(τ_{i+1}) − F(τ_i)` with its coupled standard error, where both ends exist.
    pub increments: Vec<Option<MCEstimate>>,
    joint: JointEstimate,
    slot_of: Vec<Option<usize>>,
}

impl CoupledPath {
    /// `Σ_i w_i F(τ_i)` with its coupled standard error; `None` if a point
    /// with non-zero weight was rejected.
    pub fn combination(&self, w: &[f64]) -> Option<MCEstimate> {
        let mut v = vec![0.0; self.joint.means.len()];
        for (i, &wi) in w.iter().enumerate() {
            if wi != 0.0 {
                v[self.slot_of[i]?] += wi;
            }
        }
        let mean = v.iter().zip(&self.joint.means).map(|(a, b)| a * b).sum();
        Some(MCEstimate { mean, std_error: self.joint.linear_se(&v), count: self.joint.count, seed: self.joint.seed })
    }
}

/// Pushes the same standard normal draws through the triangular factor of
/// every interpolated matrix, so differences along the path have small
/// variance.
pub fn mc_coupled_path(
    r0: &CorrelationMatrix<f64>,
    r1: &CorrelationMatrix<f64>,
    nu: usize,
    tau_grid: &[f64],
    x: &[f64],
    count: u64,
    seed: u64,
) -> Result<CoupledPath> {
    let n = r0.n();
    if r1.n() != n || x.len() != n {
        return Err(Error::domain(MODULE, "matrices and point differ in dimension"));
    }
    if nu == 0 {
        return Err(Error::domain(MODULE, "degrees of freedom must be positive"));
    }
    let factors: Vec<Result<Matrix<f64>>> = tau_grid
        .iter()
        .map(|&tau| {
            let m = Matrix::from_fn(n, |i, j| r0.get(i, j) + tau * (r1.get(i, j) - r0.get(i, j)));
            m.cholesky().ok_or_else(|| {
                Error::precondition(MODULE, format!("interpolated matrix at tau = {tau} is not positive definite"))
            })
        })
        .collect();
    let live: Vec<(usize, &Matrix<f64>)> =
        factors.iter().enumerate().filter_map(|(i, f)| f.as_ref().ok().map(|f| (i, f))).collect();
    let m = live.len();
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let rows = (count - c * CHUNK).min(CHUNK);
            let mut rng = batch::chunk_rng(seed, c);
            let mut acc = Moments::new(m);
            let mut z = vec![0.0; nu * n];
            let mut f = vec![0.0; m];
            let mut delta = vec![0.0; m];
            let mut xs = vec![0.0; n];
            for _ in 0..rows {
                for v in z.iter_mut() {
                    *v = batch::std_normal(&mut rng);
                }
                for (slot, (_, l)) in live.iter().enumerate() {
                    xs.iter_mut().for_each(|v| *v = 0.0);
                    for zk in z.chunks_exact(n) {
                        for i in 0..n {
                            let y: f64 = l.row(i)[..=i].iter().zip(zk).map(|(l, z)| l * z).sum();
                            xs[i] += 0.5 * y * y;
                        }
                    }
                    f[slot] = f64::from(u8::from(below(&xs, x)));
                }
                acc.push(&f, &mut delta);
            }
            acc
        })
        .collect();
    let mut total = Moments::new(m);
    for p in &parts {
        total.merge(p);
    }
    let joint = total.finish(seed);
    let mut slot_of = vec![None; tau_grid.len()];
    for (slot, (i, _)) in live.iter().enumerate() {
        slot_of[*i] = Some(slot);
    }
    let points = factors
        .into_iter()
        .enumerate()
        .map(|(i, f)| f.map(|_| joint.estimate(slot_of[i].expect("live point"))))
        .collect();
    let mut path = CoupledPath { tau: tau_grid.to_vec(), points, increments: vec![], joint, slot_of };
    path.increments = (1..tau_grid.len())
        .map(|i| {
            let mut w = vec![0.0; tau_grid.len()];
            w[i - 1] = -1.0;
            w[i] = 1.0;
            path.combination(&w)
        })
        .collect();
    Ok(path)
}
