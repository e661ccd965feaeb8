use rayon::prelude::*;

use super::{Method, MODULE};
use crate::corrstruct::{one_factorial_exact, tree_structure, BlockFactorialStructure, CorrelationMatrix, OneFactorialStructure, TreeStructure};
use crate::engines::{
    cdf_one_factorial, cdf_three_block, cdf_tree, cdf_two_block, EvalPoint, ThreeBlockSeriesParams, TwoBlockRoute,
};
use crate::error::{Error, Result};
use crate::oracle::{below, mc_joint, SampleBatch};
use crate::quad::Tolerance;
use crate::specfun::gamma_cdf;
use crate::SeriesValue;

/// Cdf values at several points of one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub values: Vec<f64>,
    /// Joint covariance of Monte Carlo estimates; `None` when deterministic.
    pub cov: Option<Vec<Vec<f64>>>,
    pub seed: Option<u64>,
}

impl Evaluation {
    /// Standard error of `Σ g_i v_i` (0 for deterministic values).
    pub fn linear_se(&self, g: &[f64]) -> f64 {
        let Some(cov) = &self.cov else { return 0.0 };
        let mut v = 0.0;
        for (i, gi) in g.iter().enumerate() {
            for (j, gj) in g.iter().enumerate() {
                v += gi * gj * cov[i][j];
            }
        }
        v.max(0.0).sqrt()
    }
}

/// Source of cdf values `P(X ≤ x)`; entries `+∞` marginalize.
pub trait Evaluator: Sync {
    fn method(&self) -> Method;
    fn dim(&self) -> usize;
    fn alpha(&self) -> f64;
    fn evaluate(&self, points: &[Vec<f64>]) -> Result<Evaluation>;

    fn is_deterministic(&self) -> bool {
        self.method() != Method::MonteCarlo
    }
}

/// Indicator frequencies of one sample at every point.
pub struct MonteCarloEvaluator {
    batch: SampleBatch,
    alpha: f64,
}

impl MonteCarloEvaluator {
    pub fn new(batch: SampleBatch, alpha: f64) -> Self {
        MonteCarloEvaluator { batch, alpha }
    }
}

impl Evaluator for MonteCarloEvaluator {
    fn method(&self) -> Method {
        Method::MonteCarlo
    }

    fn dim(&self) -> usize {
        self.batch.n()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn evaluate(&self, points: &[Vec<f64>]) -> Result<Evaluation> {
        if points.iter().any(|p| p.len() != self.dim()) {
            return Err(Error::domain(MODULE, "evaluation point and sample differ in dimension"));
        }
        let j = mc_joint(&self.batch, points.len(), |row, out| {
            for (o, p) in out.iter_mut().zip(points) {
                *o = f64::from(u8::from(below(row, p)));
            }
        });
        Ok(Evaluation { values: j.means, cov: Some(j.cov), seed: Some(j.seed) })
    }
}

#[derive(Debug, Clone)]
pub enum EngineKind {
    OneFactorial(OneFactorialStructure<f64>),
    TwoBlock(BlockFactorialStructure<f64>),
    ThreeBlock(ThreeBlockSeriesParams),
    /// The correlation matrix is kept for marginals, which need not be trees.
    Tree(CorrelationMatrix<f64>, TreeStructure<f64>),
}

/// Deterministic engine evaluation; fails when an engine misses its tolerance.
#[derive(Debug, Clone)]
pub struct EngineEvaluator {
    kind: EngineKind,
    alpha: f64,
    tol: Tolerance<f64>,
}

impl EngineEvaluator {
    pub fn new(kind: EngineKind, alpha: f64, tol: Tolerance<f64>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(MODULE, format!("shape must be positive, got {alpha}")));
        }
        if let EngineKind::TwoBlock(s) = &kind {
            crate::engines::two_block_route(s.theta12(), alpha)?;
        }
        Ok(EngineEvaluator { kind, alpha, tol })
    }

    pub fn tree(r: &CorrelationMatrix<f64>, alpha: f64, tol: Tolerance<f64>) -> Result<Self> {
        let t = tree_structure(r, None)
            .ok_or_else(|| Error::precondition(MODULE, "inverse of the matrix is not supported on a spanning tree"))?;
        Self::new(EngineKind::Tree(r.clone(), t), alpha, tol)
    }

    fn one(&self, x: &[f64]) -> Result<f64> {
        let p = EvalPoint::new(x.to_vec(), self.alpha)?;
        let v = match &self.kind {
            EngineKind::OneFactorial(s) => cdf_one_factorial(&p, s, &self.tol)?,
            EngineKind::TwoBlock(s) => cdf_two_block(&p, s, &self.tol)?.1,
            EngineKind::ThreeBlock(params) => cdf_three_block(&p, params)?,
            EngineKind::Tree(r, t) => self.tree_value(&p, r, t)?,
        };
        if !v.converged {
            return Err(Error::NonConvergence {
                module: MODULE,
                msg: format!("{} engine: error estimate {:.3e} above tolerance", self.method().name(), v.abs_error_estimate),
            });
        }
        Ok(v.value)
    }

    fn tree_value(&self, p: &EvalPoint, r: &CorrelationMatrix<f64>, t: &TreeStructure<f64>) -> Result<SeriesValue<f64>> {
        let kept: Vec<usize> = (0..p.n()).filter(|&i| p.x[i].is_finite()).collect();
        if kept.len() == p.n() {
            return cdf_tree(p, t, &self.tol);
        }
        let xs: Vec<f64> = kept.iter().map(|&i| p.x[i]).collect();
        match kept.len() {
            0 => return Ok(SeriesValue::exact(1.0)),
            1 => return Ok(SeriesValue::exact(gamma_cdf(xs[0], self.alpha)?)),
            _ => {}
        }
        let sub = r.submatrix(&kept);
        let sp = EvalPoint::new(xs, self.alpha)?;
        if let Some(f) = one_factorial_exact(&sub, 1e-12) {
            return cdf_one_factorial(&sp, &f, &self.tol);
        }
        match tree_structure(&sub, None) {
            Some(st) => cdf_tree(&sp, &st, &self.tol),
            None => Err(Error::precondition(MODULE, "marginal of the tree matrix is neither a tree nor one-factorial")),
        }
    }
}

impl Evaluator for EngineEvaluator {
    fn method(&self) -> Method {
        match &self.kind {
            EngineKind::OneFactorial(_) => Method::OneFactorial,
            EngineKind::TwoBlock(s) => match crate::engines::two_block_route(s.theta12(), self.alpha) {
                Ok(TwoBlockRoute::MergedOneFactorial) => Method::OneFactorial,
                Ok(TwoBlockRoute::Laguerre) => Method::TwoBlockLaguerre,
                _ => Method::TwoFactorial,
            },
            EngineKind::ThreeBlock(_) => Method::ThreeBlockSeries,
            EngineKind::Tree(..) => Method::Tree,
        }
    }

    fn dim(&self) -> usize {
        match &self.kind {
            EngineKind::OneFactorial(s) => s.n(),
            EngineKind::TwoBlock(s) => s.n(),
            EngineKind::ThreeBlock(p) => p.structure.n(),
            EngineKind::Tree(r, _) => r.n(),
        }
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn evaluate(&self, points: &[Vec<f64>]) -> Result<Evaluation> {
        if points.iter().any(|p| p.len() != self.dim()) {
            return Err(Error::domain(MODULE, "evaluation point and structure differ in dimension"));
        }
        let values = points.par_iter().map(|x| self.one(x)).collect::<Result<Vec<f64>>>()?;
        Ok(Evaluation { values, cov: None, seed: None })
    }
}
