//! Inequality certificates for orthant probabilities, excess lower bounds,
//! the local-minimum λ criterion, refined Bonferroni bounds and MTP₂ grid
//! checks.

mod bonferroni;
mod evaluator;
mod excess;
mod inequality;
mod lambda;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use bonferroni::{bonferroni_refined, BonferroniBound};
pub use evaluator::{EngineEvaluator, EngineKind, Evaluation, Evaluator, MonteCarloEvaluator};
pub use excess::{admissible_shape, excess_three_block, excess_two_block, power_bound};
pub use inequality::{
    check_orthant_inequality, check_three_event_inequalities, check_truncated_ratio, mtp2_grid_check, Mtp2Violation,
    PairGrid,
};
pub use lambda::{lambda_integrand, local_min_lambda, LambdaCriterion};

pub(crate) const MODULE: &str = "bounds";

/// Default number of standard errors a margin must clear.
pub const DEFAULT_K: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// How the probabilities behind a certificate were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    OneFactorial,
    TwoBlockLaguerre,
    TwoFactorial,
    ThreeBlockSeries,
    Tree,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::OneFactorial => "one_factorial",
            Method::TwoBlockLaguerre => "two_block_laguerre",
            Method::TwoFactorial => "two_factorial",
            Method::ThreeBlockSeries => "three_block_series",
            Method::Tree => "tree",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// `lhs ≥ rhs` checked at `k` standard errors.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InequalityCertificate {
    pub name: String,
    pub inputs_digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub method: Method,
    pub abs_uncertainty: f64,
    pub k: f64,
    pub verdict: Verdict,
    pub seed: Option<u64>,
    /// Why the verdict is inconclusive when evaluation failed.
    pub note: Option<String>,
}

pub fn verdict(margin: f64, abs_uncertainty: f64, k: f64) -> Verdict {
    if margin > k * abs_uncertainty {
        Verdict::Holds
    } else if margin < -k * abs_uncertainty {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl InequalityCertificate {
    pub fn new(name: &str, inputs: &str, lhs: f64, rhs: f64, method: Method, abs_uncertainty: f64, seed: Option<u64>) -> Self {
        let margin = lhs - rhs;
        InequalityCertificate {
            name: name.to_string(),
            inputs_digest: digest(inputs),
            lhs,
            rhs,
            margin,
            method,
            abs_uncertainty,
            k: DEFAULT_K,
            verdict: verdict(margin, abs_uncertainty, DEFAULT_K),
            seed,
            note: None,
        }
    }

    /// Certificate for an evaluation that failed.
    pub fn failed(name: &str, inputs: &str, method: Method, err: &Error) -> Self {
        InequalityCertificate {
            name: name.to_string(),
            inputs_digest: digest(inputs),
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            method,
            abs_uncertainty: f64::NAN,
            k: DEFAULT_K,
            verdict: Verdict::Inconclusive,
            seed: None,
            note: Some(err.to_string()),
        }
    }

    /// Same certificate judged at `k` standard errors.
    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        if self.note.is_none() {
            self.verdict = verdict(self.margin, self.abs_uncertainty, k);
        }
        self
    }

    /// One `key: value` line per field.
    pub fn to_record(&self) -> String {
        let verdict = match self.verdict {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        };
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let mut out = format!(
            "name: {}\ninputs: {}\nmethod: {}\nlhs: {:.12e}\nrhs: {:.12e}\nmargin: {:.6e}\nuncertainty: {:.6e}\nk: {}\nverdict: {verdict}\nseed: {seed}\n",
            self.name,
            self.inputs_digest,
            self.method.name(),
            self.lhs,
            self.rhs,
            self.margin,
            self.abs_uncertainty,
            self.k,
        );
        if let Some(n) = &self.note {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Disjoint non-empty index blocks covering `0..n`, two or three of them.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    n: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if !(2..=3).contains(&blocks.len()) {
            return Err(Error::domain(MODULE, format!("partition needs 2 or 3 blocks, got {}", blocks.len())));
        }
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::domain(MODULE, "partition has an empty block"));
            }
            for &i in b {
                if i >= n {
                    return Err(Error::domain(MODULE, format!("index {} outside 1..{n}", i + 1)));
                }
                if seen[i] {
                    return Err(Error::domain(MODULE, format!("index {} appears in two blocks", i + 1)));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::domain(MODULE, format!("index {} is in no block", i + 1)));
        }
        Ok(Partition { blocks, n })
    }

    /// Consecutive blocks of the given sizes.
    pub fn consecutive(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&k| {
                start += k;
                (start - k..start).collect()
            })
            .collect();
        Self::new(blocks, start)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `x` with every coordinate outside the listed blocks sent to `+∞`.
    pub(crate) fn keep(&self, x: &[f64], which: &[usize]) -> Vec<f64> {
        let mut out = vec![f64::INFINITY; x.len()];
        for &b in which {
            for &i in &self.blocks[b] {
                out[i] = x[i];
            }
        }
        out
    }
}
