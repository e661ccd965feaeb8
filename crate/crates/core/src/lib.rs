//! Cumulative distribution functions of multivariate gamma (and chi-square)
//! distributions under structured correlation matrices, certified lower
//! bounds for the excess probabilities in Gaussian-correlation-type
//! inequalities, and a Monte Carlo oracle to check both.

pub mod bounds;
pub mod converge;
pub mod corrstruct;
pub mod engines;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod quad;
pub mod real;
pub mod specfun;

pub use error::{Error, Result};
pub use real::Real;
pub use specfun::SeriesValue;

// f64 instances of the generic types.
pub type Matrix = linalg::Matrix<f64>;
pub type CorrelationMatrix = corrstruct::CorrelationMatrix<f64>;
pub type OneFactorialStructure = corrstruct::OneFactorialStructure<f64>;
pub type BlockFactorialStructure = corrstruct::BlockFactorialStructure<f64>;
pub type TwoFactorialStructure = corrstruct::TwoFactorialStructure<f64>;
pub type TreeStructure = corrstruct::TreeStructure<f64>;
pub type Tolerance = quad::Tolerance<f64>;
pub type ThetaTilde = converge::ThetaTilde<f64>;
