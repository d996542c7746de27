//! Information-spectrum collision entropies for finite-dimensional
//! classical-quantum states, exact simulation of two-universal hashing
//! against quantum side information, and numerical checks of the resulting
//! key-length and extension bounds.
//!
//! The numerical modules are generic over [`Real`] (`f64` and `f32`); the
//! aliases below fix the double-precision instantiation used by the CLI and
//! the JSON formats.

pub mod asymptotics;
pub mod cli;
pub mod cq;
pub mod entropy;
pub mod error;
pub mod extension;
pub mod extractor;
pub mod hashing;
pub mod io;
pub mod operator;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Hermitian = operator::HermitianOperator<f64>;
pub type Density = operator::DensityOperator<f64>;
pub type Cq = cq::CqState<f64>;
pub type Bipartite = cq::BipartiteState<f64>;
pub type Entropy = entropy::EntropyResult<f64>;
pub type Report = extractor::ExtractionReport<f64>;

pub type Hermitian32 = operator::HermitianOperator<f32>;
pub type Density32 = operator::DensityOperator<f32>;
pub type Cq32 = cq::CqState<f32>;
pub type Bipartite32 = cq::BipartiteState<f32>;
