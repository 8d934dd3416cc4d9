//! Gradient boosting with information-theoretic trust weights.
//!
//! Every training row keeps a history of its pseudo-residual signs. Rows
//! whose histories have high Lempel-Ziv complexity are erratic and get
//! exponentially smaller weights when the next regression tree is fitted.
//!
//! ```
//! use itboost::boosting::{train, BoostConfig, Loss};
//! use itboost::synth::{two_gaussians, SynthSpec};
//!
//! let data = two_gaussians(&SynthSpec { n: 60, d: 3, ..SynthSpec::default() }).unwrap();
//! let config = BoostConfig { iterations: 10, loss: Loss::Squared, ..BoostConfig::default() };
//! let (model, trace) = train(&data, &config).unwrap();
//! assert_eq!(model.trees.len(), 10);
//! assert_eq!(trace.iterations(), 10);
//! ```

pub mod boosting;
pub mod complexity;
pub mod data;
mod error;
pub mod eval;
pub mod noise;
pub mod synth;
pub mod theory;

pub use boosting::{BoostConfig, Loss, Model, RunTrace, TrustMode};
pub use complexity::{Encoding, TrustState};
pub use data::{Dataset, FoldPlan};
pub use error::{Error, Result};
pub use noise::{NoiseKind, NoiseMask, NoiseSpec};
