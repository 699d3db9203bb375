//! Phase-transmittance radial basis function (PT-RBF) complex-valued neural
//! networks.
//!
//! The crate provides:
//!
//! - complex vector/matrix arithmetic and seeded complex-valued samplers
//!   ([`complex`], [`rng`]),
//! - the PT-RBF network model and forward pass ([`net`]),
//! - four parameter-initialization schemes — random, split K-means,
//!   constellation-based, and a variance-matched scheme that sizes every
//!   parameter class from the layer dimensions — plus the dataset
//!   normalizations that scheme relies on ([`init`], [`kmeans`]),
//! - split-complex backpropagation and per-sample SGD ([`train`]),
//! - closed-form moment predictions for kernel inputs and layer outputs,
//!   with Monte-Carlo estimators that check them ([`stats`]),
//! - a synthetic 16-QAM Rayleigh-MIMO regression task generator ([`task`]).
//!
//! The `parallel` feature (default) runs Monte-Carlo trials, batch
//! evaluation, and experiment grids on rayon. The sequential fallback
//! produces bit-identical results: every parallel loop owns one
//! independently-seeded RNG per work item and reduces in index order.

pub mod complex;
pub mod error;
pub mod exec;
pub mod init;
pub mod kmeans;
pub mod net;
pub mod rng;
pub mod stats;
pub mod task;
pub mod train;

pub use complex::{CMat, Cx};
pub use error::{Error, Result};
