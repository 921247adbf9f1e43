//! Cross-modal comparison of time series through self-similarity matrices.
//!
//! Speed profiles of simulated vehicle trajectories and Doppler traces from
//! fixed receivers live in unrelated feature spaces, but their SSMs can be
//! compared directly. This crate builds those SSMs, conditions them, and
//! scores pairs with isometry-blind DTW ([`ibdtw`]) or with Wasserstein
//! distances between level-set persistence diagrams ([`tda`]). The [`eval`]
//! module runs the retrieval experiment end to end.

pub mod error;
pub mod eval;
pub mod ibdtw;
pub mod io;
pub mod manifold;
pub mod rf;
pub mod scene;
pub mod ssm;
pub mod tda;

pub use error::{Error, Result};
pub use ssm::{SelfSimilarityMatrix, TimeOrderedPointCloud};
