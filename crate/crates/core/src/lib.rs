//! Directional bivariate Shapley explanations.
//!
//! A black-box classifier is turned into a coalition game over its input
//! features. The bivariate explanation is a `d x d` matrix whose column `j`
//! holds the Shapley values of the game restricted to coalitions that contain
//! feature `j`. Read as a weighted directed graph it exposes which features
//! make others redundant, which groups are interchangeable, and which
//! features carry the information the model actually relies on.
//!
//! Modules, bottom-up:
//!
//! * [`model`]: datasets, predictors (built-in learners and an external
//!   line-delimited JSON adapter) and baseline masking.
//! * [`utility`]: memoized coalition games, presence filters, a synthetic
//!   game catalogue and exhaustive enumeration.
//! * [`shapley`]: exact, permutation-sampling and kernel-regression
//!   estimators of univariate and bivariate Shapley values.
//! * [`graph`]: explanation and redundancy graphs, SCC condensation,
//!   PageRank, sink/source detection and redundancy ranking.
//! * [`eval`]: masking-based evaluation (post-hoc accuracy, redundancy
//!   masking curves, insertion/deletion AUC, threshold sweeps).

pub mod coalition;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod rng;
pub mod shapley;
pub mod utility;

pub use coalition::Coalition;
pub use error::{Error, Result};
