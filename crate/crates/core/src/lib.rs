//! Market-value modelling for football players from match statistics.
//!
//! The crate ingests per-match statistics, market valuations and player
//! profiles, engineers per-minute rates and ratio features over a look-back
//! window, and fits either a sparse linear model ([`lasso`]) or a regression
//! forest ([`forest`]) on the log of the market value. [`evaluation`] scores
//! models by k-fold cross-validation, [`ranking`] compares rankings, and
//! [`synth`] generates corpora with planted structure for testing.

pub mod config;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod lasso;
pub mod model;
pub mod pipeline;
pub mod ranking;
pub mod schema;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
pub use features::{FeatureTable, NormStats, WindowSpec};
pub use forest::{ForestConfig, ForestModel};
pub use ingest::{Corpus, PlayerId};
pub use lasso::{LassoConfig, LassoModel, ObjectiveScaling};
pub use model::Regressor;
pub use schema::PositionCode;
pub use tree::{Tree, TreeConfig};
