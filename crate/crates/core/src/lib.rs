//! Drug-response regression for non-small-cell lung cancer cell lines.
//!
//! The pipeline reads GDSC screens, keeps the LUAD/LUSC subtypes, cleans and
//! one-hot encodes the categorical annotations, fits a second-order
//! gradient-boosted tree ensemble on LN_IC50, and explains each prediction
//! with exact path-dependent TreeSHAP. The `clinical` module turns a
//! prediction into a sensitivity label and a prompt for an external
//! chat-completion service.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clinical;
pub mod config;
pub mod dataset;
pub mod evaluation;
pub mod explain;
pub mod gbdt;
pub mod matrix;
pub mod persist;
pub mod pipeline;

pub use dataset::{EncodingSchema, FeatureMatrix, GdscRecord};
pub use explain::ShapExplanation;
pub use gbdt::{GbdtModel, HyperParams, RegressionTree};
pub use matrix::DenseMatrix;
