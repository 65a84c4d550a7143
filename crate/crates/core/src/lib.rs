//! Penalized logistic regression for populations split into groups of very
//! different sizes.
//!
//! Three model families share one data layer and one cross-validation engine:
//!
//! * [`lasso`]: L1-penalized logistic regression over a λ path, with per-feature
//!   penalty factors and a fixed offset (proximal Newton + coordinate descent).
//! * [`glinternet`]: first-order interaction model fit by overlapped group-lasso,
//!   so every selected interaction carries both of its main effects.
//! * [`pretrained`]: an overall lasso on all groups whose predictions and support
//!   are transferred to per-group fits through an offset and penalty factors.
//!
//! [`eval`] provides ROC-AUC, paired one-sided DeLong tests and report tables,
//! and [`synth`] generates seeded stratified cohorts with known generating logits.
//!
//! All numerical code is generic over [`Float`]; the `*64` aliases below are the
//! double-precision instantiations used by the command-line tool.

pub mod cv;
pub mod data;
pub mod error;
pub mod eval;
pub mod float;
pub mod glinternet;
pub mod io;
pub mod lasso;
pub mod logistic;
pub mod model;
pub mod pretrained;
pub mod synth;

pub use error::{Error, Result};
pub use float::Float;

pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type StandardizationRecord64 = data::StandardizationRecord<f64>;
pub type LassoPath64 = lasso::LassoPath<f64>;
pub type LassoPath32 = lasso::LassoPath<f32>;
pub type PenaltySpec64 = lasso::PenaltySpec<f64>;
pub type GroupLassoPath64 = glinternet::GroupLassoPath<f64>;
pub type GlinternetModel64 = glinternet::GlinternetModel<f64>;
pub type PretrainedModel64 = pretrained::PretrainedModel<f64>;
pub type CvCurve64 = cv::CvCurve<f64>;
pub type RocCurve64 = eval::RocCurve<f64>;
pub type RocComparison64 = eval::RocComparison<f64>;
pub type SynthConfig64 = synth::SynthConfig<f64>;
