//! Corpus analytics and classification for interpersonal group relationship
//! (in-group vs out-group) and interpersonal emotion prediction over short
//! utterances.
//!
//! The pipeline runs: synthetic corpus generation -> ingest (filter, label,
//! mask) -> annotation aggregation -> agreement metrics -> model training
//! (majority, sentiment rule, lexicon threshold, NB-SVM, shared-encoder
//! multitask network) -> evaluation with restart aggregation and paired
//! bootstrap tests -> descriptive analysis reports.
//!
//! Numeric code is generic over the [`scalar::Scalar`] type; the `f64`
//! aliases below are what the pipeline itself uses.

pub mod agreement;
pub mod analysis;
pub mod annotation;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod scalar;
pub mod synth;

mod util;

pub use error::{Error, Result};

/// Sparse feature vector in pipeline precision.
pub type SparseVec = features::SparseVector<f64>;
/// NB log-count ratios in pipeline precision.
pub type NbRatios64 = features::NbRatios<f64>;
/// NB-SVM linear model in pipeline precision.
pub type LinearModel64 = models::LinearModel<f64>;
/// Shared-encoder multitask model in pipeline precision.
pub type MultitaskModel64 = models::MultitaskModel<f64>;
/// Binary precision/recall/F1 in pipeline precision.
pub type Prf64 = eval::Prf<f64>;
