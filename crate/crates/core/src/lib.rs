//! Unsupervised, self-adaptive CCA-based auditory attention decoding.
//!
//! The crate provides the numeric core: lag-embedded segment handling,
//! block covariance accumulation, a symmetric-definite generalized
//! eigensolver, correlation scoring, a Gaussian score-pair labeler, the
//! six training procedures, and a synthetic data generator with planted
//! attention labels.
//!
//! Everything is generic over the [`Scalar`] floating-point type; the
//! aliases at the crate root pin the common `f64` instantiation.

pub mod covariance;
pub mod error;
pub mod io;
pub mod labeler;
pub mod pencil;
pub mod scalar;
pub mod scorer;
pub mod signal;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use signal::{cut_segments, Assignment, LagSpec};
pub use synth::SynthConfig;
pub use trainer::{Method, TrainConfig};

/// `f64` instantiations of the core types.
pub type TimeSeries = signal::TimeSeries<f64>;
pub type SegmentSet = signal::SegmentSet<f64>;
pub type CcaModel = scorer::CcaModel<f64>;
pub type ScorePair = scorer::ScorePair<f64>;
pub type SoftLabels = labeler::SoftLabels<f64>;
pub type CorrelationModel = labeler::CorrelationModel<f64>;
pub type TrainResult = trainer::TrainResult<f64>;
pub type SynthDataset = synth::SynthDataset<f64>;
