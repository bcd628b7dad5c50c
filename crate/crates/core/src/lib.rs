//! Exact multiclass AUC metrics, sigmoid-smoothed AUC surrogate losses and a
//! small training stack to compare them against softmax cross-entropy.
//!
//! The crate is organised bottom-up:
//!
//! - [`metrics`]: exact AUC (binary, one-versus-one, one-versus-rest), PR curves,
//!   average precision and hard-decision classification metrics.
//! - [`losses`]: differentiable `aAUC` surrogates and softmax cross-entropy, each
//!   returning the loss value together with its gradient wrt the score matrix.
//! - [`model`]: a tanh MLP with a softmax head, manual backprop and a
//!   finite-difference gradient checker.
//! - [`train`]: Adam, the exponential learning-rate schedule, minibatching and the
//!   training loop with best-epoch selection.
//! - [`calibration`]: multinomial logistic regression fitted on validation scores.
//! - [`data`]: synthetic Gaussian benchmarks, CSV ingestion and min-max scaling.
//! - [`experiment`]: repeated paired experiments, aggregation and report output.
//!
//! All arithmetic is `f64`. Every stochastic step is driven by an explicit seed.

pub mod calibration;
pub mod data;
mod error;
pub mod experiment;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod train;
mod types;

pub use error::{Error, Result};
pub use types::{argmax_rows, LabelVector, ScoreMatrix};

pub use calibration::{calibrate_predict, fit_calibrator, CalibratorParams, SgdConfig};
pub use data::{Dataset, NormalizationParams, SyntheticSpec};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentSummary};
pub use losses::{LossKind, LossValueAndGrad, SigmoidSlope};
pub use metrics::{BinaryScoreSets, MetricsReport, PrCurve};
pub use model::{ForwardCache, Gradients, MlpParams};
pub use train::{TrainConfig, TrainHistory};
