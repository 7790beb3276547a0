//! Joint training of a neural black-box and a linear surrogate that explains it.
//!
//! The black-box is pushed along the min-norm convex combination of its predictive and
//! fidelity gradients (two-objective MGDA) while the surrogate follows the black-box by
//! least squares. Baselines, ablations, evaluation metrics, data loading and an
//! experiment harness live alongside.

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod moo;
pub mod nn;
pub mod optim;
pub mod seeds;
pub mod surrogate;
pub mod trainers;

pub use checkpoint::Checkpoint;
pub use data::{Dataset, SplitTag, Task};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector};
pub use losses::LossKind;
pub use metrics::{NeighborhoodKind, NeighborhoodSpec, SurrogateProvider};
pub use moo::{AlphaSolution, MetricPoint};
pub use nn::{Activation, GradientVector, MlpModel, OutputKind};
pub use optim::AdamState;
pub use surrogate::{FeatureImportance, FeatureWeight, LinearSurrogate, SurrogateExport};
pub use trainers::{Method, TrainConfig, TrainOutcome, TrainReport};
