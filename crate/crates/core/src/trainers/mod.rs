//! Training procedures: joint MGDA training, its baselines and its ablations.
//!
//! Every method shares one loop ([`engine`]): per mini-batch the surrogate takes an
//! Adam step on Point Fidelity with the black-box held fixed, then the black-box takes
//! an Adam step along a method-specific direction built from the predictive and
//! fidelity gradients.

mod config;
mod engine;
mod local;
mod report;

pub use config::{Method, TrainConfig};
pub use engine::{
    train, train_black_box, train_jdist, train_joint_moo, train_joint_moo_observed, train_jsep,
    train_linear, train_stl, train_weighted, train_weighted_from, AlphaSchedule, StepInfo,
    TrainOutcome,
};
pub use local::{fit_local_surrogate, LocalFit, LocalSurrogates};
pub use report::{EpochRecord, FinalMetrics, StopReason, TrainReport};
