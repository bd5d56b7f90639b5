//! NADE-k: an order-agnostic neural autoregressive density estimator whose
//! conditionals come from `k` unrolled inference iterations of a shared-weight
//! network.
//!
//! The crate provides exact likelihoods under any ordering, ordering
//! ensembles, ancestral and conditional sampling, and a training pipeline
//! (stochastic order-agnostic objective, per-step pretraining, AdaDelta,
//! weight decay and early stopping).

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod numerics;
pub mod sampling;
pub mod training;

pub use error::{CheckpointError, DataError, Error, Result};
pub use model::{Activation, EmpiricalMean, Mask, Model, ModelParams, StructureConfig, Trajectory};
pub use numerics::Rng;
