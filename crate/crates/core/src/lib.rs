//! Train multilayer-perceptron classifiers with particle swarm optimization,
//! differential evolution or a genetic algorithm, then export the winner as
//! dependency-free Python, Java or JavaScript source.
//!
//! The usual flow:
//!
//! 1. [`data::load_csv`] and [`data::preprocess`] produce a [`data::Dataset`];
//! 2. a [`engine::RunConfig`] picks the optimizer, topology and stopping rule;
//! 3. [`engine::run`] evolves a population until the rule fires;
//! 4. [`export::TrainedModel`] wraps the best genome for saving or export.

pub mod data;
pub mod de;
pub mod engine;
pub mod error;
pub mod export;
pub mod ga;
pub mod mlp;
pub mod pso;
pub mod rng;
pub mod trace;

pub use data::{Dataset, PreprocessPolicy};
pub use engine::{run, Algorithm, Engine, RunConfig, RunOutcome, StopReason, StoppingRule};
pub use error::{Error, Result};
pub use export::{TrainedModel, TrainingMetadata};
pub use mlp::{Activation, Genome, Topology};
