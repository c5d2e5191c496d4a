//! Wide & Deep grasp-suitability classifier.

mod config;
mod network;
mod train;

pub use config::{Ablation, ModelConfig};
pub use network::{CageModel, NUM_CLASSES};
pub use train::{encode_contexts, train, train_examples, TrainOutcome};
