//! Context-aware semantic grasp ranking.
//!
//! Grasp candidates are described by the affordance and material of the part
//! they land on, together with the task, the object state and the object's
//! parts. A Wide & Deep network scores each candidate's suitability, and the
//! evaluation tools compare its rankings against simple baselines.

pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod model;
pub mod numerics;

pub use data::{Context, Dataset, GraspLabel, LabeledGrasp, PartLabeledObject, Vocabularies};
pub use error::{CageError, Result};
pub use features::{CrossConfig, DeepEncoding, SemanticFeatureVector, WideEncoding};
pub use model::{CageModel, ModelConfig};
