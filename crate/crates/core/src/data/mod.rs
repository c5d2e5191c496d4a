//! Dataset schema, vocabularies, file format and the synthetic generator.

mod generator;
mod io;
mod rules;
mod types;
mod vocab;

pub use generator::{generate_synthetic, rule_label, GeneratorConfig, SyntheticDataset};
pub use io::{dataset_from_str, dataset_to_string, load_dataset, round_sig9, save_dataset, DATASET_FORMAT, TOOL_VERSION};
pub use rules::{PartCondition, Pattern, Rule, RuleQuery, RuleTable};
pub use types::{Context, Dataset, GraspLabel, LabeledGrasp, Part, PartLabeledObject, Point3, QUATERNION_NORM_TOLERANCE};
pub use vocab::{LabelKind, LabelSet, Vocabularies};
pub use vocab::{DEFAULT_AFFORDANCES, DEFAULT_MATERIALS, DEFAULT_OBJECT_CLASSES, DEFAULT_STATES, DEFAULT_TASKS};
