use serde::{Deserialize, Serialize};

use crate::error::{CageError, Result};

/// An ordered set of unique, case-sensitive labels. A label's position is its index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(CageError::Config(format!("duplicate label `{label}`")));
            }
        }
        Ok(LabelSet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    /// Appends a label if absent and returns its index.
    pub fn insert(&mut self, label: impl Into<String>) -> usize {
        let label = label.into();
        match self.index_of(&label) {
            Some(i) => i,
            None => {
                self.labels.push(label);
                self.labels.len() - 1
            }
        }
    }
}

impl TryFrom<Vec<String>> for LabelSet {
    type Error = CageError;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        LabelSet::new(labels)
    }
}

impl From<LabelSet> for Vec<String> {
    fn from(set: LabelSet) -> Self {
        set.labels
    }
}

/// Which vocabulary a label belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    ObjectClass,
    Material,
    Task,
    State,
    Affordance,
}

impl LabelKind {
    pub fn name(self) -> &'static str {
        match self {
            LabelKind::ObjectClass => "object class",
            LabelKind::Material => "material",
            LabelKind::Task => "task",
            LabelKind::State => "state",
            LabelKind::Affordance => "affordance",
        }
    }
}

/// The label vocabularies every record in a dataset is checked against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabularies {
    pub object_classes: LabelSet,
    pub materials: LabelSet,
    pub tasks: LabelSet,
    pub states: LabelSet,
    pub affordances: LabelSet,
}

pub const DEFAULT_OBJECT_CLASSES: [&str; 5] = ["cup", "spatula", "bowl", "pan", "bottle"];
pub const DEFAULT_MATERIALS: [&str; 7] = [
    "plastic", "metal", "ceramic", "glass", "stone", "paper", "wood",
];
pub const DEFAULT_TASKS: [&str; 7] = [
    "pour", "scoop", "poke", "cut", "lift", "hammer", "handover",
];
pub const DEFAULT_STATES: [&str; 6] = ["hot", "cold", "empty", "filled", "lid_on", "lid_off"];
pub const DEFAULT_AFFORDANCES: [&str; 11] = [
    "contain",
    "cut",
    "display",
    "engine",
    "grasp",
    "hit",
    "pound",
    "support",
    "wrap_grasp",
    "scoop",
    "none",
];

impl Default for Vocabularies {
    fn default() -> Self {
        let set = |labels: &[&str]| LabelSet::new(labels.iter().copied()).expect("unique defaults");
        Vocabularies {
            object_classes: set(&DEFAULT_OBJECT_CLASSES),
            materials: set(&DEFAULT_MATERIALS),
            tasks: set(&DEFAULT_TASKS),
            states: set(&DEFAULT_STATES),
            affordances: set(&DEFAULT_AFFORDANCES),
        }
    }
}

impl Vocabularies {
    pub fn set(&self, kind: LabelKind) -> &LabelSet {
        match kind {
            LabelKind::ObjectClass => &self.object_classes,
            LabelKind::Material => &self.materials,
            LabelKind::Task => &self.tasks,
            LabelKind::State => &self.states,
            LabelKind::Affordance => &self.affordances,
        }
    }

    /// Index of `label` in the vocabulary of `kind`, or an `UnknownLabel` error.
    pub fn index(&self, kind: LabelKind, label: &str) -> Result<usize> {
        self.set(kind)
            .index_of(label)
            .ok_or_else(|| CageError::UnknownLabel {
                set: kind.name(),
                label: label.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_expected_sizes() {
        let v = Vocabularies::default();
        assert_eq!(v.object_classes.len(), 5);
        assert_eq!(v.materials.len(), 7);
        assert_eq!(v.tasks.len(), 7);
        assert_eq!(v.states.len(), 6);
        assert_eq!(v.affordances.len(), 11);
        assert_eq!(v.tasks.index_of("pour"), Some(0));
    }

    #[test]
    fn lookups_are_case_sensitive() {
        let v = Vocabularies::default();
        assert!(v.tasks.contains("pour"));
        assert!(!v.tasks.contains("Pour"));
        assert!(v.index(LabelKind::Task, "fly").is_err());
    }

    #[test]
    fn duplicates_rejected() {
        assert!(LabelSet::new(["a", "b", "a"]).is_err());
        let json = r#"["x","x"]"#;
        assert!(serde_json::from_str::<LabelSet>(json).is_err());
    }

    #[test]
    fn insert_registers_compound_labels() {
        let mut v = Vocabularies::default();
        let i = v.states.insert("filled_hot");
        assert_eq!(i, 6);
        assert_eq!(v.states.insert("filled_hot"), 6);
    }
}
