//! Train/test partitions for the three evaluation protocols.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{CageError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    ContextAware,
    InstanceGeneralization,
    ClassGeneralization,
}

impl Protocol {
    pub fn flag(self) -> &'static str {
        match self {
            Protocol::ContextAware => "context-aware",
            Protocol::InstanceGeneralization => "instance",
            Protocol::ClassGeneralization => "class",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for Protocol {
    type Err = CageError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "context-aware" | "context_aware" => Ok(Protocol::ContextAware),
            "instance" | "instance-generalization" | "instance_generalization" => Ok(Protocol::InstanceGeneralization),
            "class" | "class-generalization" | "class_generalization" => Ok(Protocol::ClassGeneralization),
            _ => Err(CageError::Config(format!("unknown protocol `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub protocol: Protocol,
    pub train_fraction: f64,
    /// Class held out by the class protocol; `None` cycles through the classes.
    pub held_out_class: Option<String>,
    pub seed: u64,
    pub repetitions: usize,
}

impl SplitSpec {
    pub fn new(protocol: Protocol, seed: u64) -> Self {
        SplitSpec {
            protocol,
            train_fraction: 0.7,
            held_out_class: None,
            seed,
            repetitions: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CageError::Config(format!("train fraction {} is not in (0, 1)", self.train_fraction)));
        }
        if self.repetitions == 0 {
            return Err(CageError::Config("at least one repetition is required".into()));
        }
        Ok(())
    }

    /// Seed of repetition `rep`; distinct for every repetition.
    pub fn repetition_seed(&self, rep: usize) -> u64 {
        self.seed.wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub repetition: usize,
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub held_out_class: Option<String>,
}

/// Size of the training share of `n` items, leaving at least one on each side.
fn train_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n - 1)
}

pub fn make_splits(dataset: &Dataset, spec: &SplitSpec) -> Result<Vec<Split>> {
    spec.validate()?;
    let classes: Vec<String> = dataset
        .objects
        .iter()
        .map(|o| o.object_class.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut class_cycle = classes.clone();
    class_cycle.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));

    (0..spec.repetitions)
        .map(|rep| {
            let seed = spec.repetition_seed(rep);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut held_out_class = None;
            let train_ids: BTreeSet<&str> = match spec.protocol {
                Protocol::ContextAware => {
                    let n = dataset.contexts.len();
                    if n < 2 {
                        return Err(CageError::InsufficientData(format!("{n} contexts; need at least 2")));
                    }
                    let mut ids: Vec<&str> = dataset.contexts.iter().map(|c| c.context_id.as_str()).collect();
                    ids.shuffle(&mut rng);
                    ids.truncate(train_count(n, spec.train_fraction));
                    ids.into_iter().collect()
                }
                Protocol::InstanceGeneralization => {
                    let train_objects = instance_split(dataset, spec.train_fraction, &mut rng)?;
                    dataset
                        .contexts
                        .iter()
                        .filter(|c| train_objects.contains(c.object_id.as_str()))
                        .map(|c| c.context_id.as_str())
                        .collect()
                }
                Protocol::ClassGeneralization => {
                    if classes.len() < 2 {
                        return Err(CageError::InsufficientData(format!(
                            "{} object classes; need at least 2",
                            classes.len()
                        )));
                    }
                    let class = match &spec.held_out_class {
                        Some(c) if classes.contains(c) => c.clone(),
                        Some(c) => return Err(CageError::InsufficientData(format!("no objects of class `{c}`"))),
                        None => class_cycle[rep % class_cycle.len()].clone(),
                    };
                    let held: BTreeSet<&str> = dataset
                        .objects
                        .iter()
                        .filter(|o| o.object_class == class)
                        .map(|o| o.object_id.as_str())
                        .collect();
                    held_out_class = Some(class);
                    dataset
                        .contexts
                        .iter()
                        .filter(|c| !held.contains(c.object_id.as_str()))
                        .map(|c| c.context_id.as_str())
                        .collect()
                }
            };
            let (train, test) = dataset
                .contexts
                .iter()
                .map(|c| c.context_id.clone())
                .partition(|id| train_ids.contains(id.as_str()));
            Ok(Split {
                repetition: rep,
                seed,
                train,
                test,
                held_out_class,
            })
        })
        .collect()
}

/// Training objects: per class, a shuffled share of its instances, so train and
/// test objects are disjoint while every class appears on both sides.
fn instance_split<'a>(dataset: &'a Dataset, fraction: f64, rng: &mut ChaCha8Rng) -> Result<BTreeSet<&'a str>> {
    let mut by_class: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for o in &dataset.objects {
        by_class.entry(&o.object_class).or_default().push(&o.object_id);
    }
    // every (task, class) pair must see both train and test instances
    let mut instances_per_task_class: BTreeMap<(&str, &str), BTreeSet<&str>> = BTreeMap::new();
    for c in &dataset.contexts {
        let class = dataset
            .object(&c.object_id)
            .map(|o| o.object_class.as_str())
            .unwrap_or_default();
        instances_per_task_class
            .entry((&c.task, class))
            .or_default()
            .insert(&c.object_id);
    }
    if let Some(((task, class), objs)) = instances_per_task_class.iter().find(|(_, o)| o.len() < 2) {
        return Err(CageError::InsufficientData(format!(
            "{} instance(s) of `{class}` for task `{task}`; need at least 2",
            objs.len()
        )));
    }
    let mut train = BTreeSet::new();
    for objs in by_class.values_mut() {
        if objs.len() < 2 {
            continue;
        }
        objs.shuffle(rng);
        train.extend(objs.iter().take(train_count(objs.len(), fraction)).copied());
    }
    Ok(train)
}
