//! Context-agnostic random ranking (CA) and the affordance frequency table (FT).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Context, Dataset, GraspLabel, LabeledGrasp, PartLabeledObject};
use crate::error::{CageError, Result};
use crate::geometry::PartLocator;

/// Uniformly random order of `n` grasps, as indices into the grasp list.
pub fn ca_rank(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(CageError::Empty("grasp list"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(order)
}

/// Label counts `[suitable, neutral, not suitable]`.
pub type LabelCounts = [u64; 3];

type AffordanceCounts = BTreeMap<String, LabelCounts>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    /// Keyed by `(task, state, object class)`, then grasp affordance.
    pub counts: BTreeMap<(String, String, String), AffordanceCounts>,
    pub by_task_class: BTreeMap<(String, String), AffordanceCounts>,
    pub by_task: BTreeMap<String, AffordanceCounts>,
    pub global: AffordanceCounts,
}

fn bump(map: &mut AffordanceCounts, affordance: &str, label: GraspLabel) {
    map.entry(affordance.to_string()).or_default()[label.class_index()] += 1;
}

/// Laplace-smoothed suitability `(S + 0.5 N + 1) / (S + N + NS + 3)`.
pub fn smoothed_score(c: &LabelCounts) -> f64 {
    let total = (c[0] + c[1] + c[2]) as f64;
    (c[0] as f64 + 0.5 * c[1] as f64 + 1.0) / (total + 3.0)
}

impl FrequencyTable {
    pub fn add(&mut self, task: &str, state: &str, class: &str, affordance: &str, label: GraspLabel) {
        let key = (task.to_string(), state.to_string(), class.to_string());
        bump(self.counts.entry(key).or_default(), affordance, label);
        bump(
            self.by_task_class.entry((task.to_string(), class.to_string())).or_default(),
            affordance,
            label,
        );
        bump(self.by_task.entry(task.to_string()).or_default(), affordance, label);
        bump(&mut self.global, affordance, label);
    }

    /// Counts at the most specific level that has seen this affordance; zeros if none has.
    pub fn lookup(&self, task: &str, state: &str, class: &str, affordance: &str) -> LabelCounts {
        let levels = [
            self.counts.get(&(task.to_string(), state.to_string(), class.to_string())),
            self.by_task_class.get(&(task.to_string(), class.to_string())),
            self.by_task.get(task),
            Some(&self.global),
        ];
        levels
            .into_iter()
            .flatten()
            .find_map(|m| m.get(affordance).copied())
            .unwrap_or_default()
    }

    pub fn score(&self, context: &Context, class: &str, affordance: &str) -> f64 {
        smoothed_score(&self.lookup(&context.task, &context.state, class, affordance))
    }
}

/// Tallies label occurrences per (context key, grasp affordance) over the listed contexts.
pub fn ft_train(dataset: &Dataset, context_ids: &[String]) -> Result<FrequencyTable> {
    if context_ids.is_empty() {
        return Err(CageError::Empty("training split"));
    }
    let mut table = FrequencyTable::default();
    for id in context_ids {
        let (ctx, object) = dataset.lookup(id)?;
        let locator = PartLocator::new(object)?;
        for g in dataset.grasps_for(id) {
            let part = &object.parts[locator.part_at(&g.position)?];
            table.add(&ctx.task, &ctx.state, &object.object_class, &part.affordance, g.label);
        }
    }
    Ok(table)
}

/// FT score of every grasp, in grasp order.
pub fn ft_scores(
    table: &FrequencyTable,
    context: &Context,
    object: &PartLabeledObject,
    grasps: &[LabeledGrasp],
) -> Result<Vec<f64>> {
    let locator = PartLocator::new(object)?;
    grasps
        .iter()
        .map(|g| {
            let part = &object.parts[locator.part_at(&g.position)?];
            Ok(table.score(context, &object.object_class, &part.affordance))
        })
        .collect()
}

/// Grasp indices ordered by descending FT score, ties by original order.
pub fn ft_rank(
    table: &FrequencyTable,
    context: &Context,
    object: &PartLabeledObject,
    grasps: &[LabeledGrasp],
) -> Result<Vec<usize>> {
    if grasps.is_empty() {
        return Err(CageError::Empty("grasp list"));
    }
    Ok(crate::eval::rank_by_scores(&ft_scores(table, context, object, grasps)?))
}
