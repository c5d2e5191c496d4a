use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::vocab::{LabelKind, Vocabularies};
use crate::error::{CageError, Result};

pub type Point3 = [f64; 3];

/// Maximum deviation of a grasp orientation quaternion's norm from 1.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub affordance: String,
    pub material: String,
    pub point_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartLabeledObject {
    pub object_id: String,
    pub object_class: String,
    pub points: Vec<Point3>,
    pub parts: Vec<Part>,
}

impl PartLabeledObject {
    /// Part index owning each point; `None` for points that belong to no part.
    pub fn point_owners(&self) -> Vec<Option<usize>> {
        let mut owners = vec![None; self.points.len()];
        for (p, part) in self.parts.iter().enumerate() {
            for &i in &part.point_indices {
                if let Some(slot) = owners.get_mut(i) {
                    *slot = Some(p);
                }
            }
        }
        owners
    }

    pub fn has_affordance(&self, affordance: &str) -> bool {
        self.parts.iter().any(|p| p.affordance == affordance)
    }

    pub(crate) fn check(&self, vocab: &Vocabularies) -> Result<()> {
        let fail = |msg: String| Err(CageError::Invariant(format!("object `{}`: {msg}", self.object_id)));
        vocab.index(LabelKind::ObjectClass, &self.object_class)?;
        if self.parts.is_empty() {
            return fail("has no parts".into());
        }
        if self.points.iter().flatten().any(|c| !c.is_finite()) {
            return fail("non-finite point coordinate".into());
        }
        let mut seen = HashSet::new();
        for (p, part) in self.parts.iter().enumerate() {
            vocab.index(LabelKind::Affordance, &part.affordance)?;
            vocab.index(LabelKind::Material, &part.material)?;
            if part.point_indices.is_empty() {
                return fail(format!("part {p} has no points"));
            }
            for &i in &part.point_indices {
                if i >= self.points.len() {
                    return fail(format!("part {p} point index {i} out of range"));
                }
                if !seen.insert(i) {
                    return fail(format!("point {i} belongs to more than one part"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub context_id: String,
    pub task: String,
    pub state: String,
    pub object_id: String,
}

/// Three-class grasp suitability. The discriminant is the class index used by the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspLabel {
    Suitable = 0,
    Neutral = 1,
    NotSuitable = 2,
}

impl GraspLabel {
    pub const ALL: [GraspLabel; 3] = [GraspLabel::Suitable, GraspLabel::Neutral, GraspLabel::NotSuitable];

    pub fn class_index(self) -> usize {
        self as usize
    }

    pub fn from_class_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GraspLabel::Suitable => "suitable",
            GraspLabel::Neutral => "neutral",
            GraspLabel::NotSuitable => "not_suitable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledGrasp {
    pub position: Point3,
    /// Unit quaternion `(w, x, y, z)`.
    pub orientation: [f64; 4],
    pub label: GraspLabel,
}

impl LabeledGrasp {
    pub fn quaternion_norm(&self) -> f64 {
        self.orientation.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub vocabularies: Vocabularies,
    pub objects: Vec<PartLabeledObject>,
    pub contexts: Vec<Context>,
    pub grasps: BTreeMap<String, Vec<LabeledGrasp>>,
    /// Seed of the generator run that produced the data, if any.
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn object(&self, object_id: &str) -> Option<&PartLabeledObject> {
        self.objects.iter().find(|o| o.object_id == object_id)
    }

    pub fn context(&self, context_id: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.context_id == context_id)
    }

    /// The context and the object it refers to.
    pub fn lookup(&self, context_id: &str) -> Result<(&Context, &PartLabeledObject)> {
        let ctx = self
            .context(context_id)
            .ok_or_else(|| CageError::Invariant(format!("unknown context `{context_id}`")))?;
        let object = self
            .object(&ctx.object_id)
            .ok_or_else(|| CageError::Invariant(format!("unknown object `{}`", ctx.object_id)))?;
        Ok((ctx, object))
    }

    pub fn object_index(&self) -> HashMap<&str, &PartLabeledObject> {
        self.objects.iter().map(|o| (o.object_id.as_str(), o)).collect()
    }

    pub fn grasps_for(&self, context_id: &str) -> &[LabeledGrasp] {
        self.grasps.get(context_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_grasps(&self) -> usize {
        self.grasps.values().map(Vec::len).sum()
    }

    /// Checks every type invariant of the dataset.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for object in &self.objects {
            if !ids.insert(object.object_id.as_str()) {
                return Err(CageError::Invariant(format!("duplicate object id `{}`", object.object_id)));
            }
            object.check(&self.vocabularies)?;
        }
        let mut context_ids = HashSet::new();
        for ctx in &self.contexts {
            if !context_ids.insert(ctx.context_id.as_str()) {
                return Err(CageError::Invariant(format!("duplicate context id `{}`", ctx.context_id)));
            }
            self.vocabularies.index(LabelKind::Task, &ctx.task)?;
            self.vocabularies.index(LabelKind::State, &ctx.state)?;
            if !ids.contains(ctx.object_id.as_str()) {
                return Err(CageError::Invariant(format!(
                    "context `{}` references unknown object `{}`",
                    ctx.context_id, ctx.object_id
                )));
            }
            let grasps = self.grasps_for(&ctx.context_id);
            if grasps.is_empty() {
                return Err(CageError::Invariant(format!("context `{}` has no grasps", ctx.context_id)));
            }
            for g in grasps {
                if g.position.iter().chain(&g.orientation).any(|c| !c.is_finite()) {
                    return Err(CageError::Invariant(format!(
                        "context `{}` has a non-finite grasp",
                        ctx.context_id
                    )));
                }
                if (g.quaternion_norm() - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
                    return Err(CageError::Invariant(format!(
                        "context `{}` has a grasp with quaternion norm {}",
                        ctx.context_id,
                        g.quaternion_norm()
                    )));
                }
            }
        }
        if let Some(orphan) = self.grasps.keys().find(|k| !context_ids.contains(k.as_str())) {
            return Err(CageError::Invariant(format!("grasps reference unknown context `{orphan}`")));
        }
        Ok(())
    }
}
