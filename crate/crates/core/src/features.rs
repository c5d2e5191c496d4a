//! Semantic feature extraction and the wide (sparse one-hot) and deep
//! (categorical index) encodings fed to the network.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::data::{Context, LabelKind, LabeledGrasp, PartLabeledObject, Vocabularies};
use crate::error::{CageError, Result};
use crate::geometry::PartLocator;

/// The symbolic description of one (context, grasp) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemanticFeatureVector {
    pub task: String,
    pub state: String,
    pub grasp_affordance: String,
    pub grasp_material: String,
    /// `(affordance, material)` of every object part, in object order.
    pub parts: Vec<(String, String)>,
}

impl SemanticFeatureVector {
    /// Number of symbolic slots: four scalar features plus two per part.
    pub fn dimension(&self) -> usize {
        4 + 2 * self.parts.len()
    }
}

/// Extracts features with a locator already built for `object`.
pub fn extract_with(
    locator: &PartLocator,
    context: &Context,
    object: &PartLabeledObject,
    grasp: &LabeledGrasp,
) -> Result<SemanticFeatureVector> {
    let part = &object.parts[locator.part_at(&grasp.position)?];
    Ok(SemanticFeatureVector {
        task: context.task.clone(),
        state: context.state.clone(),
        grasp_affordance: part.affordance.clone(),
        grasp_material: part.material.clone(),
        parts: object
            .parts
            .iter()
            .map(|p| (p.affordance.clone(), p.material.clone()))
            .collect(),
    })
}

pub fn extract(context: &Context, object: &PartLabeledObject, grasp: &LabeledGrasp) -> Result<SemanticFeatureVector> {
    extract_with(&PartLocator::new(object)?, context, object, grasp)
}

/// Optional feature-cross blocks appended to the wide input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossConfig {
    pub task_x_affordance: bool,
    pub state_x_affordance: bool,
    pub task_x_material: bool,
}

impl CrossConfig {
    pub fn all() -> Self {
        CrossConfig {
            task_x_affordance: true,
            state_x_affordance: true,
            task_x_material: true,
        }
    }
}

/// Offsets of every block in the wide vector:
/// task | state | grasp affordance | grasp material | part affordances | part materials | crosses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideLayout {
    pub task: Range<usize>,
    pub state: Range<usize>,
    pub grasp_affordance: Range<usize>,
    pub grasp_material: Range<usize>,
    pub part_affordances: Range<usize>,
    pub part_materials: Range<usize>,
    pub task_x_affordance: Option<Range<usize>>,
    pub state_x_affordance: Option<Range<usize>>,
    pub task_x_material: Option<Range<usize>>,
    pub len: usize,
}

impl WideLayout {
    pub fn new(vocab: &Vocabularies, crosses: CrossConfig) -> Self {
        let (nt, ns) = (vocab.tasks.len(), vocab.states.len());
        let (na, nm) = (vocab.affordances.len(), vocab.materials.len());
        let mut at = 0;
        let mut block = |size: usize| {
            let r = at..at + size;
            at += size;
            r
        };
        let task = block(nt);
        let state = block(ns);
        let grasp_affordance = block(na);
        let grasp_material = block(nm);
        let part_affordances = block(na);
        let part_materials = block(nm);
        let task_x_affordance = crosses.task_x_affordance.then(|| block(nt * na));
        let state_x_affordance = crosses.state_x_affordance.then(|| block(ns * na));
        let task_x_material = crosses.task_x_material.then(|| block(nt * nm));
        WideLayout {
            task,
            state,
            grasp_affordance,
            grasp_material,
            part_affordances,
            part_materials,
            task_x_affordance,
            state_x_affordance,
            task_x_material,
            len: at,
        }
    }

    fn in_block(block: &Option<Range<usize>>, i: usize) -> bool {
        block.as_ref().is_some_and(|r| r.contains(&i))
    }

    /// Whether wide index `i` carries task information.
    pub fn is_task_feature(&self, i: usize) -> bool {
        self.task.contains(&i) || Self::in_block(&self.task_x_affordance, i) || Self::in_block(&self.task_x_material, i)
    }

    /// Whether wide index `i` carries state information.
    pub fn is_state_feature(&self, i: usize) -> bool {
        self.state.contains(&i) || Self::in_block(&self.state_x_affordance, i)
    }
}

/// Binary sparse vector: the sorted set of active indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WideEncoding {
    pub active: Vec<usize>,
    pub len: usize,
}

/// Categorical indices for the embedding path.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepEncoding {
    pub task: usize,
    pub state: usize,
    pub grasp_affordance: usize,
    pub grasp_material: usize,
    /// `(affordance index, material index)` per part, in object order.
    pub parts: Vec<(usize, usize)>,
    /// Extra dense inputs appended to the deep input; empty by default.
    pub dense: Vec<f64>,
}

struct Indices {
    task: usize,
    state: usize,
    affordance: usize,
    material: usize,
    parts: Vec<(usize, usize)>,
}

fn indices(x: &SemanticFeatureVector, vocab: &Vocabularies) -> Result<Indices> {
    Ok(Indices {
        task: vocab.index(LabelKind::Task, &x.task)?,
        state: vocab.index(LabelKind::State, &x.state)?,
        affordance: vocab.index(LabelKind::Affordance, &x.grasp_affordance)?,
        material: vocab.index(LabelKind::Material, &x.grasp_material)?,
        parts: x
            .parts
            .iter()
            .map(|(a, m)| Ok((vocab.index(LabelKind::Affordance, a)?, vocab.index(LabelKind::Material, m)?)))
            .collect::<Result<_>>()?,
    })
}

pub fn encode_wide(x: &SemanticFeatureVector, vocab: &Vocabularies, crosses: CrossConfig) -> Result<WideEncoding> {
    let layout = WideLayout::new(vocab, crosses);
    encode_wide_with(&layout, x, vocab)
}

pub fn encode_wide_with(layout: &WideLayout, x: &SemanticFeatureVector, vocab: &Vocabularies) -> Result<WideEncoding> {
    let ix = indices(x, vocab)?;
    let (na, nm) = (vocab.affordances.len(), vocab.materials.len());
    let mut active = vec![
        layout.task.start + ix.task,
        layout.state.start + ix.state,
        layout.grasp_affordance.start + ix.affordance,
        layout.grasp_material.start + ix.material,
    ];
    for &(a, m) in &ix.parts {
        active.push(layout.part_affordances.start + a);
        active.push(layout.part_materials.start + m);
    }
    if let Some(r) = &layout.task_x_affordance {
        active.push(r.start + ix.task * na + ix.affordance);
    }
    if let Some(r) = &layout.state_x_affordance {
        active.push(r.start + ix.state * na + ix.affordance);
    }
    if let Some(r) = &layout.task_x_material {
        active.push(r.start + ix.task * nm + ix.material);
    }
    active.sort_unstable();
    active.dedup();
    Ok(WideEncoding {
        active,
        len: layout.len,
    })
}

pub fn encode_deep(x: &SemanticFeatureVector, vocab: &Vocabularies) -> Result<DeepEncoding> {
    let ix = indices(x, vocab)?;
    Ok(DeepEncoding {
        task: ix.task,
        state: ix.state,
        grasp_affordance: ix.affordance,
        grasp_material: ix.material,
        parts: ix.parts,
        dense: Vec::new(),
    })
}

/// Inverse of [`encode_deep`] (the dense passthrough is dropped).
pub fn decode_deep(enc: &DeepEncoding, vocab: &Vocabularies) -> Result<SemanticFeatureVector> {
    let get = |kind: LabelKind, i: usize| {
        vocab
            .set(kind)
            .label(i)
            .map(str::to_string)
            .ok_or(CageError::IndexOutOfRange {
                what: kind.name(),
                index: i,
                len: vocab.set(kind).len(),
            })
    };
    Ok(SemanticFeatureVector {
        task: get(LabelKind::Task, enc.task)?,
        state: get(LabelKind::State, enc.state)?,
        grasp_affordance: get(LabelKind::Affordance, enc.grasp_affordance)?,
        grasp_material: get(LabelKind::Material, enc.grasp_material)?,
        parts: enc
            .parts
            .iter()
            .map(|&(a, m)| Ok((get(LabelKind::Affordance, a)?, get(LabelKind::Material, m)?)))
            .collect::<Result<_>>()?,
    })
}

/// Features and label of one grasp, ready for the network.
#[derive(Debug, Clone)]
pub struct EncodedExample {
    pub wide: WideEncoding,
    pub deep: DeepEncoding,
    pub label: crate::data::GraspLabel,
}

/// Encodes every grasp of `context` in grasp order.
pub fn encode_context(
    context: &Context,
    object: &PartLabeledObject,
    grasps: &[LabeledGrasp],
    vocab: &Vocabularies,
    layout: &WideLayout,
) -> Result<Vec<EncodedExample>> {
    let locator = PartLocator::new(object)?;
    grasps
        .iter()
        .map(|g| {
            let x = extract_with(&locator, context, object, g)?;
            Ok(EncodedExample {
                wide: encode_wide_with(layout, &x, vocab)?,
                deep: encode_deep(&x, vocab)?,
                label: g.label,
            })
        })
        .collect()
}
