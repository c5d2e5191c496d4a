//! Rule-labelled synthetic datasets.
//!
//! Objects are assembled from primitive shapes (cylinders, boxes, rings), one
//! point cluster per part. Grasp candidates are sampled per object and shared
//! by all of that object's contexts; each grasp's label is whatever the rule
//! table says for the part it lands on.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::round_sig9;
use super::rules::{RuleQuery, RuleTable};
use super::types::{Context, Dataset, LabeledGrasp, Part, PartLabeledObject, Point3};
use super::vocab::Vocabularies;
use crate::error::{CageError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub objects_per_class: usize,
    pub grasps_per_context: usize,
    /// Contexts generated for every (object, task) pair. States are drawn without
    /// replacement until the state vocabulary is exhausted.
    pub contexts_per_task: usize,
    pub points_per_part: usize,
    pub rules: RuleTable,
    pub vocabularies: Vocabularies,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            objects_per_class: 8,
            grasps_per_context: 20,
            contexts_per_task: 2,
            points_per_part: 48,
            rules: RuleTable::household(),
            vocabularies: Vocabularies::default(),
        }
    }
}

/// A generated dataset plus the part each grasp was placed on.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    /// Object id -> index of the part each of the object's grasp candidates was sampled on.
    pub grasp_parts: BTreeMap<String, Vec<usize>>,
}

impl SyntheticDataset {
    /// Ground-truth part index for every grasp of `context_id`, in grasp order.
    pub fn parts_for_context(&self, context_id: &str) -> Option<&[usize]> {
        let ctx = self.dataset.context(context_id)?;
        self.grasp_parts.get(&ctx.object_id).map(Vec::as_slice)
    }
}

/// Labels a grasp on `part` of `object` under `context` with the rule table.
pub fn rule_label(rules: &RuleTable, context: &Context, object: &PartLabeledObject, part: usize) -> super::GraspLabel {
    let affordances: Vec<&str> = object.parts.iter().map(|p| p.affordance.as_str()).collect();
    let part = &object.parts[part];
    rules.label(&RuleQuery {
        task: &context.task,
        state: &context.state,
        grasp_affordance: &part.affordance,
        grasp_material: &part.material,
        part_affordances: &affordances,
    })
}

struct PartSpec {
    affordance: &'static str,
    material: &'static str,
    shape: Shape,
}

enum Shape {
    /// Cylinder side surface around the z axis.
    Tube { radius: f64, z0: f64, z1: f64 },
    /// Filled disk at height z.
    Disk { radius: f64, z: f64 },
    Cuboid { min: Point3, max: Point3 },
}

impl Shape {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Point3 {
        match *self {
            Shape::Tube { radius, z0, z1 } => {
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                [radius * theta.cos(), radius * theta.sin(), rng.random_range(z0..z1)]
            }
            Shape::Disk { radius, z } => {
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let r = radius * rng.random::<f64>().sqrt();
                [r * theta.cos(), r * theta.sin(), z]
            }
            Shape::Cuboid { min, max } => [
                rng.random_range(min[0]..max[0]),
                rng.random_range(min[1]..max[1]),
                rng.random_range(min[2]..max[2]),
            ],
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

fn template(class: &str, rng: &mut ChaCha8Rng) -> Result<Vec<PartSpec>> {
    let spec = |affordance, material, shape| PartSpec {
        affordance,
        material,
        shape,
    };
    let parts = match class {
        "cup" => {
            let r = rng.random_range(0.035..0.05);
            let h = rng.random_range(0.08..0.12);
            let m = pick(rng, &["ceramic", "plastic", "glass", "metal", "paper"]);
            let mut parts = vec![
                spec("wrap_grasp", m, Shape::Tube { radius: r, z0: 0.0, z1: 0.7 * h }),
                spec("contain", m, Shape::Tube { radius: r, z0: 0.82 * h, z1: h }),
            ];
            if rng.random_bool(0.7) {
                let min = [r + 0.012, -0.005, 0.25 * h];
                let max = [r + 0.03, 0.005, 0.65 * h];
                parts.push(spec("grasp", m, Shape::Cuboid { min, max }));
            }
            parts
        }
        "bowl" => {
            let r = rng.random_range(0.06..0.09);
            let h = rng.random_range(0.04..0.07);
            let m = pick(rng, &["ceramic", "plastic", "metal", "wood", "glass", "stone"]);
            vec![
                spec("wrap_grasp", m, Shape::Tube { radius: r, z0: 0.0, z1: 0.55 * h }),
                spec("contain", m, Shape::Tube { radius: r, z0: 0.72 * h, z1: h }),
            ]
        }
        "pan" => {
            let r = rng.random_range(0.1..0.14);
            let len = rng.random_range(0.12..0.18);
            let body = pick(rng, &["metal", "stone"]);
            let handle = pick(rng, &["metal", "wood", "plastic"]);
            vec![
                spec("contain", body, Shape::Disk { radius: r, z: 0.0 }),
                spec(
                    "grasp",
                    handle,
                    Shape::Cuboid {
                        min: [r + 0.02, -0.012, 0.0],
                        max: [r + 0.02 + len, 0.012, 0.02],
                    },
                ),
            ]
        }
        "spatula" => {
            let len = rng.random_range(0.12..0.18);
            let handle = pick(rng, &["wood", "plastic", "metal"]);
            let blade = pick(rng, &["metal", "plastic", "wood"]);
            let head = if rng.random_bool(0.5) { "scoop" } else { "support" };
            vec![
                spec(
                    "grasp",
                    handle,
                    Shape::Cuboid {
                        min: [0.0, -0.008, 0.0],
                        max: [len, 0.008, 0.01],
                    },
                ),
                spec(
                    head,
                    blade,
                    Shape::Cuboid {
                        min: [len + 0.02, -0.03, 0.0],
                        max: [len + 0.1, 0.03, 0.004],
                    },
                ),
            ]
        }
        "bottle" => {
            let r = rng.random_range(0.03..0.045);
            let h = rng.random_range(0.2..0.3);
            let m = pick(rng, &["glass", "plastic", "metal"]);
            let mut parts = vec![
                spec("wrap_grasp", m, Shape::Tube { radius: r, z0: 0.0, z1: 0.6 * h }),
                spec("contain", m, Shape::Tube { radius: 0.012, z0: 0.72 * h, z1: h }),
            ];
            if rng.random_bool(0.5) {
                let cap = pick(rng, &["plastic", "metal"]);
                parts.push(spec("none", cap, Shape::Disk { radius: 0.014, z: h + 0.02 }));
            }
            parts
        }
        other => return Err(CageError::Config(format!("no shape template for object class `{other}`"))),
    };
    Ok(parts)
}

fn dist2(a: &Point3, b: &Point3) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Index of the nearest point by exhaustive scan, lowest index on ties.
fn scan_nearest(points: &[Point3], q: &Point3) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = dist2(p, q);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn random_quaternion(rng: &mut ChaCha8Rng) -> [f64; 4] {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return q.map(|c| round_sig9(c / n));
        }
    }
}

fn build_object(object_id: String, class: &str, config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<PartLabeledObject> {
    let specs = template(class, rng)?;
    let mut points = Vec::new();
    let mut parts = Vec::new();
    for spec in specs {
        let start = points.len();
        for _ in 0..config.points_per_part {
            let p = spec.shape.sample(rng);
            points.push(p.map(round_sig9));
        }
        parts.push(Part {
            affordance: spec.affordance.to_string(),
            material: spec.material.to_string(),
            point_indices: (start..points.len()).collect(),
        });
    }
    Ok(PartLabeledObject {
        object_id,
        object_class: class.to_string(),
        points,
        parts,
    })
}

/// Samples grasp centres near the surface of a random part. A candidate is kept
/// only if its nearest cloud point lies on the part it was sampled from.
fn sample_grasps(object: &PartLabeledObject, count: usize, rng: &mut ChaCha8Rng) -> Vec<(Point3, [f64; 4], usize)> {
    let owners = object.point_owners();
    (0..count)
        .map(|_| {
            let part = rng.random_range(0..object.parts.len());
            let indices = &object.parts[part].point_indices;
            let anchor = object.points[indices[rng.random_range(0..indices.len())]];
            let mut position = anchor;
            for _ in 0..32 {
                let candidate = anchor.map(|c| round_sig9(c + rng.random_range(-0.003..0.003)));
                if owners[scan_nearest(&object.points, &candidate)] == Some(part) {
                    position = candidate;
                    break;
                }
            }
            (position, random_quaternion(rng), part)
        })
        .collect()
}

/// Generates a rule-labelled dataset. Deterministic for a fixed `(config, seed)`.
pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<SyntheticDataset> {
    if config.rules.rules.is_empty() {
        return Err(CageError::Config("rule table is empty".into()));
    }
    if config.objects_per_class == 0
        || config.grasps_per_context == 0
        || config.contexts_per_task == 0
        || config.points_per_part == 0
    {
        return Err(CageError::Config("generator counts must be positive".into()));
    }
    let vocab = &config.vocabularies;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objects = Vec::new();
    let mut contexts = Vec::new();
    let mut grasps = BTreeMap::new();
    let mut grasp_parts = BTreeMap::new();

    for class in vocab.object_classes.iter() {
        for i in 0..config.objects_per_class {
            let object = build_object(format!("{class}-{i}"), class, config, &mut rng)?;
            let samples = sample_grasps(&object, config.grasps_per_context, &mut rng);
            for task in vocab.tasks.iter() {
                let mut order: Vec<usize> = (0..vocab.states.len()).collect();
                order.shuffle(&mut rng);
                for k in 0..config.contexts_per_task {
                    let state = vocab.states.label(order[k % order.len()]).expect("in range");
                    let context = Context {
                        context_id: format!("{}/{task}/{k}", object.object_id),
                        task: task.to_string(),
                        state: state.to_string(),
                        object_id: object.object_id.clone(),
                    };
                    let labeled = samples
                        .iter()
                        .map(|&(position, orientation, part)| LabeledGrasp {
                            position,
                            orientation,
                            label: rule_label(&config.rules, &context, &object, part),
                        })
                        .collect();
                    grasps.insert(context.context_id.clone(), labeled);
                    contexts.push(context);
                }
            }
            grasp_parts.insert(object.object_id.clone(), samples.iter().map(|s| s.2).collect());
            objects.push(object);
        }
    }

    let dataset = Dataset {
        vocabularies: vocab.clone(),
        objects,
        contexts,
        grasps,
        seed: Some(seed),
    };
    dataset.validate()?;
    Ok(SyntheticDataset { dataset, grasp_parts })
}
