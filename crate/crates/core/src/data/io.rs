//! Line-delimited JSON dataset files (`cage-ds-1`).
//!
//! Line 1 is a header carrying the format tag and the vocabularies. Object
//! records follow, then context records, then grasp records. Floating point
//! values are written with at most 9 significant digits.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{
    Context, Dataset, GraspLabel, LabeledGrasp, Part, PartLabeledObject, Point3, QUATERNION_NORM_TOLERANCE,
};
use super::vocab::{LabelKind, Vocabularies};
use crate::error::{CageError, Result};

pub const DATASET_FORMAT: &str = "cage-ds-1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 9 significant decimal digits, the precision used on disk.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn round_point(p: &Point3) -> Point3 {
    [round_sig9(p[0]), round_sig9(p[1]), round_sig9(p[2])]
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    tool_version: String,
    #[serde(default)]
    seed: Option<u64>,
    vocabularies: Vocabularies,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case", deny_unknown_fields)]
enum Record {
    Object {
        object_id: String,
        object_class: String,
        points: Vec<Point3>,
        parts: Vec<Part>,
    },
    Context {
        context_id: String,
        task: String,
        state: String,
        object_id: String,
    },
    Grasp {
        context_id: String,
        position: Point3,
        orientation: [f64; 4],
        label: GraspLabel,
    },
}

impl Record {
    fn stage(&self) -> u8 {
        match self {
            Record::Object { .. } => 0,
            Record::Context { .. } => 1,
            Record::Grasp { .. } => 2,
        }
    }
}

/// Serializes `dataset` to its on-disk text. Deterministic for equal inputs.
pub fn dataset_to_string(dataset: &Dataset) -> Result<String> {
    dataset.validate()?;
    let mut out = String::new();
    push_line(
        &mut out,
        &Header {
            format: DATASET_FORMAT.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed: dataset.seed,
            vocabularies: dataset.vocabularies.clone(),
        },
    )?;
    for o in &dataset.objects {
        push_line(&mut out, &Record::Object {
            object_id: o.object_id.clone(),
            object_class: o.object_class.clone(),
            points: o.points.iter().map(round_point).collect(),
            parts: o.parts.clone(),
        })?;
    }
    for c in &dataset.contexts {
        push_line(&mut out, &Record::Context {
            context_id: c.context_id.clone(),
            task: c.task.clone(),
            state: c.state.clone(),
            object_id: c.object_id.clone(),
        })?;
    }
    for c in &dataset.contexts {
        for g in dataset.grasps_for(&c.context_id) {
            let q = &g.orientation;
            push_line(&mut out, &Record::Grasp {
                context_id: c.context_id.clone(),
                position: round_point(&g.position),
                orientation: [round_sig9(q[0]), round_sig9(q[1]), round_sig9(q[2]), round_sig9(q[3])],
                label: g.label,
            })?;
        }
    }
    Ok(out)
}

fn push_line<T: Serialize>(out: &mut String, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| CageError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    out.push_str(&text);
    out.push('\n');
    Ok(())
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = dataset_to_string(dataset)?;
    let mut file = fs::File::create(path).map_err(|e| CageError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| CageError::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| CageError::io(path, e))?;
    let lines = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| CageError::io(path, e))?;
    parse_dataset(lines.iter().map(String::as_str))
}

pub fn dataset_from_str(text: &str) -> Result<Dataset> {
    parse_dataset(text.lines())
}

fn check_label(vocab: &Vocabularies, kind: LabelKind, label: &str, line: usize) -> Result<()> {
    if vocab.set(kind).contains(label) {
        Ok(())
    } else {
        Err(CageError::Vocabulary {
            line,
            set: kind.name(),
            label: label.to_string(),
        })
    }
}

fn parse_dataset<'a>(lines: impl Iterator<Item = &'a str>) -> Result<Dataset> {
    let mut lines = lines.enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hline, htext) = lines.next().ok_or(CageError::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let header: Header = serde_json::from_str(htext).map_err(|e| CageError::Parse {
        line: hline,
        message: format!("bad header: {e}"),
    })?;
    if header.format != DATASET_FORMAT {
        return Err(CageError::Parse {
            line: hline,
            message: format!("unsupported format `{}`", header.format),
        });
    }
    let vocab = header.vocabularies;
    let mut objects: Vec<PartLabeledObject> = Vec::new();
    let mut object_ids = HashSet::new();
    let mut contexts: Vec<Context> = Vec::new();
    let mut context_ids = HashSet::new();
    let mut grasps: BTreeMap<String, Vec<LabeledGrasp>> = BTreeMap::new();
    let mut stage = 0u8;

    for (line, text) in lines {
        let record: Record = serde_json::from_str(text).map_err(|e| CageError::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.stage() < stage {
            return Err(CageError::Parse {
                line,
                message: "records out of order (objects, then contexts, then grasps)".into(),
            });
        }
        stage = record.stage();
        match record {
            Record::Object {
                object_id,
                object_class,
                points,
                parts,
            } => {
                check_label(&vocab, LabelKind::ObjectClass, &object_class, line)?;
                for part in &parts {
                    check_label(&vocab, LabelKind::Affordance, &part.affordance, line)?;
                    check_label(&vocab, LabelKind::Material, &part.material, line)?;
                }
                if !object_ids.insert(object_id.clone()) {
                    return Err(CageError::Parse {
                        line,
                        message: format!("duplicate object id `{object_id}`"),
                    });
                }
                let object = PartLabeledObject {
                    object_id,
                    object_class,
                    points,
                    parts,
                };
                object.check(&vocab).map_err(|e| CageError::Parse {
                    line,
                    message: e.to_string(),
                })?;
                objects.push(object);
            }
            Record::Context {
                context_id,
                task,
                state,
                object_id,
            } => {
                check_label(&vocab, LabelKind::Task, &task, line)?;
                check_label(&vocab, LabelKind::State, &state, line)?;
                if !object_ids.contains(&object_id) {
                    return Err(CageError::DanglingObject {
                        line,
                        context: context_id,
                        object: object_id,
                    });
                }
                if !context_ids.insert(context_id.clone()) {
                    return Err(CageError::Parse {
                        line,
                        message: format!("duplicate context id `{context_id}`"),
                    });
                }
                contexts.push(Context {
                    context_id,
                    task,
                    state,
                    object_id,
                });
            }
            Record::Grasp {
                context_id,
                position,
                orientation,
                label,
            } => {
                if !context_ids.contains(&context_id) {
                    return Err(CageError::Parse {
                        line,
                        message: format!("grasp references unknown context `{context_id}`"),
                    });
                }
                let grasp = LabeledGrasp {
                    position,
                    orientation,
                    label,
                };
                let norm = grasp.quaternion_norm();
                if !norm.is_finite() || (norm - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
                    return Err(CageError::QuaternionNorm { line, norm });
                }
                grasps.entry(context_id).or_default().push(grasp);
            }
        }
    }

    let dataset = Dataset {
        vocabularies: vocab,
        objects,
        contexts,
        grasps,
        seed: header.seed,
    };
    dataset.validate()?;
    Ok(dataset)
}
