//! Repeated-split experiments comparing CAGE variants against the baselines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{average_precision, expected_random_ap_for, mean_ap, RankedList};
use super::splits::{make_splits, Protocol, Split, SplitSpec};
use super::stats::paired_t_test;
use crate::baselines::{ca_rank, ft_scores, ft_train};
use crate::data::{Dataset, GraspLabel, TOOL_VERSION};
use crate::error::{CageError, Result};
use crate::model::{train, Ablation, ModelConfig};

pub const REPORT_FORMAT: &str = "cage-report-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cage,
    Ca,
    Ft,
}

impl Method {
    pub fn column(self) -> &'static str {
        match self {
            Method::Cage => "CAGE",
            Method::Ca => "CA",
            Method::Ft => "FT",
        }
    }
}

impl FromStr for Method {
    type Err = CageError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cage" => Ok(Method::Cage),
            "ca" => Ok(Method::Ca),
            "ft" => Ok(Method::Ft),
            _ => Err(CageError::Config(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub split: SplitSpec,
    pub methods: Vec<Method>,
    /// Extra model variants; the full model is always evaluated when CAGE is requested.
    pub ablations: Vec<Ablation>,
    pub model: ModelConfig,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(split: SplitSpec) -> Self {
        ExperimentConfig {
            split,
            methods: vec![Method::Cage, Method::Ca, Method::Ft],
            ablations: Vec::new(),
            model: ModelConfig::default(),
            jobs: 1,
        }
    }

    fn variants(&self) -> Vec<Ablation> {
        let mut out = Vec::new();
        if self.methods.contains(&Method::Cage) {
            out.push(Ablation::Full);
        }
        for &a in &self.ablations {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}

fn variant_column(a: Ablation) -> &'static str {
    match a {
        Ablation::Full => Method::Cage.column(),
        other => other.row_name(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Job {
    Model(Ablation),
    Baseline(Method),
}

impl Job {
    fn column(self) -> &'static str {
        match self {
            Job::Model(a) => variant_column(a),
            Job::Baseline(m) => m.column(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub repetition: usize,
    pub seed: u64,
    pub held_out_class: Option<String>,
    pub train_contexts: usize,
    pub test_contexts: usize,
    /// Test contexts without Suitable or Neutral grasps, left out of every MAP.
    pub excluded_contexts: usize,
    /// Expected MAP of a uniformly random ranking on this test set.
    pub expected_random_map: f64,
    pub map: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub mean_difference: f64,
    /// `None` when the differences have zero variance and a nonzero mean.
    pub t: Option<f64>,
    pub p: f64,
    pub dof: usize,
    pub degenerate: bool,
}

impl Comparison {
    pub fn stars(&self) -> &'static str {
        match self.p {
            p if p < 0.001 => "***",
            p if p < 0.01 => "**",
            p if p < 0.05 => "*",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub tool_version: String,
    pub seed: u64,
    pub protocol: Protocol,
    pub train_fraction: f64,
    pub repetitions: usize,
    pub columns: Vec<String>,
    pub splits: Vec<SplitResult>,
    pub summary: Vec<MethodSummary>,
    pub comparisons: Vec<Comparison>,
    pub ablation: Vec<AblationRow>,
    pub notes: Vec<String>,
}

fn labels_of(dataset: &Dataset, id: &str) -> Vec<GraspLabel> {
    dataset.grasps_for(id).iter().map(|g| g.label).collect()
}

/// Per-context AP of one method on a split's test contexts.
fn run_job(dataset: &Dataset, split: &Split, job: Job, model: &ModelConfig) -> Result<Vec<Option<f64>>> {
    match job {
        Job::Model(ablation) => {
            let config = ModelConfig {
                seed: model.seed ^ split.seed,
                ..model.clone().with_ablation(ablation)
            };
            let trained = train(dataset, &split.train, &config)?.model;
            split
                .test
                .iter()
                .map(|id| {
                    let (ctx, object) = dataset.lookup(id)?;
                    let scores = trained.score_context(ctx, object, dataset.grasps_for(id))?;
                    RankedList::from_scores(&scores, &labels_of(dataset, id))?.average_precision()
                })
                .collect()
        }
        Job::Baseline(Method::Ft) => {
            let table = ft_train(dataset, &split.train)?;
            split
                .test
                .iter()
                .map(|id| {
                    let (ctx, object) = dataset.lookup(id)?;
                    let scores = ft_scores(&table, ctx, object, dataset.grasps_for(id))?;
                    RankedList::from_scores(&scores, &labels_of(dataset, id))?.average_precision()
                })
                .collect()
        }
        Job::Baseline(_) => split
            .test
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let labels = labels_of(dataset, id);
                let order = ca_rank(labels.len(), split.seed.wrapping_add(0xCA00_0000).wrapping_add(i as u64))?;
                RankedList::from_permutation(order, &labels)?.average_precision()
            })
            .collect(),
    }
}

fn summarize(name: &str, values: &[f64]) -> MethodSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MethodSummary {
        name: name.to_string(),
        mean,
        std,
    }
}

pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<Report> {
    if config.methods.is_empty() && config.ablations.is_empty() {
        return Err(CageError::Config("no methods to evaluate".into()));
    }
    if config.jobs == 0 {
        return Err(CageError::Config("jobs must be at least 1".into()));
    }
    config.model.validate()?;
    let splits = make_splits(dataset, &config.split)?;
    if let Some(s) = splits.iter().find(|s| s.test.is_empty() || s.train.is_empty()) {
        return Err(CageError::InsufficientData(format!("repetition {} has an empty side", s.repetition)));
    }

    let mut jobs: Vec<Job> = config.variants().into_iter().map(Job::Model).collect();
    for m in [Method::Ca, Method::Ft] {
        if config.methods.contains(&m) {
            jobs.push(Job::Baseline(m));
        }
    }
    let columns: Vec<String> = jobs.iter().map(|j| j.column().to_string()).collect();

    let work: Vec<(usize, Job)> = (0..splits.len())
        .flat_map(|s| jobs.iter().map(move |&j| (s, j)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| CageError::Config(e.to_string()))?;
    let aps: Vec<Vec<Option<f64>>> = pool.install(|| {
        work.par_iter()
            .map(|&(s, job)| run_job(dataset, &splits[s], job, &config.model))
            .collect::<Result<_>>()
    })?;

    let mut results = Vec::with_capacity(splits.len());
    for (s, split) in splits.iter().enumerate() {
        let mut map = BTreeMap::new();
        let mut excluded = 0;
        for (j, job) in jobs.iter().enumerate() {
            let summary = mean_ap(&aps[s * jobs.len() + j])?;
            excluded = summary.excluded;
            map.insert(job.column().to_string(), summary.map);
        }
        let expected: Vec<Option<f64>> = split
            .test
            .iter()
            .map(|id| expected_random_ap_for(&labels_of(dataset, id)))
            .collect::<Result<_>>()?;
        results.push(SplitResult {
            repetition: split.repetition,
            seed: split.seed,
            held_out_class: split.held_out_class.clone(),
            train_contexts: split.train.len(),
            test_contexts: split.test.len(),
            excluded_contexts: excluded,
            expected_random_map: mean_ap(&expected)?.map,
            map,
        });
    }

    let series = |col: &str| -> Vec<f64> { results.iter().map(|r| r.map[col]).collect() };
    let summary = columns.iter().map(|c| summarize(c, &series(c))).collect();

    let mut pairs: Vec<(&str, &str)> = Vec::new();
    let has = |c: &str| columns.iter().any(|x| x == c);
    for baseline in ["CA", "FT"] {
        if has("CAGE") && has(baseline) {
            pairs.push(("CAGE", baseline));
        }
    }
    if has("FT") && has("CA") {
        pairs.push(("FT", "CA"));
    }
    for a in config.variants().into_iter().filter(|&a| a != Ablation::Full) {
        if has("CAGE") {
            pairs.push(("CAGE", variant_column(a)));
        }
    }
    let comparisons = if results.len() >= 2 {
        pairs
            .into_iter()
            .map(|(a, b)| {
                let t = paired_t_test(&series(a), &series(b))?;
                Ok(Comparison {
                    a: a.to_string(),
                    b: b.to_string(),
                    mean_difference: t.mean_difference,
                    t: t.t.is_finite().then_some(t.t),
                    p: t.p,
                    dof: t.dof,
                    degenerate: t.degenerate,
                })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let variants = config.variants();
    let ablation = if variants.len() > 1 {
        Ablation::ALL
            .into_iter()
            .filter(|a| variants.contains(a))
            .map(|a| AblationRow {
                name: a.row_name().to_string(),
                mean: summarize(variant_column(a), &series(variant_column(a))).mean,
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(Report {
        format: REPORT_FORMAT.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        seed: config.split.seed,
        protocol: config.split.protocol,
        train_fraction: config.split.train_fraction,
        repetitions: config.split.repetitions,
        columns,
        splits: results,
        summary,
        comparisons,
        ablation,
        notes: vec![
            "AP is the non-interpolated mean of precision at each relevant rank".into(),
            "relevant grasps are Suitable ones, or Neutral ones when a context has no Suitable grasp".into(),
            "FT scores (S + 0.5 N + 1) / (total + 3) per (task, state, object class) with backoff".into(),
            "p-values are two-sided paired t-tests over splits".into(),
        ],
    })
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CageError::Invariant(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| CageError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if r.format != REPORT_FORMAT {
            return Err(CageError::Config(format!("unsupported report format `{}`", r.format)));
        }
        Ok(r)
    }

    pub fn summary_of(&self, column: &str) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.name == column)
    }

    pub fn comparison(&self, a: &str, b: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.a == a && c.b == b)
    }

    /// Per-split MAP table, one row per repetition.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {} tool_version={} seed={}\n", self.format, self.tool_version, self.seed);
        out.push_str("repetition,split_seed,held_out_class,test_contexts,excluded_contexts,expected_random_map");
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for r in &self.splits {
            let _ = write!(
                out,
                "{},{},{},{},{},{:.6}",
                r.repetition,
                r.seed,
                r.held_out_class.as_deref().unwrap_or(""),
                r.test_contexts,
                r.excluded_contexts,
                r.expected_random_map
            );
            for c in &self.columns {
                let _ = write!(out, ",{:.6}", r.map[c]);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "protocol {}  repetitions {}  seed {}  version {}",
            self.protocol, self.repetitions, self.seed, self.tool_version
        );
        let _ = write!(out, "\n{:<6}", "split");
        for c in &self.columns {
            let _ = write!(out, " {c:>15}");
        }
        let _ = writeln!(out, " {:>15}", "random (exp.)");
        for r in &self.splits {
            let _ = write!(out, "{:<6}", r.repetition);
            for c in &self.columns {
                let _ = write!(out, " {:>15.4}", r.map[c]);
            }
            let _ = writeln!(out, " {:>15.4}", r.expected_random_map);
        }
        for (label, pick) in [("mean", true), ("std", false)] {
            let _ = write!(out, "{label:<6}");
            for s in &self.summary {
                let _ = write!(out, " {:>15.4}", if pick { s.mean } else { s.std });
            }
            out.push('\n');
        }
        if !self.comparisons.is_empty() {
            out.push_str("\npaired t-tests\n");
            for c in &self.comparisons {
                let t = c.t.map_or_else(|| "degenerate".to_string(), |t| format!("{t:.3}"));
                let _ = writeln!(out, "  {} vs {}: diff {:+.4}  t {t}  p {:.3e} {}", c.a, c.b, c.mean_difference, c.p, c.stars());
            }
        }
        if !self.ablation.is_empty() {
            out.push_str("\nablation (MAP)\n");
            for row in &self.ablation {
                let _ = writeln!(out, "  {:<15} {:.4}", row.name, row.mean);
            }
        }
        let excluded: usize = self.splits.iter().map(|r| r.excluded_contexts).sum();
        let _ = writeln!(out, "\ncontexts excluded for undefined AP: {excluded}");
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// AP of each test context under a given scorer; useful for ad hoc evaluation.
pub fn evaluate_contexts(
    dataset: &Dataset,
    context_ids: &[String],
    mut score: impl FnMut(&str) -> Result<Vec<f64>>,
) -> Result<Vec<Option<f64>>> {
    context_ids
        .iter()
        .map(|id| {
            let scores = score(id)?;
            let list = RankedList::from_scores(&scores, &labels_of(dataset, id))?;
            average_precision(&list.labels)
        })
        .collect()
}
