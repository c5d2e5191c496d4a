//! The `cage` command line: dataset generation, training, evaluation and ranking.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cage_core::data::{
    dataset_to_string, generate_synthetic, load_dataset, GeneratorConfig, RuleTable, DEFAULT_STATES,
    DEFAULT_TASKS, TOOL_VERSION,
};
use cage_core::eval::{
    rank_and_filter, run_experiment, ExperimentConfig, Method, Protocol, RankOutcome, Report, SplitSpec,
    DEFAULT_THRESHOLD,
};
use cage_core::geometry::assign_grasp_to_part;
use cage_core::model::{train, Ablation, CageModel, ModelConfig};

pub const LOSS_FORMAT: &str = "cage-loss-1";

#[derive(Debug, Parser)]
#[command(name = "cage", version, about = "Context-aware semantic grasp ranking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic part-labeled dataset.
    Gen(GenArgs),
    /// Train a model on every context of a dataset.
    Train(TrainArgs),
    /// Run a repeated-split experiment and write JSON, CSV and text reports.
    Eval(EvalArgs),
    /// Rank the grasps of one context with a trained model.
    Rank(RankArgs),
    /// Render a saved JSON report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rules {
    /// Household rules over task, state, part affordance and material.
    Household,
    /// Class-agnostic rules where the ordering depends on task and state jointly.
    TaskState,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub objects_per_class: usize,
    /// Grasp candidates per context.
    #[arg(long, default_value_t = 20)]
    pub grasps: usize,
    #[arg(long, default_value_t = 2)]
    pub contexts_per_task: usize,
    #[arg(long, default_value_t = 48)]
    pub points_per_part: usize,
    #[arg(long, value_enum, default_value_t = Rules::Household)]
    pub rules: Rules,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 150)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
}

impl ModelArgs {
    fn config(&self, seed: u64) -> ModelConfig {
        let mut c = ModelConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            ..ModelConfig::default()
        };
        c.adam.lr = self.lr;
        c
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Checkpoint path. The loss trace goes next to it with a `.loss.csv` suffix.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "full")]
    pub ablate: Ablation,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Output directory for report.json, report.csv and report.txt.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "context-aware")]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "cage,ca,ft")]
    pub methods: Vec<Method>,
    /// Model variants evaluated next to the full model, or `all`.
    #[arg(long, value_delimiter = ',')]
    pub ablate: Vec<String>,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Class held out by the class protocol; cycles through classes when absent.
    #[arg(long)]
    pub held_out_class: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Checkpoint written by `cage train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub context: String,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report.json written by `cage eval`.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, stdout),
        Command::Train(a) => cmd_train(&a, stdout),
        Command::Eval(a) => cmd_eval(&a, stdout),
        Command::Rank(a) => cmd_rank(&a, stdout),
        Command::Report(a) => cmd_report(&a, stdout),
    }
}

/// Writes every file or none: each goes to a temporary sibling first, and
/// files already moved into place are removed if a later one fails.
fn write_all_or_none(files: &[(&Path, &str)]) -> Result<()> {
    let mut staged = Vec::new();
    for (path, text) in files {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing {}", path.display()))?;
        tmp.write_all(text.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
        staged.push((tmp, *path));
    }
    let mut done: Vec<&Path> = Vec::new();
    for (tmp, path) in staged {
        if let Err(e) = tmp.persist(path) {
            for p in done {
                let _ = std::fs::remove_file(p);
            }
            return Err(e.error).with_context(|| format!("writing {}", path.display()));
        }
        done.push(path);
    }
    Ok(())
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = GeneratorConfig {
        objects_per_class: a.objects_per_class,
        grasps_per_context: a.grasps,
        contexts_per_task: a.contexts_per_task,
        points_per_part: a.points_per_part,
        ..GeneratorConfig::default()
    };
    if a.rules == Rules::TaskState {
        cfg.rules = RuleTable::task_state(&DEFAULT_TASKS, &DEFAULT_STATES);
    }
    let ds = generate_synthetic(&cfg, a.seed)?.dataset;
    write_all_or_none(&[(&a.out, &dataset_to_string(&ds)?)])?;

    let mut counts = [0usize; 3];
    for g in ds.grasps.values().flatten() {
        counts[g.label.class_index()] += 1;
    }
    writeln!(
        out,
        "wrote {}: {} objects, {} contexts, {} grasps (suitable {}, neutral {}, not suitable {}), seed {}",
        a.out.display(),
        ds.objects.len(),
        ds.contexts.len(),
        ds.num_grasps(),
        counts[0],
        counts[1],
        counts[2],
        a.seed
    )?;
    Ok(())
}

/// Loss trace path derived from a checkpoint path.
pub fn loss_trace_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.file_name().unwrap_or_default().to_os_string();
    name.push(".loss.csv");
    checkpoint.with_file_name(name)
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let ds = load_dataset(&a.dataset).with_context(|| format!("loading {}", a.dataset.display()))?;
    let config = a.model.config(a.seed).with_ablation(a.ablate);
    let ids: Vec<String> = ds.contexts.iter().map(|c| c.context_id.clone()).collect();
    let outcome = train(&ds, &ids, &config)?;

    let checkpoint = outcome.model.to_checkpoint()?.to_json()?;
    let mut trace = format!("# {LOSS_FORMAT} tool_version={TOOL_VERSION} seed={}\nepoch,loss\n", a.seed);
    for (i, l) in outcome.epoch_losses.iter().enumerate() {
        writeln!(trace, "{},{l}", i + 1)?;
    }
    let trace_path = loss_trace_path(&a.out);
    write_all_or_none(&[(&a.out, &checkpoint), (&trace_path, &trace)])?;
    writeln!(
        out,
        "trained {} ({} contexts, {} epochs), final loss {:.6}; wrote {} and {}",
        a.ablate.row_name(),
        ids.len(),
        config.epochs,
        outcome.epoch_losses.last().copied().unwrap_or(f64::NAN),
        a.out.display(),
        trace_path.display()
    )?;
    Ok(())
}

fn parse_ablations(flags: &[String]) -> Result<Vec<Ablation>> {
    let mut out = Vec::new();
    for f in flags {
        if f == "all" {
            out.extend(Ablation::ALL.iter().copied().filter(|a| *a != Ablation::Full));
        } else {
            out.push(f.parse::<Ablation>()?);
        }
    }
    out.retain(|a| *a != Ablation::Full);
    out.dedup();
    Ok(out)
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let ds = load_dataset(&a.dataset).with_context(|| format!("loading {}", a.dataset.display()))?;
    let split = SplitSpec {
        train_fraction: a.train_fraction,
        held_out_class: a.held_out_class.clone(),
        repetitions: a.reps,
        ..SplitSpec::new(a.protocol, a.seed)
    };
    let mut cfg = ExperimentConfig::new(split);
    cfg.methods = a.methods.clone();
    cfg.ablations = parse_ablations(&a.ablate)?;
    cfg.model = a.model.config(0);
    cfg.jobs = a.jobs;
    if cfg.methods.is_empty() && cfg.ablations.is_empty() {
        bail!("nothing to evaluate: no methods and no ablations");
    }
    let report = run_experiment(&ds, &cfg)?;

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let text = report.to_text();
    let (json_path, csv_path, txt_path) = (
        a.out.join("report.json"),
        a.out.join("report.csv"),
        a.out.join("report.txt"),
    );
    write_all_or_none(&[
        (&json_path, &report.to_json()?),
        (&csv_path, &report.to_csv()),
        (&txt_path, &text),
    ])?;
    write!(out, "{text}")?;
    writeln!(out, "wrote {}, {} and {}", json_path.display(), csv_path.display(), txt_path.display())?;
    Ok(())
}

pub fn cmd_rank(a: &RankArgs, out: &mut dyn Write) -> Result<()> {
    let ds = load_dataset(&a.dataset).with_context(|| format!("loading {}", a.dataset.display()))?;
    let model = CageModel::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let (ctx, object) = ds.lookup(&a.context)?;
    let grasps = ds.grasps_for(&a.context);
    match rank_and_filter(&model, ctx, object, grasps, a.threshold)? {
        RankOutcome::Rejected { threshold, max_score } => {
            writeln!(out, "REJECTED: no grasp above {threshold}")?;
            writeln!(out, "best score {max_score:.6}")?;
        }
        RankOutcome::Ranked { order, scores } => {
            writeln!(out, "context {} (task {}, state {}, object {})", ctx.context_id, ctx.task, ctx.state, ctx.object_id)?;
            writeln!(out, "rank\tgrasp\tscore\tpart\tlabel")?;
            for (rank, (&i, s)) in order.iter().zip(&scores).enumerate() {
                let g = &grasps[i];
                let part = &object.parts[assign_grasp_to_part(object, g)?];
                writeln!(
                    out,
                    "{}\t{i}\t{s:.6}\t{}:{}\t{}",
                    rank + 1,
                    part.affordance,
                    part.material,
                    g.label.as_str()
                )?;
            }
        }
    }
    Ok(())
}

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let report = Report::from_json(&text).with_context(|| format!("parsing {}", a.input.display()))?;
    match a.format {
        ReportFormat::Text => write!(out, "{}", report.to_text())?,
        ReportFormat::Csv => write!(out, "{}", report.to_csv())?,
        ReportFormat::Json => write!(out, "{}", report.to_json()?)?,
    }
    Ok(())
}
