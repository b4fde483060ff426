//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on input or validation errors, 2 on usage
//! errors.

use std::collections::HashSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::calendar::{CalendarDate, Granularity};
use crate::corpus::{self, Document};
use crate::eval::Report;
use crate::maxent::{MaxEntModel, TrainingConfig};
use crate::normalizer::{self, NormalizerConfig};
use crate::recognizer::{self, RecognizerConfig, Ruleset};
use crate::relations::{self, FeatureOptions, Task};
use crate::signals::{self, SignalLexicon};

#[derive(Debug, Parser)]
#[command(name = "timelabel", version, about = "Temporal expression tagging and temporal relation labelling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find timex extents; replaces each document's timex layer.
    Recognize {
        #[command(flatten)]
        io: DocIo,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Type and anchor the timexes already present in each document.
    Normalize {
        #[command(flatten)]
        io: DocIo,
        #[command(flatten)]
        rules: RuleArgs,
        #[command(flatten)]
        anchor: AnchorArgs,
    },
    /// Recognize and normalize in one pass.
    Annotate {
        #[command(flatten)]
        io: DocIo,
        #[command(flatten)]
        rules: RuleArgs,
        #[command(flatten)]
        anchor: AnchorArgs,
    },
    /// Train a relation model from gold-labelled documents.
    Train {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        /// Document files or directories of `*.json` files.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Leave out the signal features.
        #[arg(long)]
        no_signals: bool,
    },
    /// Label the unlabelled relations of each document with a trained model.
    Label {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[command(flatten)]
        io: DocIo,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Discard existing labels on task-shaped relations first.
        #[arg(long)]
        overwrite: bool,
    },
    /// Compare predicted documents with gold ones (matched by document id).
    Score {
        #[arg(long, required = true, num_args = 1..)]
        gold: Vec<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        pred: Vec<PathBuf>,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct DocIo {
    /// Document files or directories of `*.json` files; `-` reads standard input.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output file; only valid with a single input document.
    #[arg(long, conflicts_with = "output_dir")]
    output: Option<PathBuf>,
    /// Directory receiving one output file per input document.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RuleArgs {
    /// Ruleset file (`name<TAB>pattern` lines); defaults to the built-in rules.
    #[arg(long)]
    ruleset: Option<PathBuf>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    max_n: u64,
}

#[derive(Debug, Args)]
struct AnchorArgs {
    /// Days ahead of the DCT within which a year-less date stays in the future.
    #[arg(long, default_value_t = 14, value_parser = clap::value_parser!(u32))]
    f_days: u32,
    /// Override every document's creation time (YYYY-MM-DD).
    #[arg(long, value_parser = parse_dct)]
    dct: Option<CalendarDate>,
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse()
}

fn parse_dct(s: &str) -> Result<CalendarDate, String> {
    let d: CalendarDate = s.parse().map_err(|e| format!("{e}"))?;
    if d.granularity() != Granularity::Day {
        return Err("expected YYYY-MM-DD".into());
    }
    Ok(d)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let mut text = e.render().to_string();
            if e.use_stderr() && !text.contains("Usage:") {
                text.push('\n');
                text.push_str(&usage_for(&argv));
                text.push('\n');
            }
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

/// Input path that stands for standard input.
const STDIN: &str = "-";

/// Usage line of the subcommand named in `argv`, or of the whole program.
fn usage_for(argv: &[std::ffi::OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let name =
        argv.iter().skip(1).filter_map(|a| a.to_str()).find(|a| cmd.find_subcommand(a).is_some()).map(String::from);
    match name.and_then(|n| cmd.find_subcommand_mut(&n).map(|c| c.render_usage())) {
        Some(usage) => usage.to_string(),
        None => cmd.render_usage().to_string(),
    }
}

struct Loaded {
    source: PathBuf,
    doc: Document,
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in inputs {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("reading directory {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

fn load_documents(inputs: &[PathBuf]) -> Result<Vec<Loaded>> {
    expand_inputs(inputs)?
        .into_iter()
        .map(|source| {
            let text = if source.as_os_str() == STDIN {
                let mut text = String::new();
                io::stdin().read_to_string(&mut text).context("reading standard input")?;
                text
            } else {
                fs::read_to_string(&source).with_context(|| format!("reading {}", source.display()))?
            };
            let doc = corpus::parse_document(&text).with_context(|| format!("in {}", source.display()))?;
            Ok(Loaded { source, doc })
        })
        .collect()
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

fn write_documents(io: &DocIo, docs: &[Loaded], stdout: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &io.output_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut names = HashSet::new();
        for d in docs {
            let name = match d.source.file_name() {
                Some(name) if d.source.as_os_str() != STDIN => PathBuf::from(name),
                _ => format!("{}.json", d.doc.id).into(),
            };
            if !names.insert(name.clone()) {
                bail!("two inputs would both be written to {}", name.display());
            }
            write_atomic(&dir.join(name), &corpus::serialize(&d.doc))?;
        }
    } else if let Some(path) = &io.output {
        let [only] = docs else {
            bail!("--output takes exactly one input document (got {}); use --output-dir", docs.len());
        };
        write_atomic(path, &corpus::serialize(&only.doc))?;
    } else {
        for d in docs {
            stdout.write_all(corpus::serialize(&d.doc).as_bytes())?;
        }
    }
    Ok(())
}

fn load_ruleset(args: &RuleArgs) -> Result<(Ruleset, RecognizerConfig)> {
    let rules = match &args.ruleset {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            recognizer::load_ruleset(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Ruleset::builtin(),
    };
    Ok((rules, RecognizerConfig { max_n: args.max_n as usize }))
}

fn load_lexicon(path: &Option<PathBuf>) -> Result<SignalLexicon> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(signals::load_lexicon(&text).with_context(|| format!("in {}", path.display()))?)
        }
        None => Ok(SignalLexicon::builtin()),
    }
}

/// Replaces the timex layer with freshly recognized, untyped spans.
/// Relations that pointed at the old timexes are dropped.
pub fn recognize_document(doc: &mut Document, ruleset: &Ruleset, config: &RecognizerConfig) {
    let spans = recognizer::recognize(doc, ruleset, config);
    let old: HashSet<String> = doc.timexes.iter().map(|t| t.id.clone()).collect();
    doc.relations.retain(|r| !old.contains(&r.arg1) && !old.contains(&r.arg2));
    let taken: HashSet<String> =
        doc.events.iter().map(|e| e.id.clone()).chain(doc.relations.iter().map(|r| r.id.clone())).collect();
    let mut next = 1;
    doc.timexes = spans
        .into_iter()
        .map(|span| {
            while taken.contains(&format!("t{next}")) {
                next += 1;
            }
            let id = format!("t{next}");
            next += 1;
            corpus::TimexAnnotation { id, span, ttype: None, value: None }
        })
        .collect();
}

/// Types and values every timex in `doc`. Timexes whose first matching rule
/// is a `date:` rule are forced to DATE.
pub fn normalize_document(doc: &mut Document, ruleset: &Ruleset, config: &NormalizerConfig) {
    let updated: Vec<_> = doc
        .timexes
        .iter()
        .map(|t| {
            let force = ruleset.forces_date(&doc.surface(&t.span));
            normalizer::normalize_with(&t.span, doc, config, force).into_annotation(t.id.clone(), t.span)
        })
        .collect();
    doc.timexes = updated;
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Recognize { io, rules } => {
            let (ruleset, config) = load_ruleset(&rules)?;
            let mut docs = load_documents(&io.input)?;
            for d in &mut docs {
                recognize_document(&mut d.doc, &ruleset, &config);
            }
            write_documents(&io, &docs, stdout)
        }
        Command::Normalize { io, rules, anchor } => {
            let (ruleset, _) = load_ruleset(&rules)?;
            let config = NormalizerConfig { f_days: i64::from(anchor.f_days) };
            let mut docs = load_documents(&io.input)?;
            for d in &mut docs {
                if let Some(dct) = anchor.dct {
                    d.doc.dct = dct;
                }
                normalize_document(&mut d.doc, &ruleset, &config);
            }
            write_documents(&io, &docs, stdout)
        }
        Command::Annotate { io, rules, anchor } => {
            let (ruleset, rconfig) = load_ruleset(&rules)?;
            let config = NormalizerConfig { f_days: i64::from(anchor.f_days) };
            let mut docs = load_documents(&io.input)?;
            for d in &mut docs {
                if let Some(dct) = anchor.dct {
                    d.doc.dct = dct;
                }
                recognize_document(&mut d.doc, &ruleset, &rconfig);
                normalize_document(&mut d.doc, &ruleset, &config);
            }
            write_documents(&io, &docs, stdout)
        }
        Command::Train { task, input, model, lexicon, sigma2, max_iter, tol, no_signals } => {
            let valid = sigma2.is_finite() && sigma2 > 0.0 && tol.is_finite() && tol > 0.0 && max_iter > 0;
            if !valid {
                bail!("--sigma2 and --tol must be positive and --max-iter at least 1");
            }
            let lexicon = load_lexicon(&lexicon)?;
            let docs: Vec<Document> = load_documents(&input)?.into_iter().map(|l| l.doc).collect();
            let options = FeatureOptions { signals: !no_signals };
            let set = relations::build_training_set_with(&docs, task, &lexicon, options)?;
            if set.examples.is_empty() {
                bail!("no task {task} relations to train on ({} skipped)", set.skipped);
            }
            let config = TrainingConfig { max_iterations: max_iter, convergence_tol: tol, l2_sigma2: sigma2 };
            let (trained, report) = relations::train_relation_model(&set, &config, options)?;
            write_atomic(&model, &trained.save()?)?;
            writeln!(
                stderr,
                "trained task {task} on {} relations ({} skipped), {} iterations, converged: {}{}",
                set.examples.len(),
                set.skipped,
                report.iterations,
                report.converged,
                if report.degenerate { ", single label" } else { "" }
            )?;
            Ok(())
        }
        Command::Label { task, io, model, lexicon, overwrite } => {
            let text = fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let model = MaxEntModel::load(&text).with_context(|| format!("in {}", model.display()))?;
            let lexicon = load_lexicon(&lexicon)?;
            let mut loaded = load_documents(&io.input)?;
            let mut docs: Vec<Document> = loaded.iter().map(|l| l.doc.clone()).collect();
            if overwrite {
                for doc in &mut docs {
                    let shaped: HashSet<String> = doc
                        .relations
                        .iter()
                        .filter(|r| relations::fits_task(r, doc, task))
                        .map(|r| r.id.clone())
                        .collect();
                    for r in &mut doc.relations {
                        if shaped.contains(&r.id) {
                            r.label = None;
                        }
                    }
                }
            }
            let labels = relations::label_relations(&docs, task, &model, &lexicon)?;
            relations::apply_labels(&mut docs, &labels);
            for (l, d) in loaded.iter_mut().zip(docs) {
                l.doc = d;
            }
            write_documents(&io, &loaded, stdout)
        }
        Command::Score { gold, pred, json } => {
            let gold: Vec<Document> = load_documents(&gold)?.into_iter().map(|l| l.doc).collect();
            let pred: Vec<Document> = load_documents(&pred)?.into_iter().map(|l| l.doc).collect();
            let report = Report::compare(&gold, &pred);
            if json {
                stdout.write_all(report.to_json().as_bytes())?;
            } else {
                write!(stdout, "{report}")?;
            }
            Ok(())
        }
    }
}
