use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dataclean::evaluation::{align_repaired, inject_errors, score, ErrorSpec, GroundTruth};
use dataclean::mln_index::build_index;
use dataclean::partition::run_partitioned;
use dataclean::pipeline::{clean_standalone, delimiter_byte, CleanOptions, FileConfig};
use dataclean::{
    load_relation, parse_rules, write_relation, MetricKind, Relation, RepairReport, Rule, Stage,
    WeightMode,
};

#[derive(Parser)]
#[command(
    name = "dataclean",
    version,
    about = "Rule-based cleaning of delimited tables"
)]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a table and write the repaired table and a JSON repair report.
    Clean(CleanArgs),
    /// Corrupt a clean table with typos and replacement errors.
    Inject(InjectArgs),
    /// Score a repaired table against the clean one.
    Score(ScoreArgs),
    /// Write the rule index of a table as JSON.
    IndexDump(IndexArgs),
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Field delimiter, a single character (`\t` for tab).
    #[arg(long)]
    delimiter: Option<String>,
}

#[derive(Args)]
struct CleanArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    dump_index: Option<PathBuf>,
    #[arg(long)]
    metric: Option<MetricKind>,
    #[arg(long)]
    weights: Option<WeightMode>,
    #[arg(long)]
    refine_iters: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    parts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct InjectArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the injected-error list as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    error_rate: Option<f64>,
    #[arg(long)]
    replacement_ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ScoreArgs {
    /// The dirty table that was cleaned.
    #[command(flatten)]
    io: Io,
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    repaired: PathBuf,
    /// Repair report written by `clean`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Where to write the metrics as JSON; printed to stdout otherwise.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long)]
    dump_index: Option<PathBuf>,
}

struct Inputs {
    rel: Relation,
    rules: Vec<Rule>,
    delimiter: u8,
}

fn pick<T>(flag: Option<T>, file: Option<T>, what: &str) -> Result<T> {
    flag.or(file)
        .with_context(|| format!("missing --{what} (flag or config file)"))
}

fn load_inputs(io: &Io, cfg: &FileConfig) -> Result<Inputs> {
    let delimiter = match io.delimiter.as_deref() {
        Some("\\t") => '\t',
        Some(s) if s.chars().count() == 1 => s.chars().next().unwrap(),
        Some(s) => bail!("delimiter must be one character, got {s:?}"),
        None => cfg.delimiter.unwrap_or(','),
    };
    let delimiter = delimiter_byte(delimiter)?;
    let input = pick(io.input.clone(), cfg.input.clone(), "input")?;
    let rules_path = pick(io.rules.clone(), cfg.rules.clone(), "rules")?;
    let rel = load_relation(&input, delimiter, true)?;
    let rules = parse_rules(&rules_path, rel.schema())
        .with_context(|| format!("reading rules from {}", rules_path.display()))?;
    Ok(Inputs {
        rel,
        rules,
        delimiter,
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn clean(args: CleanArgs, cfg: &FileConfig) -> Result<()> {
    let inputs = load_inputs(&args.io, cfg)?;
    let output = pick(args.output, cfg.output.clone(), "output")?;
    let mut opts = CleanOptions::default();
    opts.tau = args.tau.or(cfg.tau).unwrap_or(opts.tau);
    opts.metric = args.metric.or(cfg.metric).unwrap_or(opts.metric);
    opts.weights.mode = args.weights.or(cfg.weights).unwrap_or(opts.weights.mode);
    opts.weights.refine_iters = args
        .refine_iters
        .or(cfg.refine_iters)
        .unwrap_or(opts.weights.refine_iters);
    opts.parts = args.parts.or(cfg.parts).unwrap_or(opts.parts);
    opts.seed = args.seed.or(cfg.seed).unwrap_or(opts.seed);
    opts.validate()?;

    let (repaired, report) = if opts.parts <= 1 {
        let (repaired, report, index) = clean_standalone(&inputs.rel, &inputs.rules, &opts);
        if let Some(path) = args.dump_index.or(cfg.dump_index.clone()) {
            index.dump(&inputs.rules, &path)?;
        }
        (repaired, report)
    } else {
        let run = run_partitioned(&inputs.rel, &inputs.rules, &opts)?;
        for (part, t) in run.partitioning.parts.iter().zip(&run.timings) {
            println!(
                "part {}: {} tuples, centroid {}, {:.3} s",
                part.id,
                part.len(),
                part.centroid,
                t.as_secs_f64()
            );
        }
        if args.dump_index.is_some() || cfg.dump_index.is_some() {
            eprintln!("note: --dump-index is ignored in partitioned mode");
        }
        (run.relation, run.report)
    };

    write_relation(&repaired, &output, inputs.delimiter)?;
    if let Some(path) = args.report.or(cfg.report.clone()) {
        report.write_json(&path)?;
    }
    println!(
        "{} tuples in, {} out: {} AGP, {} RSC, {} FSCR changes, {} duplicates removed",
        inputs.rel.len(),
        repaired.len(),
        report.count(Stage::Agp),
        report.count(Stage::Rsc),
        report.count(Stage::Fscr),
        report.count(Stage::Dedupe),
    );
    Ok(())
}

fn inject(args: InjectArgs, cfg: &FileConfig) -> Result<()> {
    let inputs = load_inputs(&args.io, cfg)?;
    let output = pick(args.output, cfg.output.clone(), "output")?;
    let defaults = ErrorSpec::default();
    let spec = ErrorSpec {
        rate: args.error_rate.or(cfg.error_rate).unwrap_or(defaults.rate),
        replacement_ratio: args
            .replacement_ratio
            .or(cfg.replacement_ratio)
            .unwrap_or(defaults.replacement_ratio),
        seed: args.seed.or(cfg.seed).unwrap_or(defaults.seed),
        target_attributes: None,
    };
    let (dirty, truth) = inject_errors(&inputs.rel, &inputs.rules, &spec)?;
    write_relation(&dirty, &output, inputs.delimiter)?;
    if let Some(path) = args.report.or(cfg.report.clone()) {
        write_json(&truth.errors, &path)?;
    }
    println!(
        "corrupted {} cells of {} tuples",
        truth.errors.len(),
        inputs.rel.len()
    );
    Ok(())
}

fn score_cmd(args: ScoreArgs, cfg: &FileConfig) -> Result<()> {
    let inputs = load_inputs(&args.io, cfg)?;
    let clean = load_relation(&args.clean, inputs.delimiter, true)?;
    let repaired = load_relation(&args.repaired, inputs.delimiter, true)?;
    let report = match args.report.or(cfg.report.clone()) {
        Some(path) => RepairReport::read_json(path)?,
        None => RepairReport::default(),
    };
    let repaired = align_repaired(repaired, &inputs.rel, &report)
        .context("repaired table does not match the report's duplicate removals")?;
    let truth = GroundTruth::from_relations(clean, &inputs.rel)?;
    let metrics = score(&truth, &inputs.rel, &repaired, &report, &inputs.rules)?;
    match args.output.or(cfg.output.clone()) {
        Some(path) => {
            write_json(&metrics, &path)?;
            println!(
                "precision {:.4}  recall {:.4}  F1 {:.4}",
                metrics.overall.precision, metrics.overall.recall, metrics.overall.f1
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&metrics)?),
    }
    Ok(())
}

fn index_dump(args: IndexArgs, cfg: &FileConfig) -> Result<()> {
    let inputs = load_inputs(&args.io, cfg)?;
    let index = build_index(&inputs.rel, &inputs.rules);
    match args.dump_index.or(cfg.dump_index.clone()) {
        Some(path) => index.dump(&inputs.rules, &path)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&index.to_json(&inputs.rules))?
        ),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Clean(a) => clean(a, &cfg),
        Command::Inject(a) => inject(a, &cfg),
        Command::Score(a) => score_cmd(a, &cfg),
        Command::IndexDump(a) => index_dump(a, &cfg),
    }
}
