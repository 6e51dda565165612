use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use discoparse::decoder::parse_corpus;
use discoparse::metrics::{evaluate, gap_stats, incrementality_stats, EvalParams};
use discoparse::nn::{load_model, save_model, FORMAT_VERSION};
use discoparse::oracle::{self, assign_heads, HeadRuleTable, OracleKind};
use discoparse::synth;
use discoparse::trainer::{self, log_to_tsv, TrainConfig, LOG_HEADER};
use discoparse::transition::{write_derivations, LabelInventory, SystemKind, TransitionSystem};
use discoparse::treebank::{
    attach_deplabels, parse_discbracket, parse_export, read_conll_deplabels, write_discbracket, write_export, Tree,
};

const MODEL_FILE: &str = "model.bin";
const CONFIG_FILE: &str = "config.txt";
const LOG_FILE: &str = "train.log.tsv";

#[derive(Parser)]
#[command(name = "discoparse", about = "Discontinuous constituency parser", disable_version_flag = true)]
struct Cli {
    /// Print the program and model-format versions.
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it to a directory.
    Train(TrainArgs),
    /// Parse a corpus with a trained model.
    Parse(ParseArgs),
    /// Score predicted trees against gold trees.
    Eval(EvalArgs),
    /// Check oracle round trips or report derivation statistics.
    Oracle(OracleArgs),
    /// Write a synthetic treebank.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Export,
    Discbracket,
}

#[derive(Args)]
struct CorpusArgs {
    /// Treebank format; guessed from the content when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Head rules for trees without head marks: negra, ptb, leftmost or a file.
    #[arg(long)]
    head_rules: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: Option<PathBuf>,
    /// key=value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    features: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Additional key=value settings, as in the configuration file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CoNLL files with dependency labels for the training and dev trees.
    #[arg(long)]
    train_deplabels: Option<PathBuf>,
    #[arg(long)]
    dev_deplabels: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
}

#[derive(Args)]
struct ParseArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Format of both input and output.
    #[arg(long, value_enum)]
    format: Format,
    /// Output file (standard output when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Decoding threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Evaluation parameters; built-in defaults when omitted.
    #[arg(long)]
    param: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print metric/value rows instead of a table.
    #[arg(long)]
    tsv: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    system: String,
    #[arg(long)]
    oracle: String,
    #[arg(long, conflicts_with = "stats", required_unless_present = "stats")]
    check: bool,
    #[arg(long)]
    stats: bool,
    /// Write the derivations here, one sentence per line.
    #[arg(long)]
    derivations: Option<PathBuf>,
    #[command(flatten)]
    corpus: CorpusArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "export")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A one-line failure report: `error: <kind>: <message>`.
#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(kind: &'static str, message: impl std::fmt::Display) -> Self {
        Failure {
            kind,
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            eprintln!("error: usage: {}", first);
            return ExitCode::from(2);
        }
    };
    if cli.version {
        println!("discoparse {} (model format {})", env!("CARGO_PKG_VERSION"), FORMAT_VERSION);
        return ExitCode::SUCCESS;
    }
    let result = match cli.command {
        Some(Command::Train(a)) => cmd_train(a),
        Some(Command::Parse(a)) => cmd_parse(a),
        Some(Command::Eval(a)) => cmd_eval(a),
        Some(Command::Oracle(a)) => cmd_oracle(a),
        Some(Command::Synth(a)) => cmd_synth(a),
        None => Err(Failure::new("usage", "no command given; see --help")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.kind, f.message.replace('\n', " "));
            ExitCode::from(if f.kind == "usage" { 2 } else { 1 })
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {}", path.display(), e)))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Failure::new("io", format!("{}: {}", path.display(), e)))
}

fn sniff(text: &str) -> Format {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with("%%"));
    match first {
        Some(l) if l.starts_with('#') => Format::Export,
        _ => Format::Discbracket,
    }
}

fn read_trees(path: &Path, format: Option<Format>) -> Result<Vec<Tree>> {
    let text = read(path)?;
    let actual = sniff(&text);
    let format = format.unwrap_or(actual);
    if !text.trim().is_empty() && format != actual {
        let name = |f: Format| if f == Format::Export { "export" } else { "discbracket" };
        return Err(Failure::new(
            "format",
            format!("{} looks like {}, not {}", path.display(), name(actual), name(format)),
        ));
    }
    let trees = match format {
        Format::Export => parse_export(&text),
        Format::Discbracket => parse_discbracket(&text),
    };
    trees.map_err(|e| Failure::new("format", format!("{}: {}", path.display(), e)))
}

fn head_table(spec: Option<&str>) -> Result<HeadRuleTable> {
    match spec.unwrap_or("negra") {
        "negra" => Ok(HeadRuleTable::negra()),
        "ptb" => Ok(HeadRuleTable::ptb()),
        "leftmost" => Ok(HeadRuleTable::leftmost()),
        file => HeadRuleTable::parse(&read(Path::new(file))?).map_err(|e| Failure::new("format", format!("{}: {}", file, e.0))),
    }
}

/// Reads a treebank and fills in heads the corpus does not mark.
fn read_headed(path: &Path, corpus: &CorpusArgs) -> Result<Vec<Tree>> {
    let table = head_table(corpus.head_rules.as_deref())?;
    Ok(read_trees(path, corpus.format)?.iter().map(|t| assign_heads(t, &table)).collect())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut config = TrainConfig::default();
    if let Some(p) = &a.config {
        config.apply_text(&read(p)?).map_err(|e| Failure::new("usage", format!("{}: {}", p.display(), e)))?;
    }
    let flags = [
        ("system", &a.system),
        ("oracle", &a.oracle),
        ("features", &a.features),
        ("lr", &a.lr),
        ("epochs", &a.epochs),
        ("seed", &a.seed),
    ];
    let mut overrides: Vec<(String, String)> = flags
        .iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::new("usage", format!("--set expects KEY=VALUE, got {:?}", kv)))?;
        overrides.push((k.to_string(), v.to_string()));
    }
    for (k, v) in &overrides {
        config.set(k, v).map_err(|e| Failure::new("usage", format!("--{}: {}", k, e)))?;
    }
    config.validate().map_err(|e| Failure::new("usage", e))?;

    let mut train = read_headed(&a.train, &a.corpus)?;
    let mut dev = match &a.dev {
        Some(p) => read_headed(p, &a.corpus)?,
        None => Vec::new(),
    };
    for (trees, labels) in [(&mut train, &a.train_deplabels), (&mut dev, &a.dev_deplabels)] {
        if let Some(p) = labels {
            let labs = read_conll_deplabels(&read(p)?).map_err(|e| Failure::new("format", e))?;
            attach_deplabels(trees, &labs).map_err(|e| Failure::new("format", format!("{}: {}", p.display(), e)))?;
        }
    }

    fs::create_dir_all(&a.out).map_err(|e| Failure::new("io", format!("{}: {}", a.out.display(), e)))?;
    write(&a.out.join(CONFIG_FILE), &config.to_string())?;
    eprintln!("{}", LOG_HEADER);
    let trained = trainer::train(&train, &dev, &config, a.workers, |row| eprintln!("{}", row.to_tsv_row()))
        .map_err(|e| Failure::new("train", e))?;
    save_model(&trained.model, a.out.join(MODEL_FILE)).map_err(|e| Failure::new("model", e))?;
    write(&a.out.join(LOG_FILE), &log_to_tsv(&trained.log))?;
    eprintln!("kept epoch {}; model written to {}", trained.best_epoch, a.out.display());
    Ok(())
}

fn cmd_parse(a: ParseArgs) -> Result<()> {
    let path = a.model.join(MODEL_FILE);
    if !path.exists() {
        return Err(Failure::new("model", format!("no model at {}", path.display())));
    }
    let model = load_model(&path).map_err(|e| Failure::new("model", format!("{}: {}", path.display(), e)))?;
    let sentences: Vec<_> = read_trees(&a.input, Some(a.format))?.into_iter().map(|t| t.sentence).collect();
    let (parses, tp) = parse_corpus(&model, &sentences, a.workers).map_err(|e| Failure::new("decode", e))?;
    let trees: Vec<Tree> = parses.into_iter().map(|p| p.tree).collect();
    let text = match a.format {
        Format::Export => write_export(&trees),
        Format::Discbracket => write_discbracket(&trees),
    };
    match &a.output {
        Some(p) => write(p, &text)?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new("io", e))?,
    }
    eprintln!(
        "parsed {} sentences, {} tokens in {:.3} s: {:.1} tok/s, {:.1} sent/s",
        tp.sentences,
        tp.tokens,
        tp.seconds,
        tp.tokens_per_second(),
        tp.sentences_per_second()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let params = match &a.param {
        Some(p) => EvalParams::parse(&read(p)?).map_err(|e| Failure::new("format", format!("{}: {}", p.display(), e)))?,
        None => EvalParams::default(),
    };
    let gold = read_trees(&a.gold, a.format)?;
    let pred = read_trees(&a.pred, a.format)?;
    let ev = evaluate(&gold, &pred, &params).map_err(|e| Failure::new("eval", e))?;
    print!("{}", if a.tsv { ev.to_tsv() } else { ev.to_text() });
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let system: SystemKind = a.system.parse().map_err(|e| Failure::new("usage", e))?;
    let kind: OracleKind = a.oracle.parse().map_err(|e| Failure::new("usage", e))?;
    if !oracle::is_compatible(system, kind) {
        return Err(Failure::new("usage", format!("oracle {} cannot be used with system {}", kind, system)));
    }
    let trees = read_headed(&a.input, &a.corpus)?;
    let mut derivations = Vec::with_capacity(trees.len());
    let mut failures = 0;
    for (i, tree) in trees.iter().enumerate() {
        let id = i + 1;
        match oracle::derive(system, kind, tree) {
            Ok(d) => {
                if a.check {
                    let ok = oracle::round_trip(system, kind, tree).unwrap_or(false);
                    println!("{}\t{}", id, if ok { "ok" } else { "mismatch" });
                    failures += usize::from(!ok);
                }
                derivations.push(d);
            }
            Err(e) => {
                if a.check {
                    println!("{}\terror\t{}", id, e);
                    failures += 1;
                } else {
                    return Err(Failure::new("oracle", format!("sentence {}: {}", id, e)));
                }
                derivations.push(Vec::new());
            }
        }
    }
    if let Some(p) = &a.derivations {
        write(p, &write_derivations(&derivations))?;
    }
    if a.check {
        let n = trees.len();
        println!("# {} of {} sentences round-trip", n - failures, n);
        if failures > 0 {
            return Err(Failure::new("oracle", format!("{} of {} sentences fail the round trip", failures, n)));
        }
        return Ok(());
    }
    let sys = TransitionSystem::new(system, LabelInventory::permissive());
    let mut traces = Vec::with_capacity(trees.len());
    for (i, (t, d)) in trees.iter().zip(&derivations).enumerate() {
        traces.push(sys.trace(t.len(), d).map_err(|e| Failure::new("oracle", format!("sentence {}: {}", i + 1, e)))?);
    }
    let gaps = gap_stats(derivations.iter().map(Vec::as_slice));
    let width = incrementality_stats(&traces).map_err(|e| Failure::new("oracle", e))?;
    println!("sentences\ttotal_gaps\tgap_runs\tmean_consecutive_gaps\tmax_consecutive_gaps\tmean_stack_size");
    println!(
        "{}\t{}\t{}\t{:.2}\t{}\t{:.2}",
        trees.len(),
        gaps.total,
        gaps.runs,
        gaps.mean_run,
        gaps.max_run,
        width
    );
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let trees = synth::generate(a.count, a.seed);
    let text = match a.format {
        Format::Export => write_export(&trees),
        Format::Discbracket => write_discbracket(&trees),
    };
    match &a.output {
        Some(p) => write(p, &text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::new("io", e)),
    }
}
