use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use belieftrack::domain::{decode_corpus, encode_corpus, Story};
use belieftrack::harness::{
    check_assertions, evaluate, parse_assertion, replay, Baseline, EvalOptions, EvalReport, FileConfig, TypeFilter,
};
use belieftrack::oracle::simulate;
use belieftrack::semantics::{RemoteBackend, RemoteConfig, RuleBackend, SemanticBackend, TemplateBank};
use belieftrack::storygen::{generate, GenConfig, GenSet};
use belieftrack::tracker::{KeyMode, Tracker, TrackerOptions};

#[derive(Parser)]
#[command(name = "belieftrack", version, about = "Belief-graph theory-of-mind tracker and benchmark tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Rule,
    Remote,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled story corpus as JSONL.
    Generate {
        #[arg(long)]
        set: GenSet,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        paraphrase: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer every question of a corpus and score against the gold labels.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        backend: Option<BackendKind>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        no_filter: bool,
        /// reality | last-mention
        #[arg(long)]
        baseline: Option<Baseline>,
        /// Build only the belief graphs the questions ask about.
        #[arg(long)]
        lazy: bool,
        /// e.g. `accuracy>=1.0`; may be repeated.
        #[arg(long = "assert")]
        asserts: Vec<String>,
        /// Rows the assertions apply to: all, belief, tb, fb, reality, memory.
        #[arg(long, default_value = "all")]
        types: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print oracle gold answers for every question of a corpus.
    Solve {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run one failing question from an eval report.
    Replay {
        #[arg(long)]
        failure: String,
        /// Directory written by `eval --out`.
        #[arg(long, default_value = ".")]
        report: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the per-sentence tracker log of one story.
    Trace {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 0)]
        story: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_corpus(path: &Path, bank: &TemplateBank) -> Result<Vec<Story>, String> {
    decode_corpus(&read(path)?, bank).map_err(|e| e.to_string())
}

fn make_backend(kind: &str, config: Option<&Path>) -> Result<Box<dyn SemanticBackend>, String> {
    match kind {
        "rule" => Ok(Box::new(RuleBackend::default())),
        "remote" => {
            let cfg = RemoteConfig::load(config).map_err(|e| e.to_string())?;
            Ok(Box::new(RemoteBackend::new(cfg).map_err(|e| e.to_string())?))
        }
        other => Err(format!("unknown backend {other:?}")),
    }
}

#[derive(Serialize)]
struct Gold<'a> {
    story: usize,
    question: usize,
    text: &'a str,
    gold: Option<&'a str>,
    error: Option<String>,
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let bank = TemplateBank::shipped();
    match cli.command {
        Command::Generate { set, n, seed, paraphrase, out } => {
            let mut cfg = GenConfig::new(seed, n);
            cfg.paraphrase = paraphrase;
            let stories = generate(set, &cfg, &bank).map_err(|e| e.to_string())?;
            write(&out, &encode_corpus(&stories).map_err(|e| e.to_string())?)?;
            eprintln!("wrote {} stories to {}", stories.len(), out.display());
        }
        Command::Eval { corpus, backend, m, no_filter, baseline, lazy, asserts, types, config, out } => {
            let file = match &config {
                Some(p) => FileConfig::load(p).map_err(|e| e.to_string())?,
                None => FileConfig::default(),
            };
            let mut opts: EvalOptions = file.eval.options();
            if let Some(m) = m {
                opts.m = m;
            }
            opts.filter &= !no_filter;
            opts.baseline = baseline.or(opts.baseline);
            opts.lazy |= lazy;
            if opts.m == 0 {
                return Err("--m must be at least 1".into());
            }
            let kind = match backend {
                Some(BackendKind::Rule) => "rule",
                Some(BackendKind::Remote) => "remote",
                None => file.eval.backend.as_str(),
            };
            let types: TypeFilter = types.parse().map_err(|e: belieftrack::harness::HarnessError| e.to_string())?;
            let asserts =
                asserts.iter().map(|a| parse_assertion(a)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            let stories = load_corpus(&corpus, &bank)?;
            let backend = make_backend(kind, config.as_deref())?;
            let report = evaluate(&stories, backend.as_ref(), &opts);
            fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            write(&out.join("report.json"), &report.to_json())?;
            let table = report.to_text();
            write(&out.join("report.txt"), &table)?;
            print!("{table}");
            let violations: Vec<String> = asserts.iter().flat_map(|a| check_assertions(&report, a, types)).collect();
            for v in &violations {
                eprintln!("assertion failed: {v}");
            }
            if !violations.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Solve { corpus, out } => {
            let stories = load_corpus(&corpus, &bank)?;
            let mut lines = String::new();
            for (si, story) in stories.iter().enumerate() {
                let trace = simulate(story);
                for (qi, q) in story.questions.iter().enumerate() {
                    let (gold, error) = match &trace {
                        Ok(t) => match t.gold_answer(q) {
                            Ok(g) => (Some(g), None),
                            Err(e) => (None, Some(e.to_string())),
                        },
                        Err(e) => (None, Some(e.to_string())),
                    };
                    let rec = Gold { story: si, question: qi, text: &q.text, gold, error };
                    lines.push_str(&serde_json::to_string(&rec).map_err(|e| e.to_string())?);
                    lines.push('\n');
                }
            }
            match out {
                Some(p) => write(&p, &lines)?,
                None => print!("{lines}"),
            }
        }
        Command::Replay { failure, report, config } => {
            let path = if report.is_dir() { report.join("report.json") } else { report };
            let report = EvalReport::from_json(&read(&path)?).map_err(|e| e.to_string())?;
            let f = report.failure(&failure).map_err(|e| e.to_string())?;
            let backend = make_backend(&report.backend, config.as_deref())?;
            let again = replay(f, backend.as_ref(), &report.options, &bank).map_err(|e| e.to_string())?;
            println!("question:  {}", f.text);
            println!("gold:      {}", f.gold);
            println!("recorded:  {}", f.predicted.as_deref().unwrap_or("-"));
            match &again {
                Ok(p) => println!("replayed:  {p}"),
                Err(e) => println!("replayed:  error: {e}"),
            }
            if again.ok() != f.predicted {
                eprintln!("replayed prediction differs from the recorded one");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Trace { corpus, story, m } => {
            let stories = load_corpus(&corpus, &bank)?;
            let s = stories.get(story).ok_or_else(|| format!("corpus has {} stories", stories.len()))?;
            let backend = RuleBackend::default();
            let options = TrackerOptions { m, keys: KeyMode::All, trace: true };
            let state = Tracker::new(&backend, options).run(s).map_err(|e| e.to_string())?;
            print!("{}", state.trace_jsonl());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
