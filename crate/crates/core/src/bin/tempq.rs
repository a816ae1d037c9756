//! Command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tempq::eval::{load_benchmark, Pipeline};
use tempq::evoke::Structure;
use tempq::ground::GroundingConfig;
use tempq::kg::KnowledgeGraph;
use tempq::rank::{SamplingMode, ScorerModel, DEFAULT_NEGATIVES};

#[derive(Parser)]
#[command(name = "tempq", version, about = "Temporal question answering over a knowledge graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Knowledge graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated structure numbers to switch off, e.g. `4,5,6`.
    #[arg(long, value_delimiter = ',')]
    disable_is: Vec<u8>,
    /// Grounding config JSON (enabled_is, beam_width, max_hops).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one question.
    Answer {
        #[command(flatten)]
        common: Common,
        /// Scorer model JSON; the untrained scorer when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        question: String,
    },
    /// Show annotation, constraints, templates and scored candidates.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        question: String,
    },
    /// Score a benchmark.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        benchmark: PathBuf,
    },
    /// Fit a scorer on a benchmark and write it to `--model`.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// full, no-confusing, no-irrelevant or random.
        #[arg(long, default_value = "full")]
        sampling_mode: SamplingMode,
        #[arg(long, default_value_t = DEFAULT_NEGATIVES)]
        negatives_per_positive: usize,
    },
}

type Error = Box<dyn std::error::Error>;

const UNANSWERABLE: u8 = 2;

fn config(common: &Common) -> Result<GroundingConfig, Error> {
    let base = match &common.config {
        Some(p) => GroundingConfig::load(p)?,
        None => GroundingConfig::default(),
    };
    let disabled = common
        .disable_is
        .iter()
        .map(|&n| Structure::from_number(n).ok_or_else(|| format!("no interpretation structure {n}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(base.without(&disabled))
}

fn model(path: Option<&PathBuf>) -> Result<ScorerModel, Error> {
    Ok(match path {
        Some(p) => ScorerModel::load(p)?,
        None => ScorerModel::untrained(),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Answer { common, model: m, question } => {
            let g = KnowledgeGraph::load(&common.graph)?;
            let p = Pipeline::new(&g, config(&common)?, model(m.as_ref())?);
            let a = p.answer(&question);
            if common.json {
                println!("{}", serde_json::to_string_pretty(&a)?);
            } else if let Some(debug) = &a.debug {
                println!("answers: {}", a.answers.to_strings().into_iter().collect::<Vec<_>>().join(", "));
                println!("{debug}");
            } else {
                println!("unanswerable");
            }
            Ok(if a.candidates == 0 { ExitCode::from(UNANSWERABLE) } else { ExitCode::SUCCESS })
        }
        Command::Trace { common, model: m, question } => {
            let g = KnowledgeGraph::load(&common.graph)?;
            let p = Pipeline::new(&g, config(&common)?, model(m.as_ref())?);
            let t = p.trace(&question);
            if common.json {
                println!("{}", serde_json::to_string_pretty(&t)?);
            } else {
                print!("{}", t.to_text());
            }
            Ok(if t.candidates.is_empty() { ExitCode::from(UNANSWERABLE) } else { ExitCode::SUCCESS })
        }
        Command::Evaluate { common, model: m, benchmark } => {
            let g = KnowledgeGraph::load(&common.graph)?;
            let bench = load_benchmark(&benchmark)?;
            let report = Pipeline::new(&g, config(&common)?, model(m.as_ref())?).evaluate(&bench);
            if common.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_table());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Train { common, model: out, benchmark, seed, sampling_mode, negatives_per_positive } => {
            let g = KnowledgeGraph::load(&common.graph)?;
            let bench = load_benchmark(&benchmark)?;
            let p = Pipeline::new(&g, config(&common)?, ScorerModel::untrained());
            let outcome = p.train(&bench, negatives_per_positive, sampling_mode, seed)?;
            std::fs::write(&out, outcome.model.to_json())?;
            if common.json {
                println!("{}", serde_json::to_string_pretty(&outcome)?);
            } else {
                for (label, n) in &outcome.counts {
                    println!("{}: {n}", serde_json::to_value(label)?.as_str().unwrap_or_default());
                }
                for id in &outcome.skipped {
                    println!("skipped: {id}");
                }
                println!("model written to {}", out.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
