use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use decision_core::aggregation::Aggregator;
use decision_core::cases::{
    alice_lexicographic, build_alice_case, build_covering_case, random_geometric, run_alice_case, run_covering_case,
    AliceParams,
};
use decision_core::formulation::validate_formulation;
use decision_core::model::{load_model, save_model, solve_model, to_sorted_json, SolveOutcome};
use decision_core::process::{run_process, OracleAnswer, ScriptedOracle, TranscriptEntry};
use decision_core::service::{serve, ServiceConfig};
use decision_core::solvers::{CoverMode, CoveringInstance};
use decision_core::{cases::render_order, Error, Result};

#[derive(Parser)]
#[command(name = "decide", version, about = "Decision problems as partitioning problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model document and report diagnostics.
    Validate { model: PathBuf },
    /// Solve the problem a model document describes.
    Solve {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run one of the worked cases.
    Case {
        #[command(subcommand)]
        case: CaseCommand,
    },
    /// Replay a transcript of answers against the session stored in a model.
    Elicit {
        model: PathBuf,
        /// JSON array of answers, or of `{query, answer}` transcript entries.
        #[arg(long)]
        transcript: PathBuf,
        /// Which stored session to drive; the first one by default.
        #[arg(long)]
        session: Option<String>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Write the advanced session back into the model.
        #[arg(long)]
        save: bool,
    },
    /// Serve the HTTP API on localhost.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "DECIDE_STORE", default_value = "decide-store")]
        store: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CaseCommand {
    /// Minimum facility covering over districts.
    Covering {
        /// 0/1 coverage matrix, one row per district.
        #[arg(long, conflicts_with = "random")]
        fixture: Option<PathBuf>,
        /// Random geometric instance with this many districts.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximize coverage under a budget instead of covering everything.
        #[arg(long, requires = "budget")]
        max_cover: bool,
        #[arg(long)]
        budget: Option<f64>,
        /// Also write the instance's coverage matrix to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Alice deciding whether to submit a paper and book the trip.
    Alice {
        /// Add the "submit and wait" action.
        #[arg(long)]
        with_sw: bool,
        #[arg(long, value_enum, default_value_t = Variant::Lexicographic)]
        variant: Variant,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Lexicographic,
    Majority,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate { model } => validate(&model),
        Command::Solve { model, seed, json } => {
            let outcome = solve_model(&load_model(&model)?, seed)?;
            if json {
                print!("{}", to_sorted_json(&outcome)?);
            } else {
                print_outcome(&outcome);
            }
            Ok(())
        }
        Command::Case { case } => run_case(case),
        Command::Elicit { model, transcript, session, max_iter, save } => {
            elicit(&model, &transcript, session.as_deref(), max_iter, save)
        }
        Command::Serve { port, store, seed } => {
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| Error::StartupError(e.to_string()))?;
            runtime.block_on(serve(ServiceConfig { port, store, seed }))
        }
    }
}

fn validate(path: &Path) -> Result<()> {
    let doc = load_model(path)?;
    let mut checked = false;
    if let Some(f) = &doc.formulation {
        let d = validate_formulation(f)?;
        println!("formulation: ok ({} attributes, {})", f.attributes.len(), f.statement.kind);
        if d.choice {
            println!("note: choice problem (ranking into two classes)");
        }
        for n in &d.notes {
            println!("note: {n}");
        }
        checked = true;
    }
    if let Some(inst) = &doc.covering {
        inst.validate()?;
        println!("covering: ok ({} districts)", inst.len());
        checked = true;
    }
    for s in &doc.sessions {
        s.check_lineage()?;
        println!("session {}: {:?}, {} iterations", s.id, s.status, s.iterations());
        checked = true;
    }
    if !checked {
        return Err(Error::InvalidFormulation("document describes no problem".into()));
    }
    Ok(())
}

fn print_outcome(outcome: &SolveOutcome) {
    match outcome {
        SolveOutcome::Partition { statement, partition, aggregator, rationale, parked } => {
            println!("{statement}:");
            for (i, class) in partition.classes.iter().enumerate() {
                let label = partition.labels.get(i).cloned().unwrap_or_else(|| format!("{}", i + 1));
                let names: Vec<&str> = class.iter().map(|e| e.as_str()).collect();
                println!("  {label}: {}", names.join(", "));
            }
            if let Some(a) = aggregator {
                println!("aggregator: {}", serde_json::to_string(a).unwrap_or_default());
            }
            for r in rationale {
                println!("  because {r}");
            }
            if !parked.is_empty() {
                println!("{} statement(s) kept aside as constraints", parked.len());
            }
        }
        SolveOutcome::Covering { exact, greedy, opened } => {
            println!("exact: {} opened, coverage {}: {{{}}}", exact.opened, exact.covered, opened.join(","));
            println!("greedy: {} opened, coverage {}", greedy.opened, greedy.covered);
        }
    }
}

fn run_case(case: CaseCommand) -> Result<()> {
    match case {
        CaseCommand::Covering { fixture, random, radius, seed, max_cover, budget, emit, json } => {
            let mut inst = match (fixture, random) {
                (Some(path), _) => CoveringInstance::from_matrix_text(
                    &std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                )?,
                (None, Some(n)) => random_geometric(n, radius, seed)?,
                (None, None) => return Err(Error::InvalidArgument("give --fixture or --random".into())),
            };
            if max_cover {
                inst.mode = CoverMode::MaxCover;
            }
            inst.budget = budget;
            let case = build_covering_case(&inst)?;
            let report = run_covering_case(&case)?;
            if let Some(path) = emit {
                let header = format!(
                    "# {} districts; minimum cover opens {}: {{{}}}\n",
                    inst.len(),
                    report.exact.opened,
                    report.exact.opened_districts(&inst).join(",")
                );
                std::fs::write(&path, header + &inst.to_matrix_text())?;
            }
            if json {
                print!("{}", to_sorted_json(&report)?);
            } else {
                print!("{}", report.to_text(&inst));
            }
        }
        CaseCommand::Alice { with_sw, variant, json } => {
            let (instance, f) = build_alice_case(AliceParams::default(), with_sw)?;
            let aggregator = match variant {
                Variant::Lexicographic => alice_lexicographic(),
                Variant::Majority => Aggregator::MajorityRelational { threshold: 0.5 },
            };
            let report = run_alice_case(&instance, &f, &aggregator)?;
            if json {
                print!("{}", to_sorted_json(&report)?);
            } else {
                print!("{}", report.to_text());
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Script {
    Entries(Vec<TranscriptEntry>),
    Answers(Vec<OracleAnswer>),
}

fn elicit(model: &Path, transcript: &Path, id: Option<&str>, max_iter: Option<usize>, save: bool) -> Result<()> {
    let mut doc = load_model(model)?;
    let text = std::fs::read_to_string(transcript).map_err(|e| Error::Io(format!("{}: {e}", transcript.display())))?;
    let script: Script = serde_json::from_str(&text)
        .map_err(|e| Error::ParseError { path: transcript.display().to_string(), message: e.to_string() })?;
    let mut oracle = match script {
        Script::Entries(entries) => ScriptedOracle::from_transcript(&entries),
        Script::Answers(answers) => ScriptedOracle::new(answers),
    };
    let index = match id {
        Some(id) => doc
            .sessions
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::UnknownReference(format!("session {id}")))?,
        None if doc.sessions.is_empty() => return Err(Error::InvalidArgument("model has no session".into())),
        None => 0,
    };
    let session = &mut doc.sessions[index];
    let result = run_process(session, &mut oracle, max_iter);
    println!("status: {:?}, {} iterations", session.status, session.iterations());
    if let Some(p) = &session.current {
        println!("partition: {}", render_order(p));
    }
    let id = session.id.clone();
    let transcript = session.transcript.clone();
    if save {
        doc.transcripts.insert(id, transcript);
        save_model(model, &doc)?;
    }
    result.map(|_| ())
}
