//! cloudql command-line front end.
//!
//! Thin wrapper over the library: every subcommand wires flags into an
//! [`AppConfig`], builds the shared [`Pipeline`], and renders results. Exit
//! codes: 0 success (including empty results), 2 I/O, 3 validation,
//! 4 uncompilable query, 5 internal.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use cloudql::answer::{render_csv, render_json, render_text};
use cloudql::classify::classify_service;
use cloudql::eval::generate::{generate_corpus, GeneratorParams, DEFAULT_REFERENCE_NOW};
use cloudql::eval::{
    load_gold, parse_gold, render_report, run_comparison, Clock, FixedClock, RealClock,
};
use cloudql::ingest::{write_snapshot, ResourceDocument};
use cloudql::nlq::CompileError;
use cloudql::pipeline::{AppConfig, AskError, Asked, OutputFormat, Pipeline, PipelineError};
use cloudql::query::print_ir;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "cloudql",
    version,
    about = "Ontology-driven natural-language queries over a cloud resource inventory"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Corpus file (JSONL, one resource document per line).
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Change-event file (JSONL), applied after the corpus.
    #[arg(long, global = true)]
    events: Option<PathBuf>,
    /// Intent lexicon file; defaults to the built-in lexicon.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Category lexicon file for service classification.
    #[arg(long, global = true)]
    categories: Option<PathBuf>,
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format: table, json, or csv.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    /// Pinned clock (epoch seconds) for temporal phrases and timing output.
    #[arg(long, global = true)]
    now: Option<i64>,
    /// Seed for corpus generation and evaluation.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Print the extracted intent and compiled query before answering.
    #[arg(long, global = true)]
    explain: bool,
    /// Write a JSON report (eval) alongside the human-readable table.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a corpus (and optional events) and print what happened.
    Ingest {
        /// Write the loaded graph back out as a normalized corpus.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Build the semantic index and print its dimensions.
    Index {
        /// LSI rank override.
        #[arg(long)]
        rank: Option<usize>,
        /// Dump the model (singular values and factors) as JSON.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Answer one natural-language question (or run a raw IR query).
    Query {
        /// The question text.
        text: Option<String>,
        /// Raw graph-query IR, bypassing natural-language processing.
        #[arg(long)]
        ir: Option<String>,
        /// Build the semantic index before answering.
        #[arg(long)]
        with_index: bool,
    },
    /// Interactive query loop.
    Repl,
    /// Classify every service document in the corpus.
    Classify,
    /// Compare the ontology pipeline against the keyword baseline.
    Eval {
        /// Gold query file (JSONL). Omit to evaluate on a generated corpus.
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Generate a synthetic corpus and its gold query set.
    Generate {
        /// Corpus output path.
        #[arg(long, default_value = "corpus.jsonl")]
        out: PathBuf,
        /// Gold-file output path.
        #[arg(long, default_value = "gold.jsonl")]
        gold: PathBuf,
        /// Number of compute instances.
        #[arg(long, default_value_t = 40)]
        instances: usize,
    },
    /// Serve the pipeline over local HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait IntoFailure<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> IntoFailure<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn exit_code_for_pipeline(e: &PipelineError) -> u8 {
    match e {
        PipelineError::MissingFile(_) => 2,
        PipelineError::Ingest(cloudql::ingest::IngestError::Io { .. }) => 2,
        PipelineError::Ingest(_) => 3,
        PipelineError::Config(_) | PipelineError::Lexicon(_) | PipelineError::Categories(_) => 3,
        PipelineError::Lsi(_) => 5,
    }
}

fn build_config(global: &GlobalArgs) -> Result<AppConfig, Failure> {
    let mut config = match &global.config {
        Some(path) => AppConfig::from_file(path).map_err(|e| {
            let code = exit_code_for_pipeline(&e);
            Failure {
                code,
                error: e.into(),
            }
        })?,
        None => AppConfig::default(),
    };
    if global.corpus.is_some() {
        config.corpus = global.corpus.clone();
    }
    if global.events.is_some() {
        config.events = global.events.clone();
    }
    if global.lexicon.is_some() {
        config.lexicon = global.lexicon.clone();
    }
    if global.categories.is_some() {
        config.categories = global.categories.clone();
    }
    if let Some(format) = global.format {
        config.format = format;
    }
    if global.now.is_some() {
        config.now = global.now;
    }
    Ok(config)
}

fn build_pipeline(config: AppConfig) -> Result<Pipeline, Failure> {
    Pipeline::new(config).map_err(|e| {
        let code = exit_code_for_pipeline(&e);
        Failure {
            code,
            error: e.into(),
        }
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = build_config(&cli.global)?;

    match cli.command {
        Command::Ingest { snapshot } => {
            if config.corpus.is_none() {
                return Err(Failure {
                    code: 2,
                    error: anyhow::anyhow!("ingest needs --corpus <file>"),
                });
            }
            let pipeline = build_pipeline(config)?;
            let violations = pipeline.graph().validate();
            if !violations.is_empty() {
                for v in &violations {
                    eprintln!("violation: {v}");
                }
                return Err(Failure {
                    code: 3,
                    error: anyhow::anyhow!(
                        "graph failed validation with {} violations",
                        violations.len()
                    ),
                });
            }
            println!(
                "{} nodes, {} edges, {} skipped",
                pipeline.graph().node_count(),
                pipeline.graph().edge_count(),
                pipeline.last_report_skips()
            );
            if let Some(path) = snapshot {
                write_snapshot(pipeline.graph(), &path).or_exit(2)?;
                println!("snapshot written to {}", path.display());
            }
            Ok(())
        }

        Command::Index { rank, dump } => {
            let mut config = config;
            if let Some(rank) = rank {
                config.lsi_rank = rank;
            }
            let mut pipeline = build_pipeline(config)?;
            let (k, terms, docs) = pipeline.build_index().or_exit(5)?;
            println!("indexed rank {k} over {terms} terms x {docs} docs");
            if let Some(path) = dump {
                let dumped = pipeline.dump_index().or_exit(5)?;
                std::fs::write(&path, dumped)
                    .with_context(|| format!("writing {}", path.display()))
                    .or_exit(2)?;
                println!("model dumped to {}", path.display());
            }
            Ok(())
        }

        Command::Query {
            text,
            ir,
            with_index,
        } => {
            let mut config = config;
            if with_index {
                config.use_index = true;
            }
            let format = config.format;
            let explain = cli.global.explain;
            let pipeline = build_pipeline(config)?;
            let asked = match (text, ir) {
                (Some(text), None) => pipeline.ask(&text),
                (None, Some(ir)) => pipeline.ask_ir(&ir),
                _ => {
                    return Err(Failure {
                        code: 4,
                        error: anyhow::anyhow!("provide exactly one of <TEXT> or --ir <IR>"),
                    })
                }
            };
            let asked = map_ask_error(asked)?;
            if explain {
                print_explanation(&asked);
            }
            print_answer(&asked, format);
            Ok(())
        }

        Command::Repl => repl(config),

        Command::Classify => {
            let Some(corpus) = config.corpus.clone() else {
                return Err(Failure {
                    code: 2,
                    error: anyhow::anyhow!("classify needs --corpus <file>"),
                });
            };
            let pipeline = build_pipeline(config)?;
            let text = std::fs::read_to_string(&corpus)
                .with_context(|| format!("reading {}", corpus.display()))
                .or_exit(2)?;
            println!(
                "{:<24} {:<12} {:>6}  Matched features",
                "Service", "Category", "Score"
            );
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let Ok(doc) = serde_json::from_str::<ResourceDocument>(line) else {
                    continue;
                };
                if doc.kind != "Service" {
                    continue;
                }
                let category = classify_service(&doc, pipeline.categories());
                println!(
                    "{:<24} {:<12} {:>5.2}  {}",
                    doc.id,
                    category.label,
                    category.score,
                    category.matched_features.join(", ")
                );
            }
            Ok(())
        }

        Command::Eval { gold } => {
            let (mut config, gold_queries) = match (&config.corpus, gold) {
                (Some(_), Some(gold_path)) => {
                    let gold_queries = load_gold(&gold_path).or_exit(3)?;
                    (config, gold_queries)
                }
                (None, None) => {
                    // Self-contained mode: evaluate on the seeded corpus.
                    let params = GeneratorParams {
                        seed: cli.global.seed,
                        ..GeneratorParams::default()
                    };
                    let (corpus, gold_text) = generate_corpus(&params);
                    let dir = std::env::temp_dir().join(format!("cloudql-eval-{}", params.seed));
                    std::fs::create_dir_all(&dir).or_exit(2)?;
                    let corpus_path = dir.join("corpus.jsonl");
                    std::fs::write(&corpus_path, corpus).or_exit(2)?;
                    let mut config = config;
                    config.corpus = Some(corpus_path);
                    (config, parse_gold(&gold_text).or_exit(3)?)
                }
                _ => {
                    return Err(Failure {
                        code: 2,
                        error: anyhow::anyhow!(
                            "eval needs both --corpus and --gold, or neither (generated corpus)"
                        ),
                    })
                }
            };
            let pinned = config.now.is_some();
            if config.now.is_none() {
                config.now = Some(DEFAULT_REFERENCE_NOW);
            }
            let pipeline = build_pipeline(config)?;
            let real_clock;
            let clock: &dyn Clock = if pinned {
                &FixedClock
            } else {
                real_clock = RealClock::default();
                &real_clock
            };
            let comparison = run_comparison(&pipeline, &gold_queries, clock).or_exit(3)?;
            print!("{}", render_report(&comparison));
            if pinned {
                println!(
                    "(timings pinned to zero by --now; rerun without --now for wall-clock numbers)"
                );
            }
            if let Some(path) = cli.global.report {
                let json = serde_json::to_string_pretty(&comparison).expect("report serializes");
                std::fs::write(&path, json)
                    .with_context(|| format!("writing {}", path.display()))
                    .or_exit(2)?;
                println!("report written to {}", path.display());
            }
            Ok(())
        }

        Command::Generate {
            out,
            gold,
            instances,
        } => {
            let params = GeneratorParams {
                seed: cli.global.seed,
                instances,
                ..GeneratorParams::default()
            };
            let (corpus, gold_text) = generate_corpus(&params);
            let docs = corpus.lines().count();
            let queries = gold_text.lines().count();
            std::fs::write(&out, corpus)
                .with_context(|| format!("writing {}", out.display()))
                .or_exit(2)?;
            std::fs::write(&gold, gold_text)
                .with_context(|| format!("writing {}", gold.display()))
                .or_exit(2)?;
            println!(
                "wrote {docs} documents to {} and {queries} gold queries to {} (seed {}, now {})",
                out.display(),
                gold.display(),
                params.seed,
                params.reference_now
            );
            Ok(())
        }

        Command::Serve { addr } => {
            let addr: std::net::SocketAddr = addr.parse().map_err(|e| Failure {
                code: 3,
                error: anyhow::anyhow!("bad --addr: {e}"),
            })?;
            let pipeline = build_pipeline(config)?;
            let state = cloudql::http::ServeState::new(pipeline);
            let runtime = tokio::runtime::Runtime::new().or_exit(5)?;
            runtime
                .block_on(cloudql::http::serve(state, addr))
                .or_exit(5)?;
            Ok(())
        }
    }
}

fn map_ask_error(result: Result<Asked, AskError>) -> Result<Asked, Failure> {
    result.map_err(|e| match e {
        AskError::Compile(CompileError::UncompilableIntent(ref residual)) => Failure {
            code: 4,
            error: anyhow::anyhow!(
                "could not compile the query; unresolved terms: {}",
                residual.join(", ")
            ),
        },
        AskError::Extract(_) | AskError::Compile(_) | AskError::Parse(_) => Failure {
            code: 4,
            error: e.into(),
        },
        AskError::Exec(_) => Failure {
            code: 5,
            error: e.into(),
        },
    })
}

fn print_explanation(asked: &Asked) {
    if let Some(intent) = &asked.intent {
        println!("intent:");
        println!("  entities:    {:?}", intent.entity_kinds);
        for c in &intent.conditions {
            println!(
                "  condition:   {} {} = {}",
                c.kind,
                c.property,
                c.value.render()
            );
        }
        for f in &intent.filters {
            println!("  filter:      {} -> {}", f.rel_type, f.target_kind);
        }
        if let Some(w) = &intent.time_window {
            println!("  window:      {} in [{}, {}]", w.property, w.start, w.end);
        }
        if let Some(a) = &intent.aggregation {
            println!(
                "  aggregation: {} {} limit {}",
                a.property,
                if a.descending { "desc" } else { "asc" },
                a.limit
            );
        }
        if let Some(user) = &intent.attribution {
            println!("  attribution: {user}");
        }
        if !intent.residual_terms.is_empty() {
            println!("  residual:    {:?}", intent.residual_terms);
        }
        println!("  confidence:  {:.2}", intent.confidence);
    }
    if let Some(compiled) = &asked.compiled {
        println!("compiled query:");
        for line in print_ir(&compiled.ir).lines() {
            println!("  {line}");
        }
    }
    println!();
}

fn print_answer(asked: &Asked, format: OutputFormat) {
    match format {
        OutputFormat::Table => print!("{}", render_text(&asked.answer)),
        OutputFormat::Json => println!("{}", render_json(&asked.answer)),
        OutputFormat::Csv => print!("{}", render_csv(&asked.answer)),
    }
}

fn repl(config: AppConfig) -> Result<(), Failure> {
    let mut format = config.format;
    let mut explain = false;
    let mut pipeline = build_pipeline(config)?;
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();

    eprintln!("cloudql repl; :help for commands");
    loop {
        eprint!("cloudql> ");
        let _ = std::io::stderr().flush();
        let Some(Ok(line)) = lines.next() else {
            return Ok(());
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(':') {
            let mut parts = rest.splitn(2, ' ');
            let command = parts.next().unwrap_or("");
            let arg = parts.next().unwrap_or("").trim();
            match command {
                "quit" | "q" | "exit" => return Ok(()),
                "help" => {
                    eprintln!(":ingest <corpus.jsonl>   load more documents");
                    eprintln!(":index                   build the semantic index");
                    eprintln!(":explain on|off          toggle intent/IR output");
                    eprintln!(":format table|json|csv   switch output format");
                    eprintln!(":ir <query>              run raw IR");
                    eprintln!(":quit                    leave");
                }
                "ingest" => match pipeline.ingest_corpus_file(arg) {
                    Ok(report) => println!("{}", report.summary()),
                    Err(e) => eprintln!("error: {e}"),
                },
                "index" => match pipeline.build_index() {
                    Ok((k, terms, docs)) => {
                        println!("indexed rank {k} over {terms} terms x {docs} docs")
                    }
                    Err(e) => eprintln!("error: {e}"),
                },
                "explain" => {
                    explain = arg == "on";
                    eprintln!("explain {}", if explain { "on" } else { "off" });
                }
                "format" => match arg.parse() {
                    Ok(f) => {
                        format = f;
                        eprintln!("format set");
                    }
                    Err(e) => eprintln!("error: {e}"),
                },
                "ir" => match pipeline.ask_ir(arg) {
                    Ok(asked) => print_answer(&asked, format),
                    Err(e) => eprintln!("error: {e}"),
                },
                other => eprintln!("error: unknown command :{other}"),
            }
            continue;
        }
        match pipeline.ask(line) {
            Ok(asked) => {
                if explain {
                    print_explanation(&asked);
                }
                print_answer(&asked, format);
            }
            Err(e) => eprintln!("error: {e}"),
        }
    }
}
