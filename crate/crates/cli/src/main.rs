use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use courseqa::{router, AppState, CorpusSource};
use courseqa_core::app::{run_suite, Pipeline};
use courseqa_core::kb::LoadReport;
use courseqa_core::query::BuildOptions;

#[derive(Parser)]
#[command(
    name = "courseqa",
    version,
    about = "Answer Vietnamese questions about a course library"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArg {
    /// JSON Lines corpus; the bundled demo corpus when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

impl CorpusArg {
    fn source(&self) -> CorpusSource {
        CorpusSource::from_arg(self.corpus.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus and report records, errors and consistency.
    Load {
        #[command(flatten)]
        corpus: CorpusArg,
    },
    /// Answer one question.
    Ask {
        question: String,
        #[command(flatten)]
        corpus: CorpusArg,
        /// Also print the parse tree and intent.
        #[arg(long)]
        explain: bool,
        /// Match literals as unanchored substrings.
        #[arg(long)]
        substring_match: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Read questions from standard input, one per line.
    Repl {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        explain: bool,
    },
    /// Run a question suite and print the pass ratio.
    Suite {
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        corpus: CorpusArg,
        /// Print every case, not only failures.
        #[arg(long)]
        verbose: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of web UI assets served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

fn load_graph(source: &CorpusSource) -> Result<LoadReport> {
    let report = source.load()?;
    for e in &report.errors {
        log::warn!("{e}");
    }
    for v in &report.violations {
        log::warn!("{v}");
    }
    Ok(report)
}

fn load(source: &CorpusSource) -> Result<ExitCode> {
    let report = source.load()?;
    let stats = report.graph.stats();
    println!("corpus: {}", source.describe());
    println!("records loaded: {}", report.records);
    println!("records rejected: {}", report.errors.len());
    for e in &report.errors {
        println!("  {e}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("inferred triples: {}", report.inferred);
    println!("consistency violations: {}", report.violations.len());
    for v in &report.violations {
        println!("  {v}");
    }
    println!(
        "entities {} literals {} triples {} courses {} authors {} publishers {}",
        stats.entities,
        stats.literals,
        stats.triples,
        stats.courses,
        stats.authors,
        stats.publishers
    );
    let clean = report.errors.is_empty() && report.violations.is_empty();
    Ok(if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn repl(pipeline: &Pipeline, source: &CorpusSource, mut explain: bool) -> Result<()> {
    let graph = load_graph(source)?.graph;
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        match line.trim() {
            "" => continue,
            ":q" | ":quit" => break,
            ":explain" => {
                explain = !explain;
                println!("explain {}", if explain { "on" } else { "off" });
            }
            q => print!("{}", pipeline.answer(q, &graph).render(explain)),
        }
    }
    Ok(())
}

async fn serve(
    pipeline: Pipeline,
    source: CorpusSource,
    addr: SocketAddr,
    static_dir: Option<PathBuf>,
) -> Result<()> {
    let graph = load_graph(&source)?.graph;
    let state = Arc::new(AppState::new(pipeline, source, graph));
    let app = router(Arc::clone(&state), static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    log::info!("serving {} on http://{addr}", state.source.describe());
    #[cfg(unix)]
    {
        let state = Arc::clone(&state);
        let mut hup = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::hangup())?;
        tokio::spawn(async move {
            while hup.recv().await.is_some() {
                match state.reload() {
                    Ok(r) => log::info!("reloaded {} records", r.records),
                    Err(e) => log::error!("reload failed, keeping old graph: {e:#}"),
                }
            }
        });
    }
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Load { corpus } => load(&corpus.source()),
        Command::Ask {
            question,
            corpus,
            explain,
            substring_match,
            json,
        } => {
            let pipeline = Pipeline::seed().with_options(BuildOptions {
                substring_match,
                ..Default::default()
            });
            let graph = load_graph(&corpus.source())?.graph;
            let report = pipeline.answer(&question, &graph);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render(explain));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Repl { corpus, explain } => {
            repl(&Pipeline::seed(), &corpus.source(), explain)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite {
            file,
            corpus,
            verbose,
        } => {
            let graph = load_graph(&corpus.source())?.graph;
            let result = run_suite(&file, &graph, &Pipeline::seed())?;
            for o in &result.outcomes {
                if verbose || !o.passed {
                    let mark = if o.passed { "pass" } else { "FAIL" };
                    println!(
                        "{mark} #{} {} [{}]",
                        o.index,
                        o.question,
                        o.rule_id.as_deref().unwrap_or("-")
                    );
                    for r in &o.reasons {
                        println!("     {r}");
                    }
                }
            }
            println!("{}", result.summary());
            Ok(if result.passed == result.total {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Serve {
            corpus,
            port,
            host,
            static_dir,
        } => {
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .context("invalid --host/--port")?;
            tokio::runtime::Runtime::new()?.block_on(serve(
                Pipeline::seed(),
                corpus.source(),
                addr,
                static_dir,
            ))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
