//! Command-line front end for the `modsched` solvers: JSON documents, a
//! seeded instance generator and a benchmark harness.

pub mod bench;
pub mod commands;
pub mod doc;
pub mod gen;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CmdResult, Failure, EXIT_OK};
use doc::{document_value, parse_document, render, InputError, Kind};
use gen::{GenKind, GenParams};

#[derive(Debug, Parser)]
#[command(
    name = "modsched",
    version,
    about = "Exact multiway partitioning and uniform-machine makespan solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Problem {
    Partition,
    Makespan,
    Ilp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenerateKind {
    FeasiblePartition,
    UniformRandom,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BenchFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance document.
    Solve {
        problem: Problem,
        file: PathBuf,
        /// Only try this size as the pivot.
        #[arg(long)]
        pivot: Option<u64>,
        /// Include the greedy repair trace (partition only).
        #[arg(long)]
        trace: bool,
    },
    /// Check the assignment stored in a document.
    Verify { file: PathBuf },
    /// Generate an instance document.
    Gen {
        kind: GenerateKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of distinct sizes.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Largest size.
        #[arg(long, default_value_t = 5)]
        pmax: u64,
        /// Number of machines.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Total number of jobs.
        #[arg(long, default_value_t = 6)]
        n: u64,
        /// Fixed distinct sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
        /// Largest speed (uniform-random only).
        #[arg(long, default_value_t = 3)]
        smax: u64,
    },
    /// Solve every `*.json` document in a directory and tabulate the runs.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, value_enum, default_value_t = BenchFormat::Csv)]
        format: BenchFormat,
    },
    /// Solve a document by exhaustive search.
    Oracle {
        file: PathBuf,
        /// Node budget for the search.
        #[arg(long, default_value_t = modsched::oracle::DEFAULT_BUDGET)]
        budget: u64,
    },
}

/// What a command writes and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Response {
    fn failure(failure: Failure) -> Self {
        Response {
            stdout: String::new(),
            stderr: format!("{failure}\n"),
            code: failure.code(),
        }
    }
}

fn read(file: &PathBuf) -> Result<doc::Document, Failure> {
    let text = fs::read_to_string(file)
        .map_err(|e| InputError(format!("cannot read {}: {e}", file.display())))?;
    Ok(parse_document(&text)?)
}

fn respond(result: CmdResult) -> Response {
    match result {
        Ok(outcome) => Response {
            stdout: render(&outcome.document),
            stderr: String::new(),
            code: outcome.code,
        },
        Err(failure) => Response::failure(failure),
    }
}

pub fn run(cli: Cli) -> Response {
    match cli.command {
        Command::Solve {
            problem,
            file,
            pivot,
            trace,
        } => {
            let kind = match problem {
                Problem::Partition => Kind::Partition,
                Problem::Makespan => Kind::Scheduling,
                Problem::Ilp => Kind::Mcilp,
            };
            respond(read(&file).and_then(|doc| commands::solve(kind, &doc, pivot, trace)))
        }
        Command::Verify { file } => respond(read(&file).and_then(|doc| commands::verify(&doc))),
        Command::Oracle { file, budget } => {
            respond(read(&file).and_then(|doc| commands::oracle(&doc, budget)))
        }
        Command::Gen {
            kind,
            seed,
            d,
            pmax,
            m,
            n,
            sizes,
            smax,
        } => {
            let kind = match kind {
                GenerateKind::FeasiblePartition => GenKind::FeasiblePartition,
                GenerateKind::UniformRandom => GenKind::UniformRandom,
            };
            let params = GenParams {
                seed,
                d,
                p_max: pmax,
                machines: m,
                jobs: n,
                sizes,
                max_speed: smax,
            };
            match gen::generate(kind, &params) {
                Ok(doc) => Response {
                    stdout: render(&document_value(&doc)),
                    stderr: String::new(),
                    code: EXIT_OK,
                },
                Err(e) => Response::failure(e.into()),
            }
        }
        Command::Bench {
            dir,
            repetitions,
            format,
        } => match bench::run_bench(&dir, repetitions) {
            Ok(rows) => {
                let format = match format {
                    BenchFormat::Csv => bench::Format::Csv,
                    BenchFormat::Json => bench::Format::Json,
                };
                let code = if rows.iter().all(|r| r.verified) {
                    EXIT_OK
                } else {
                    commands::EXIT_NEGATIVE
                };
                Response {
                    stdout: bench::render_rows(&rows, format),
                    stderr: String::new(),
                    code,
                }
            }
            Err(e) => Response::failure(e.into()),
        },
    }
}
