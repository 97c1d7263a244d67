use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use fiforge::degseq::{self, DegreeSequence};
use fiforge::fintest::{coarsest_equitable_graph, fractionally_isomorphic};
use fiforge::io;
use fiforge::pipeline::{self, RunMode};

#[derive(Parser)]
#[command(name = "forge", version, about = "Fractionally isomorphic graphs from step graphons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a fractionally isomorphic family from a config document.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Refuse to fall back to practical constants.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Degree sequence tools.
    Degseq {
        #[command(subcommand)]
        command: DegseqCommand,
    },
    /// Fractional isomorphism tools.
    Fi {
        #[command(subcommand)]
        command: FiCommand,
    },
}

#[derive(Subcommand)]
enum DegseqCommand {
    /// Decide graphicality, or bigraphicality with --right.
    Check {
        degrees: String,
        #[arg(long)]
        right: Option<String>,
    },
    /// Print a realization as an edge list.
    Realize {
        degrees: String,
        #[arg(long)]
        right: Option<String>,
    },
}

#[derive(Subcommand)]
enum FiCommand {
    /// Compare two edge-list files.
    Check { a: PathBuf, b: PathBuf },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    General,
    Regular,
}

fn run(config: PathBuf, out: PathBuf, strict: bool, mode: Option<ModeArg>, seed: Option<u64>) -> Result<bool> {
    let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = io::parse_config(&text)?;
    cfg.strict |= strict;
    if let Some(m) = mode {
        cfg.mode = match m {
            ModeArg::General => RunMode::General,
            ModeArg::Regular => RunMode::Regular,
        };
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let result = pipeline::run(&cfg)?;
    fs::create_dir_all(&out)?;
    for (k, m) in result.members.iter().enumerate() {
        fs::write(out.join(format!("member_{k}.edges")), io::edge_list(m.graph.graph()))?;
        fs::write(out.join(format!("member_{k}.parts")), io::part_file(m.graph.part_of()))?;
    }
    fs::write(out.join("certificate.json"), serde_json::to_string_pretty(&result.certificate)?)?;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(&result.report())?)?;
    let ok = result.family_ok();
    println!(
        "n={} members={} family_ok={ok}",
        result.params.n,
        result.members.len()
    );
    Ok(ok)
}

fn degseq_cmd(cmd: DegseqCommand) -> Result<bool> {
    match cmd {
        DegseqCommand::Check { degrees, right } => {
            let a = io::parse_int_list(&degrees)?;
            let verdict = match right {
                None => degseq::check_graphic(&DegreeSequence::new(a)),
                Some(r) => degseq::check_bigraphic(&DegreeSequence::new(a), &DegreeSequence::new(io::parse_int_list(&r)?)),
            };
            match verdict {
                Ok(()) => {
                    println!("feasible");
                    Ok(true)
                }
                Err(e) => {
                    println!("infeasible: {e}");
                    Ok(false)
                }
            }
        }
        DegseqCommand::Realize { degrees, right } => {
            let a = io::parse_int_list(&degrees)?;
            let g = match right {
                None => degseq::realize_graphic(&DegreeSequence::new(a))?,
                Some(r) => degseq::realize_bigraphic(&DegreeSequence::new(a), &DegreeSequence::new(io::parse_int_list(&r)?))?
                    .to_graph(),
            };
            print!("{}", io::edge_list(&g));
            Ok(true)
        }
    }
}

fn fi_cmd(cmd: FiCommand) -> Result<bool> {
    let FiCommand::Check { a, b } = cmd;
    let ga = io::parse_edge_list(&fs::read_to_string(&a).with_context(|| format!("reading {}", a.display()))?)?;
    let gb = io::parse_edge_list(&fs::read_to_string(&b).with_context(|| format!("reading {}", b.display()))?)?;
    let verdict = fractionally_isomorphic(&ga, &gb);
    println!("fractionally_isomorphic: {verdict}");
    println!("A: {}", serde_json::to_string(&coarsest_equitable_graph(&ga).1)?);
    println!("B: {}", serde_json::to_string(&coarsest_equitable_graph(&gb).1)?);
    Ok(verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, strict, mode, seed } => run(config, out, strict, mode, seed),
        Command::Degseq { command } => degseq_cmd(command),
        Command::Fi { command } => fi_cmd(command),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
