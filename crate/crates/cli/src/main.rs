//! Command line front end: parses one declarative input file, runs a
//! command, and prints a byte-stable report.

use clap::Parser;
use sheafstack_cli::{report, workspace};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sheafstack",
    version,
    about = "exact Koszul homology, Gysin maps and virtual classes on sheaf stacks"
)]
struct Args {
    /// input file with declarative blocks
    #[arg(long)]
    input: std::path::PathBuf,

    /// command: groebner | homology | gysin | vsheaf | apot-check | dt
    #[arg(long)]
    cmd: String,

    /// emit the report as JSON
    #[arg(long)]
    json: bool,

    /// truncation bound for Hilbert-series fallbacks
    #[arg(long, default_value_t = 8)]
    degree_bound: i64,

    /// default monomial order for blocks that do not state one
    #[arg(long, default_value = "grevlex")]
    order: String,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let src = match std::fs::read_to_string(&args.input) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {}", args.input.display(), e);
            return ExitCode::from(2);
        }
    };
    let ws = match workspace::Workspace::from_source(&src, &args.order) {
        Ok(ws) => ws,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };
    match report::run(&ws, &args.cmd, args.degree_bound) {
        Ok(outcome) => {
            if args.json {
                println!("{}", serde_json::to_string_pretty(&outcome.json).unwrap());
            } else {
                print!("{}", outcome.text);
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
