//! `turnlab`: command-line front end for the streaming laboratory.

mod args;
mod commands;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Where results go: `--out` or stdout.
pub fn open_output(path: Option<&std::path::Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::PromiseRun(a) => commands::promise_run(&cli.global, a),
        Command::TriangleCount(a) => commands::triangle_count(&cli.global, a),
        Command::CompileSketch(a) => commands::compile_sketch(&cli.global, a),
        Command::ModuleCheck(a) => commands::module_check(&cli.global, a),
        Command::StreamGen(a) => commands::stream_gen(&cli.global, a),
    };
    match result {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in failures {
                eprintln!("assertion failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
