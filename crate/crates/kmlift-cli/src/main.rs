#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cli;
mod commands;
mod report;
mod scenario;
mod suite;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use cli::{Cli, Command, Format};
use scenario::Ctx;

/// Optional override of the worker count.
const THREADS_VAR: &str = "KMLIFT_THREADS";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                kmlift::par::set_threads(n);
            }
            _ => {
                eprintln!("error: {THREADS_VAR}={v:?} is not a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let format = cli.global.format;
    let result = Ctx::new(&cli.global).and_then(|ctx| match &cli.command {
        Command::Lattice(c) => commands::lattice(c, &ctx),
        Command::Theta(c) => commands::theta(c, &ctx),
        Command::Geometry(c) => commands::geometry(c, &ctx),
        Command::Poly(c) => commands::poly(c, &ctx),
        Command::Unfold(c) => commands::unfold(c, &ctx),
        Command::Inject(c) => commands::inject(c, &ctx),
        Command::Suite(c) => commands::suite_cmd(c, &ctx, format == Format::Text),
    });
    match result {
        Ok(report) => {
            report.print(format);
            if let Some(path) = &cli.global.out {
                if let Err(e) = report.write(path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            if format == Format::Json {
                println!("{}", serde_json::to_string_pretty(&json!({"error": {"kind": e.kind(), "message": e.to_string()}})).expect("serializes"));
            }
            ExitCode::from(2)
        }
    }
}
