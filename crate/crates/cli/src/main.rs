mod args;
mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::{Context, Failure};

const OUTPUT_ENV: &str = "HETEROCLINIC_OUTPUT_DIR";

fn diagnose(class: &str, kind: &str, message: &str) {
    let doc = json!({ "error": class, "kind": kind, "message": message });
    eprintln!("{doc}");
}

fn error_kind(e: &heteroclinic_core::Error) -> String {
    format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or_default().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            diagnose("config", "arguments", e.to_string().trim());
            return ExitCode::from(2);
        }
    };

    let dir: Option<PathBuf> = cli.output.clone().or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from));
    if cli.gnuplot && dir.is_none() {
        diagnose("config", "arguments", "--gnuplot needs an output directory");
        return ExitCode::from(2);
    }
    let ctx = Context { format: cli.format, gnuplot: cli.gnuplot, integrator: cli.integrator };

    let mut failed_checks = false;
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(a, &ctx),
        Command::GCurve(a) => commands::g_curve(a, &ctx),
        Command::Melnikov(a) => commands::melnikov(a, &ctx),
        Command::Monodromy(a) => commands::monodromy(a, &ctx),
        Command::Manifolds(a) => commands::manifolds(a, &ctx),
        Command::Verify => commands::verify(&ctx).map(|(o, pass)| {
            failed_checks = !pass;
            o
        }),
    };

    let outcome = match result {
        Ok(o) => o,
        Err(Failure::Config(msg)) => {
            diagnose("config", "invalid_input", &msg);
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(e)) => {
            diagnose("numerical", &error_kind(&e), &e.to_string());
            return ExitCode::from(3);
        }
    };

    match &dir {
        Some(d) => {
            if let Err(e) = output::write_all(d, &outcome) {
                diagnose("config", "io", &format!("{}: {e}", d.display()));
                return ExitCode::from(2);
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(outcome.primary.contents.as_bytes());
        }
    }

    if failed_checks {
        diagnose("numerical", "verification", "one or more cross-checks exceeded tolerance");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
