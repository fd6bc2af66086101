//! Problem-file front end for lepage-core: parsing, command dispatch and
//! output in text, LaTeX or s-expression form.

pub mod commands;
pub mod emit;
pub mod error;
pub mod problem;
pub mod sexpr;
pub mod syntax;

use std::io::Read;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{run_command, Command};
pub use emit::{emit, Format, OutputDocument, Payload, PrintBasis};
pub use error::{CliError, ParseError};
pub use problem::{parse_problem, ProblemFile};

#[derive(Parser, Debug, Clone)]
#[command(name = "lepage", version, about = "Lepage equivalents of variational problems on jet bundles")]
pub struct Args {
    /// Construction or check to run.
    #[arg(value_enum, required_unless_present = "suite")]
    pub command: Option<Command>,

    /// Problem file; standard input when absent or `-`.
    pub input: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[arg(long, value_enum, default_value_t = PrintBasis::Contact)]
    pub basis: PrintBasis,

    /// Highest jet order available to the computation.
    #[arg(long)]
    pub order_cap: Option<usize>,

    /// Run a named verification suite instead of a command.
    #[arg(long, conflicts_with = "command")]
    pub suite: Option<String>,
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn failure(e: CliError) -> Outcome {
    Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() }
}

fn run_suite(name: &str) -> Outcome {
    match lepage_core::suite::run(name) {
        Ok(Some(report)) => {
            let mut out = String::new();
            for (check, ok) in &report.checks {
                out.push_str(&format!("{} {check}\n", if *ok { "PASS" } else { "FAIL" }));
            }
            let failed = report.failures().len();
            out.push_str(&format!("{}: {} of {} checks passed\n", report.name, report.checks.len() - failed, report.checks.len()));
            Outcome { stdout: out, stderr: String::new(), code: if failed == 0 { 0 } else { 1 } }
        }
        Ok(None) => failure(CliError::Usage(format!(
            "unknown suite `{name}`; available: {}",
            lepage_core::suite::SUITES.join(", ")
        ))),
        Err(e) => failure(e.into()),
    }
}

/// Runs the tool on parsed arguments; `stdin` is read only when the input is
/// standard input.
pub fn run(args: &Args, stdin: &mut dyn Read) -> Outcome {
    if let Some(name) = &args.suite {
        return run_suite(name);
    }
    let Some(cmd) = args.command else {
        return failure(CliError::Usage("no command given".into()));
    };
    let source = match args.input.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p),
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map(|_| s)
        }
    };
    let source = match source {
        Ok(s) => s,
        Err(e) => return failure(e.into()),
    };
    let problem = match parse_problem(&source, args.order_cap) {
        Ok(p) => p,
        Err(e) => return failure(e.into()),
    };
    let (doc, code) = match run_command(cmd, &problem, args.format, args.basis) {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    match emit(&doc) {
        Ok(stdout) => Outcome { stdout, stderr: String::new(), code },
        Err(e) => failure(e.into()),
    }
}
