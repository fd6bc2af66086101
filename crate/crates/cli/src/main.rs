use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use lepage_cli::{run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = run(&args, &mut std::io::stdin().lock());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(outcome.code as u8)
}
