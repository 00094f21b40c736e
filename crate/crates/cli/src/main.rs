use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use famova_cli::{run, usage_error, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            // --help and --version
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let usage = usage_error(&err);
            eprintln!("{}", usage.to_line());
            return ExitCode::from(usage.exit_code);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            let text = outcome.report.render(outcome.format);
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(err) => {
            eprintln!("{}", err.to_line());
            ExitCode::from(err.exit_code)
        }
    }
}
