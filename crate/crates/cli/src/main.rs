use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use framelab_cli::{run, Format, Job, Overrides, EXIT_ERROR};

/// Frame bounds for Gabor and wavelet systems with piecewise-polynomial windows.
#[derive(Debug, Parser)]
#[command(name = "framelab", version)]
struct Args {
    job: Job,
    #[arg(long, value_name = "PATH")]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR as u8) } else { ExitCode::SUCCESS };
        }
    };
    let overrides = Overrides { seed: args.seed, out: args.out, format: args.format };
    match run(args.job, &args.config, &overrides) {
        Ok(outcome) => {
            if outcome.written_to.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(outcome.rendered.as_bytes()).is_err() {
                    return ExitCode::from(EXIT_ERROR as u8);
                }
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("framelab: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
