use clap::Parser;
use hsnet_cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match run(&cli) {
        Ok(output) => output,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let mut writes = output.files;
    match &cli.output {
        Some(path) => writes.push((path.clone(), output.text)),
        None => print!("{}", output.text),
    }
    for (path, contents) in writes {
        if let Err(err) = std::fs::write(&path, contents) {
            eprintln!("error: cannot write {}: {err}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(output.status.exit_code() as u8)
}
