use std::io;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use phonon_laser_cli::{execute, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr();
    match execute(cli, &mut stdout, &mut stderr) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is a normal way to stop reading.
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
