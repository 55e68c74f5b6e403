//! Command-line surface of the abwave laboratory: scenario files, commands
//! and CSV output.

pub mod ascii;
pub mod commands;
pub mod csv;
pub mod error;
pub mod scenario_file;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{execute, Cli, Command};
pub use error::{CliError, CliResult};

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Errors are reported on `err`.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut (dyn Write + Send) = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
