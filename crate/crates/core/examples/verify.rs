//! Runs the built-in invariant checks, as `singlet-qkd verify` does.
//!
//! ```bash
//! cargo run --example verify
//! ```

use std::process::ExitCode;

fn main() -> ExitCode {
    match singlet_qkd::cli::cmd_verify(&mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
