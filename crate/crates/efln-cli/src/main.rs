use std::process::ExitCode;

fn main() -> ExitCode {
    efln_cli::main_entry()
}
