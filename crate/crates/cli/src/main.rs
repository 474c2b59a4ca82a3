use clap::Parser;
use gree_cli::app::{run, Cli};

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprint!("{}", e.document());
            e.exit_code()
        }
    };
    std::process::exit(code);
}
