use clap::Parser;

use pipestab::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
