use clap::Parser;

use scancheck::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
