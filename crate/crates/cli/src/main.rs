use clap::Parser;
use ordinal_consensus_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
