use clap::Parser;
use weightscape::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
