use clap::Parser;

use nlimsim::cli::{run, Cli};

fn main() {
    // clap handles usage errors itself (exit 2); everything past parsing
    // maps through Error::exit_code: 3 for infeasible requests, 2 for the
    // rest.
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
