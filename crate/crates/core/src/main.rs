use clap::Parser;
use conceptual_density::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("cdwsd: {e}");
        std::process::exit(e.exit_code());
    }
}
