use clap::Parser;

fn main() {
    let cli = etlmon::cli::Cli::parse();
    if let Err(e) = etlmon::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
