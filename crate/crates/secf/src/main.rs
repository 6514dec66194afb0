use clap::Parser;

fn main() {
    let cli = secf::cli::Cli::parse();
    if let Err(e) = secf::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
