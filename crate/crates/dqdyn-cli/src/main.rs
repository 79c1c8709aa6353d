use clap::Parser;

fn main() {
    let cli = dqdyn_cli::Cli::parse();
    if let Err(e) = dqdyn_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
